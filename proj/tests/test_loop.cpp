// Copyright 2026 The TFCodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "tfcodec/errors.hpp"
#include "tfcodec/loop.hpp"
#include "testutil.hpp"

using namespace tfcodec;
using testutil::grad_check;
using testutil::random_tensor;

namespace {

struct LoopFixture {
  ParamRegistry reg;
  Rng rng{77};
  long C = 12;
  VqConfig vq;
  Tensor codebook;
  PredictiveLoop loop;

  explicit LoopFixture(PredictorConfig::Kind kind = PredictorConfig::Kind::kConv)
      : loop(make_loop(kind)) {
    vq.groups = 3;
    vq.codewords = 11;
    vq.dim = C / 3 * 0 + 4;  // C=12 -> D=4
    codebook = random_tensor({3, 11, 4}, rng);
  }

  PredictiveLoop make_loop(PredictorConfig::Kind kind) {
    PredictorConfig pc;
    pc.kind = kind;
    return PredictiveLoop(reg, "loop", pc, C, rng);
  }

  QuantizerRefs refs() {
    QuantizerRefs q;
    q.codebook = &codebook;
    q.cfg = vq;
    return q;
  }
};

}  // namespace

TEST_CASE("cold-start prediction is deterministic and finite") {
  LoopFixture f;
  LoopState st = f.loop.make_state();
  Tensor a = f.loop.predict_step(st);
  Tensor b = f.loop.predict_step(st);
  CHECK(a.all_finite());
  for (long i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("adaptive predictor: uniform weights on identical history, zero-pred fallback") {
  LoopFixture f(PredictorConfig::Kind::kAdaptive);
  LoopState st = f.loop.make_state();

  // fewer than 2 frames: zero prediction
  Tensor p0 = f.loop.predict_step(st);
  for (long i = 0; i < p0.size(); ++i) CHECK(p0[i] == 0.0);

  // fill with identical frames v: every weight 1/(N-1), prediction = v
  Tensor v = random_tensor({f.C}, f.rng);
  for (int i = 0; i < 7; ++i) st.push(v.data());
  Tensor p = f.loop.predict_step(st);
  for (long c = 0; c < f.C; ++c) CHECK(p[c] == doctest::Approx(v[c]).epsilon(1e-9));
}

TEST_CASE("adaptive predictor: most similar frame gets the largest weight") {
  LoopFixture f(PredictorConfig::Kind::kAdaptive);
  const long C = f.C, N = 7;
  // history: one key nearly equal to the last frame, others orthogonal-ish
  Tensor window({N, C});
  Rng rng(5);
  for (long j = 0; j < N; ++j)
    for (long c = 0; c < C; ++c) window[j * C + c] = rng.normal();
  // make frame t-3 (row N-3... key j where key=frame t-2-j) close to query
  const double* qrow = window.data() + (N - 1) * C;
  for (long c = 0; c < C; ++c) window[(N - 3) * C + c] = qrow[c] * 3.0;  // strongly aligned

  // direct dense-matrix oracle per the attention equations
  std::vector<double> w(N - 1);
  double mx = -1e300;
  for (long j = 0; j < N - 1; ++j) {
    const double* key = window.data() + (N - 2 - j) * C;
    double dot = 0.0;
    for (long c = 0; c < C; ++c) dot += qrow[c] * key[c];
    w[j] = dot / std::sqrt(static_cast<double>(C));
    mx = std::max(mx, w[j]);
  }
  double denom = 0.0;
  for (auto& x : w) {
    x = std::exp(x - mx);
    denom += x;
  }
  for (auto& x : w) x /= denom;
  Tensor expect({C});
  for (long j = 0; j < N - 1; ++j)
    for (long c = 0; c < C; ++c) expect[c] += w[j] * window[(N - 1 - j) * C + c];

  LoopState st = f.loop.make_state();
  for (long j = 0; j < N; ++j) st.push(window.data() + j * C);
  Tensor got = f.loop.predict_step(st);
  for (long c = 0; c < C; ++c) CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-6));

  // weights sum to one and the aligned frame dominates
  double sum = 0.0;
  long best = 0;
  for (long j = 0; j < N - 1; ++j) {
    sum += w[j];
    if (w[j] > w[best]) best = j;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  // key j=1 is frame t-3 (the aligned one)
  CHECK(best == 1);
}

TEST_CASE("extract/synthesize gradients match finite differences") {
  LoopFixture f;
  Rng rng(9);
  auto xr = ad::Var::leaf(random_tensor({2, f.C, 5}, rng));
  auto xp = ad::Var::leaf(random_tensor({2, f.C, 5}, rng));
  auto mask = ad::Var::constant(random_tensor({2, f.C, 5}, rng));
  auto build = [&]() {
    return ad::mean_all(ad::mul(f.loop.extract(xr, xp, true), mask));
  };
  std::vector<ad::Var> leaves = {xr, xp};
  for (auto& [n, v] : f.reg.params())
    if (n.rfind("loop.extract", 0) == 0) leaves.push_back(v);
  CHECK(grad_check(build, leaves, rng, 8) < 1e-5);

  auto build2 = [&]() {
    return ad::mean_all(ad::mul(f.loop.synthesize(xr, xp, true), mask));
  };
  CHECK(grad_check(build2, {xr, xp}, rng, 8) < 1e-5);
}

TEST_CASE("conv predictor parallel/sequential equivalence and training benefit path") {
  LoopFixture f;
  const long B = 1, Tm = 9;
  Tensor ctx = random_tensor({B, f.C, Tm}, f.rng, 0.7);
  ad::Var par = f.loop.predict_sequence(ctx);

  // sequential: replay the context through a state
  LoopState st = f.loop.make_state();
  Tensor frame({f.C});
  for (long t = 0; t < Tm; ++t) {
    Tensor p = f.loop.predict_step(st);
    for (long c = 0; c < f.C; ++c)
      CHECK(par.value()[c * Tm + t] == doctest::Approx(p[c]).epsilon(1e-12));
    for (long c = 0; c < f.C; ++c) frame[c] = ctx[c * Tm + t];
    st.push(frame.data());
  }
}

TEST_CASE("prediction loss gradient reaches predictor but not the context") {
  LoopFixture f;
  Tensor ctx = random_tensor({1, f.C, 6}, f.rng);
  auto xr = ad::Var::leaf(random_tensor({1, f.C, 6}, f.rng));
  auto xp = f.loop.predict_sequence(ctx);
  auto loss = ad::mean_all(ad::square(ad::sub(xp, ad::detach(xr))));
  ad::backward(loss);
  bool any_pred_grad = false;
  for (auto& [n, v] : f.reg.params())
    if (n.rfind("loop.pred", 0) == 0 && !v.grad().empty())
      for (long i = 0; i < v.grad().size(); ++i) any_pred_grad = any_pred_grad || v.grad()[i] != 0;
  CHECK(any_pred_grad);
  CHECK(xr.grad().empty());  // stop-gradient: encoder side receives nothing
}

TEST_CASE("closed-loop consistency: decode matches encode bit-exactly") {
  for (auto kind : {PredictorConfig::Kind::kConv, PredictorConfig::Kind::kAdaptive,
                    PredictorConfig::Kind::kNone}) {
    LoopFixture f(kind);
    for (int trial = 0; trial < 5; ++trial) {
      Tensor xr = random_tensor({f.C, 13}, f.rng);
      auto enc = f.loop.run_encode_loop(xr, f.refs());
      Tensor dec = f.loop.run_decode_loop(enc.indices, f.refs());
      REQUIRE(dec.size() == enc.recon.size());
      REQUIRE(std::memcmp(dec.data(), enc.recon.data(),
                          sizeof(double) * static_cast<std::size_t>(dec.size())) == 0);
    }
  }
}

TEST_CASE("single-frame loop equals manual composition") {
  LoopFixture f;
  Tensor xr = random_tensor({f.C, 1}, f.rng);
  auto enc = f.loop.run_encode_loop(xr, f.refs());

  // manual: cold prediction, extract, nearest codeword, synthesize
  LoopState st = f.loop.make_state();
  Tensor xp = f.loop.predict_step(st);
  Tensor xr_col({f.C});
  for (long c = 0; c < f.C; ++c) xr_col[c] = xr[c];
  auto xn = f.loop
                .extract(ad::Var::constant(xr_col.reshaped({1, f.C, 1})),
                         ad::Var::constant(xp.reshaped({1, f.C, 1})), false)
                .value();
  for (long g = 0; g < f.vq.groups; ++g) {
    Tensor row({f.vq.dim});
    for (long i = 0; i < f.vq.dim; ++i) row[i] = xn[g * f.vq.dim + i];
    Tensor grp({f.vq.codewords, f.vq.dim});
    std::copy(f.codebook.data() + g * f.vq.codewords * f.vq.dim,
              f.codebook.data() + (g + 1) * f.vq.codewords * f.vq.dim, grp.data());
    Tensor d = vq_distances(row, grp);
    long best = 0;
    for (long k = 1; k < f.vq.codewords; ++k)
      if (d[k] < d[best]) best = k;
    CHECK(best == enc.indices[g]);
  }
}

TEST_CASE("loop truncation reproduces the prefix exactly") {
  LoopFixture f;
  Tensor xr = random_tensor({f.C, 10}, f.rng);
  auto full = f.loop.run_encode_loop(xr, f.refs());
  Tensor head({f.C, 6});
  for (long c = 0; c < f.C; ++c)
    for (long t = 0; t < 6; ++t) head[c * 6 + t] = xr[c * 10 + t];
  auto part = f.loop.run_encode_loop(head, f.refs());
  for (long t = 0; t < 6; ++t)
    for (long g = 0; g < f.vq.groups; ++g)
      REQUIRE(part.indices[t * f.vq.groups + g] == full.indices[t * f.vq.groups + g]);
  for (long c = 0; c < f.C; ++c)
    for (long t = 0; t < 6; ++t) REQUIRE(part.recon[c * 6 + t] == full.recon[c * 10 + t]);
}

TEST_CASE("decode loop edge cases: empty stream, bad index, zero-filled loss") {
  LoopFixture f;
  Tensor empty = f.loop.run_decode_loop({}, f.refs());
  CHECK(empty.dim(1) == 0);

  Tensor xr = random_tensor({f.C, 4}, f.rng);
  auto enc = f.loop.run_encode_loop(xr, f.refs());
  auto bad = enc.indices;
  bad[2] = 1000;
  CHECK_THROWS_AS(f.loop.run_decode_loop(bad, f.refs()), CodecError);

  // drop one group of frame 1: outputs after the loss differ but stay finite
  std::vector<std::uint8_t> arrival(enc.indices.size(), 1);
  arrival[1 * f.vq.groups + 1] = 0;
  Tensor lossy = f.loop.run_decode_loop(enc.indices, f.refs(), &arrival);
  CHECK(lossy.all_finite());
  bool prefix_same = true, suffix_diff = false;
  for (long c = 0; c < f.C; ++c) {
    prefix_same = prefix_same && lossy[c * 4 + 0] == enc.recon[c * 4 + 0];
    for (long t = 1; t < 4; ++t) suffix_diff = suffix_diff || lossy[c * 4 + t] != enc.recon[c * 4 + t];
  }
  CHECK(prefix_same);
  CHECK(suffix_diff);
}

TEST_CASE("attention weights nonnegative and normalized on random history") {
  LoopFixture f(PredictorConfig::Kind::kAdaptive);
  // exercised via prediction being a convex combination: prediction of
  // history scaled by 2 equals 2x prediction only if weights are unchanged;
  // here simply confirm the prediction lies in the convex hull coordinate-wise
  LoopState st = f.loop.make_state();
  Rng rng(33);
  std::vector<Tensor> frames;
  for (int j = 0; j < 7; ++j) {
    frames.push_back(random_tensor({f.C}, rng));
    st.push(frames.back().data());
  }
  Tensor p = f.loop.predict_step(st);
  for (long c = 0; c < f.C; ++c) {
    double lo = 1e300, hi = -1e300;
    for (int j = 1; j < 7; ++j) {  // value frames: t-1..t-6
      lo = std::min(lo, frames[j][c]);
      hi = std::max(hi, frames[j][c]);
    }
    CHECK(p[c] >= lo - 1e-9);
    CHECK(p[c] <= hi + 1e-9);
  }
}
