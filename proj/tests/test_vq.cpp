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

#include "tfcodec/errors.hpp"
#include "tfcodec/optim.hpp"
#include "tfcodec/vq.hpp"
#include "testutil.hpp"

using namespace tfcodec;
using testutil::grad_check;
using testutil::random_tensor;

TEST_CASE("codebook_config matches the published table") {
  CHECK(codebook_config("0.512").groups == 3);
  CHECK(codebook_config("0.512").codewords == 512);
  CHECK(codebook_config("1").groups == 6);
  CHECK(codebook_config("1").codewords == 1024);
  CHECK(codebook_config("3").groups == 16);
  CHECK(codebook_config("3").codewords == 1024);
  CHECK(codebook_config("6").groups == 32);
  CHECK(codebook_config("6").codewords == 1024);
  CHECK_THROWS_AS(codebook_config("2"), CodecError);
  CHECK(rate_target_bits("3") == doctest::Approx(120.0));
  CHECK(rate_target_bits("0.512") == doctest::Approx(20.48));
}

TEST_CASE("merge_frames layout, inverse and padding") {
  // T=4, C=2: one merged frame of 8 channels, frame-major
  Tensor x({1, 2, 4});
  for (long i = 0; i < 8; ++i) x[i] = static_cast<double>(i);  // x[c][t] = 4c+t... row-major c*4+t
  long pad = -1;
  Tensor m = merge_frames_plain(x, &pad);
  CHECK(pad == 0);
  REQUIRE(m.shape() == std::vector<long>{1, 8, 1});
  // merged channel j*C+c at tm=0 equals x[c][j]
  for (long j = 0; j < 4; ++j)
    for (long c = 0; c < 2; ++c) CHECK(m[(j * 2 + c)] == x[c * 4 + j]);

  Rng rng(3);
  Tensor y = random_tensor({2, 3, 12}, rng);
  Tensor back = split_frames_plain(merge_frames_plain(y), 12);
  for (long i = 0; i < y.size(); ++i) REQUIRE(back[i] == y[i]);

  Tensor z6 = random_tensor({1, 2, 6}, rng);
  Tensor mz = merge_frames_plain(z6, &pad);
  CHECK(pad == 2);
  CHECK(mz.dim(2) == 2);
  // padded sub-frames repeat the final frame
  for (long c = 0; c < 2; ++c) {
    CHECK(mz[(2 * 2 + c) * 2 + 1] == z6[c * 6 + 5]);
    CHECK(mz[(3 * 2 + c) * 2 + 1] == z6[c * 6 + 5]);
  }
  Tensor zb = split_frames_plain(mz, 6);
  for (long i = 0; i < z6.size(); ++i) REQUIRE(zb[i] == z6[i]);
}

TEST_CASE("merge/split gradients") {
  Rng rng(5);
  auto x = ad::Var::leaf(random_tensor({2, 3, 10}, rng));
  auto mask = ad::Var::constant(random_tensor({2, 12, 3}, rng));
  auto build = [&]() { return ad::mean_all(ad::mul(merge_frames(x).merged, mask)); };
  CHECK(grad_check(build, {x}, rng, 10) < 1e-6);
  auto build2 = [&]() {
    return ad::mean_all(ad::square(split_frames(merge_frames(x).merged, 10)));
  };
  CHECK(grad_check(build2, {x}, rng, 10) < 1e-6);
}

TEST_CASE("distances: exact zero, analytic pair, brute force oracle") {
  Tensor cb({2, 2});
  cb[0] = 0.0;
  cb[1] = 0.0;
  cb[2] = 3.0;
  cb[3] = 4.0;
  Tensor x({2});
  Tensor d = vq_distances(x, cb);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == doctest::Approx(5.0).epsilon(1e-12));

  Rng rng(7);
  Tensor cb16 = random_tensor({16, 6}, rng);
  Tensor v = random_tensor({6}, rng);
  Tensor dd = vq_distances(v, cb16);
  for (long k = 0; k < 16; ++k) {
    double acc = 0.0;
    for (long i = 0; i < 6; ++i) acc += (v[i] - cb16[k * 6 + i]) * (v[i] - cb16[k * 6 + i]);
    CHECK(dd[k] == doctest::Approx(std::sqrt(acc)).epsilon(1e-9));
  }
  // x equal to a codeword
  for (long i = 0; i < 6; ++i) v[i] = cb16[5 * 6 + i];
  CHECK(vq_distances(v, cb16)[5] == 0.0);
}

TEST_CASE("noise-off assignment is the l2-nearest codeword on 1e4 draws") {
  Rng rng(11);
  VqConfig cfg;
  cfg.groups = 2;
  cfg.codewords = 16;
  cfg.dim = 4;
  auto cb = ad::Var::constant(random_tensor({2, 16, 4}, rng));
  const long R = 5000;  // x 2 groups = 1e4 assignments
  auto x = ad::Var::constant(random_tensor({R, 8}, rng));
  auto q = vq_quantize(x, cb, cfg, 0.7, false, nullptr);
  long correct = 0;
  for (long r = 0; r < R; ++r)
    for (long g = 0; g < 2; ++g) {
      Tensor row({4});
      for (long i = 0; i < 4; ++i) row[i] = x.value()[r * 8 + g * 4 + i];
      Tensor grp({16, 4});
      std::copy(cb.value().data() + g * 64, cb.value().data() + (g + 1) * 64, grp.data());
      Tensor d = vq_distances(row, grp);
      long best = 0;
      for (long k = 1; k < 16; ++k)
        if (d[k] < d[best]) best = k;
      if (best == q.indices[r * 2 + g]) ++correct;
    }
  CHECK(correct == R * 2);  // 100%
}

TEST_CASE("assignment probabilities match a direct evaluation") {
  // K=2, d=(0,1), alpha=5, tau=1, noise off -> softmax(0,-5)
  VqConfig cfg;
  cfg.groups = 1;
  cfg.codewords = 2;
  cfg.dim = 1;
  Tensor cbv({1, 2, 1});
  cbv[0] = 0.0;
  cbv[1] = 1.0;  // distances from x=0: (0,1)
  auto cb = ad::Var::constant(cbv);
  auto x = ad::Var::constant(Tensor({1, 1}));

  // mean_soft here equals the per-row Softmax(z) since R=1 (Softmax without
  // temperature); the tempered probabilities at tau=1 coincide.
  auto q = vq_quantize(x, cb, cfg, 1.0, false, nullptr);
  const double e5 = std::exp(-5.0);
  CHECK(q.mean_soft.value()[0] == doctest::Approx(1.0 / (1.0 + e5)).epsilon(1e-9));
  CHECK(q.mean_soft.value()[1] == doctest::Approx(e5 / (1.0 + e5)).epsilon(1e-9));
  CHECK(q.indices[0] == 0);

  // independent full evaluation on a random instance
  Rng rng(13);
  VqConfig c2;
  c2.groups = 1;
  c2.codewords = 8;
  c2.dim = 3;
  auto cb2 = ad::Var::constant(random_tensor({1, 8, 3}, rng));
  auto x2 = ad::Var::constant(random_tensor({1, 3}, rng));
  auto q2 = vq_quantize(x2, cb2, c2, 1.0, false, nullptr);
  Tensor grp({8, 3});
  std::copy(cb2.value().data(), cb2.value().data() + 24, grp.data());
  Tensor row({3});
  for (long i = 0; i < 3; ++i) row[i] = x2.value()[i];
  Tensor d = vq_distances(row, grp);
  double denom = 0.0;
  std::vector<double> probs(8);
  for (long k = 0; k < 8; ++k) denom += std::exp(-5.0 * d[k]);
  for (long k = 0; k < 8; ++k) probs[k] = std::exp(-5.0 * d[k]) / denom;
  for (long k = 0; k < 8; ++k)
    CHECK(q2.mean_soft.value()[k] == doctest::Approx(probs[k]).epsilon(1e-6));
}

TEST_CASE("gumbel sampling follows the softmax distribution and stays valid") {
  Rng rng(17);
  VqConfig cfg;
  cfg.groups = 1;
  cfg.codewords = 4;
  cfg.dim = 2;
  Tensor cbv = random_tensor({1, 4, 2}, rng);
  auto cb = ad::Var::constant(cbv);
  Tensor xv({1, 2});
  xv[0] = 0.3;
  xv[1] = -0.2;

  // theoretical selection law: softmax(-alpha d)
  Tensor grp({4, 2});
  std::copy(cbv.data(), cbv.data() + 8, grp.data());
  Tensor row({2});
  row[0] = xv[0];
  row[1] = xv[1];
  Tensor d = vq_distances(row, grp);
  double denom = 0.0;
  std::vector<double> p(4);
  for (long k = 0; k < 4; ++k) denom += std::exp(-5.0 * d[k]);
  for (long k = 0; k < 4; ++k) p[k] = std::exp(-5.0 * d[k]) / denom;

  const long trials = 20000;
  std::vector<long> hist(4, 0);
  Rng noise(12345);
  auto x = ad::Var::constant(xv);
  for (long i = 0; i < trials; ++i) {
    auto q = vq_quantize(x, cb, cfg, 1.3, true, &noise);
    ++hist[static_cast<std::size_t>(q.indices[0])];
  }
  for (long k = 0; k < 4; ++k)
    CHECK(std::abs(static_cast<double>(hist[k]) / trials - p[k]) < 0.02);
}

TEST_CASE("temperature limit makes tempered probabilities one-hot") {
  Rng rng(19);
  VqConfig cfg;
  cfg.groups = 1;
  cfg.codewords = 6;
  cfg.dim = 3;
  auto cb = ad::Var::constant(random_tensor({1, 6, 3}, rng));
  auto x = ad::Var::constant(random_tensor({1, 3}, rng));
  // soft forward exposes the tempered mixture; at tau->0 it collapses onto
  // the nearest codeword
  auto q = vq_quantize(x, cb, cfg, 0.01, false, nullptr, {}, {}, false);
  auto hard = vq_quantize(x, cb, cfg, 0.01, false, nullptr);
  for (long i = 0; i < 3; ++i)
    CHECK(q.quantized.value()[i] ==
          doctest::Approx(hard.quantized.value()[i]).epsilon(1e-6));
}

TEST_CASE("straight-through forward rows are exact codebook rows; inference deterministic") {
  Rng rng(23);
  VqConfig cfg;
  cfg.groups = 3;
  cfg.codewords = 5;
  cfg.dim = 2;
  auto cb = ad::Var::constant(random_tensor({3, 5, 2}, rng));
  auto x = ad::Var::constant(random_tensor({7, 6}, rng));
  auto a = vq_quantize(x, cb, cfg, 0.8, false, nullptr);
  auto b = vq_quantize(x, cb, cfg, 0.8, false, nullptr);
  for (std::size_t i = 0; i < a.indices.size(); ++i) REQUIRE(a.indices[i] == b.indices[i]);
  for (long r = 0; r < 7; ++r)
    for (long g = 0; g < 3; ++g) {
      const long k = a.indices[r * 3 + g];
      for (long i = 0; i < 2; ++i)
        REQUIRE(a.quantized.value()[r * 6 + g * 2 + i] == cb.value()[(g * 5 + k) * 2 + i]);
    }
}

TEST_CASE("probabilities valid with and without noise") {
  Rng rng(29);
  Rng noise(31);
  VqConfig cfg;
  cfg.groups = 2;
  cfg.codewords = 9;
  cfg.dim = 3;
  auto cb = ad::Var::constant(random_tensor({2, 9, 3}, rng));
  auto x = ad::Var::constant(random_tensor({11, 6}, rng));
  for (bool with_noise : {false, true}) {
    auto q = vq_quantize(x, cb, cfg, 0.9, with_noise, &noise, {}, {}, false);
    // mean_soft rows: nonnegative, sum 1
    for (long g = 0; g < 2; ++g) {
      double sum = 0.0;
      for (long k = 0; k < 9; ++k) {
        CHECK(q.mean_soft.value()[g * 9 + k] >= 0.0);
        sum += q.mean_soft.value()[g * 9 + k];
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("soft entropy: one-hot, uniform, hand-computed mixture") {
  Tensor onehot({1, 8});
  onehot[3] = 1.0;
  CHECK(soft_entropy_total_bits(ad::Var::constant(onehot)).item() ==
        doctest::Approx(0.0).epsilon(1e-9));

  Tensor uni({1, 1024});
  for (long i = 0; i < 1024; ++i) uni[i] = 1.0 / 1024.0;
  CHECK(soft_entropy_total_bits(ad::Var::constant(uni)).item() ==
        doctest::Approx(10.0).epsilon(1e-9));

  Tensor mix({1, 8});
  mix[0] = 0.5;
  mix[1] = 0.25;
  mix[2] = 0.25;
  CHECK(soft_entropy_total_bits(ad::Var::constant(mix)).item() ==
        doctest::Approx(1.5).epsilon(1e-6));

  CHECK_THROWS_AS(soft_entropy_total_bits(ad::Var::constant(Tensor({0}))), CodecError);
}

TEST_CASE("rate loss values and its gradient sign through soft entropy") {
  auto h = ad::Var::constant(Tensor::scalar(120.0));
  CHECK(rate_loss(h, 120.0).item() == 0.0);
  CHECK(rate_loss(ad::Var::constant(Tensor::scalar(130.0)), 120.0).item() ==
        doctest::Approx(10.0));

  // gradient through the soft entropy pushes H toward the target from both sides
  Rng rng(37);
  VqConfig cfg;
  cfg.groups = 1;
  cfg.codewords = 8;
  cfg.dim = 2;
  auto cb = ad::Var::leaf(random_tensor({1, 8, 2}, rng));
  auto x = ad::Var::constant(random_tensor({64, 2}, rng));
  auto entropy_of = [&]() {
    auto q = vq_quantize(x, cb, cfg, 1.0, false, nullptr);
    return soft_entropy_total_bits(q.mean_soft);
  };
  const double h0 = entropy_of().item();
  for (double target : {h0 - 1.0, h0 + 1.0}) {
    cb.zero_grad();
    auto loss = rate_loss(entropy_of(), target);
    ad::backward(loss);
    // one tiny gradient step must reduce |H - target|
    Tensor keep = cb.value();
    for (long i = 0; i < cb.size(); ++i) cb.value()[i] -= 1e-3 * cb.grad()[i];
    const double h1 = entropy_of().item();
    CHECK(std::abs(h1 - target) < std::abs(h0 - target));
    cb.value() = keep;
  }
}

TEST_CASE("soft paths pass finite-difference checks (distance and plain kinds)") {
  Rng rng(41);
  VqConfig cfg;
  cfg.groups = 2;
  cfg.codewords = 6;
  cfg.dim = 3;
  auto cb = ad::Var::leaf(random_tensor({2, 6, 3}, rng));
  auto x = ad::Var::leaf(random_tensor({5, 6}, rng));
  auto mask = ad::Var::constant(random_tensor({5, 6}, rng));

  auto build_soft = [&]() {
    auto q = vq_quantize(x, cb, cfg, 0.9, false, nullptr, {}, {}, false);
    auto distortion = ad::mean_all(ad::mul(q.quantized, mask));
    auto rate = rate_loss(soft_entropy_total_bits(q.mean_soft), 2.0);
    return ad::add(distortion, ad::mul_scalar(rate, 0.1));
  };
  CHECK(grad_check(build_soft, {x, cb}, rng, 20) < 1e-5);

  VqConfig plain = cfg;
  plain.kind = VqConfig::Kind::kPlainGumbel;
  auto pw = ad::Var::leaf(random_tensor({2, 6, 3}, rng, 0.5));
  auto pb = ad::Var::leaf(random_tensor({2, 6}, rng, 0.2));
  auto build_plain = [&]() {
    auto q = vq_quantize(x, cb, plain, 0.9, false, nullptr, pw, pb, false);
    auto distortion = ad::mean_all(ad::mul(q.quantized, mask));
    auto rate = rate_loss(soft_entropy_total_bits(q.mean_soft), 2.0);
    return ad::add(distortion, ad::mul_scalar(rate, 0.1));
  };
  CHECK(grad_check(build_plain, {x, cb, pw, pb}, rng, 16) < 1e-5);
}

TEST_CASE("straight-through backward equals the soft-forward backward") {
  Rng rng(43);
  Rng noiseA(99), noiseB(99);
  VqConfig cfg;
  cfg.groups = 2;
  cfg.codewords = 7;
  cfg.dim = 2;
  auto cb = ad::Var::leaf(random_tensor({2, 7, 2}, rng));
  auto x = ad::Var::leaf(random_tensor({6, 4}, rng));
  auto mask = ad::Var::constant(random_tensor({6, 4}, rng));

  auto qa = vq_quantize(x, cb, cfg, 0.8, true, &noiseA);  // hard forward
  ad::backward(ad::mean_all(ad::mul(qa.quantized, mask)));
  Tensor gx_hard = x.grad(), gcb_hard = cb.grad();
  x.zero_grad();
  cb.zero_grad();
  auto qb = vq_quantize(x, cb, cfg, 0.8, true, &noiseB, {}, {}, false);  // soft forward
  ad::backward(ad::mean_all(ad::mul(qb.quantized, mask)));
  // mixture-weight path to E differs only via the value itself: both runs use
  // the same seeds, so gradients agree exactly
  for (long i = 0; i < x.size(); ++i) REQUIRE(gx_hard[i] == doctest::Approx(x.grad()[i]));
  for (long i = 0; i < cb.size(); ++i) REQUIRE(gcb_hard[i] == doctest::Approx(cb.grad()[i]));
}

TEST_CASE("adding a codeword never increases the minimum distance") {
  Rng rng(47);
  for (int trial = 0; trial < 200; ++trial) {
    const long K = 3 + static_cast<long>(rng.uniform_index(8));
    Tensor cb = random_tensor({K, 4}, rng);
    Tensor x = random_tensor({4}, rng);
    Tensor d = vq_distances(x, cb);
    double before = d[0];
    for (long k = 1; k < K; ++k) before = std::min(before, d[k]);
    Tensor cb2({K + 1, 4});
    std::copy(cb.data(), cb.data() + K * 4, cb2.data());
    for (long i = 0; i < 4; ++i) cb2[K * 4 + i] = rng.normal();
    Tensor d2 = vq_distances(x, cb2);
    double after = d2[0];
    for (long k = 1; k < K + 1; ++k) after = std::min(after, d2[k]);
    CHECK(after <= before);
  }
}

TEST_CASE("dequantize reproduces quantizer output and rejects bad indices") {
  Rng rng(53);
  VqConfig cfg;
  cfg.groups = 2;
  cfg.codewords = 4;
  cfg.dim = 3;
  auto cb = ad::Var::constant(random_tensor({2, 4, 3}, rng));
  auto x = ad::Var::constant(random_tensor({5, 6}, rng));
  auto q = vq_quantize(x, cb, cfg, 1.0, false, nullptr);
  Tensor deq = vq_dequantize(q.indices, cb.value(), cfg);
  for (long i = 0; i < deq.size(); ++i) REQUIRE(deq[i] == q.quantized.value()[i]);

  auto bad = q.indices;
  bad[0] = 99;
  CHECK_THROWS_AS(vq_dequantize(bad, cb.value(), cfg), CodecError);
}

TEST_CASE("rate control steers hard-assignment entropy on a clustered task") {
  // 8 well-separated Gaussian clusters, K=32, G=1; target 3 bits.
  Rng rng(59);
  const long N = 512, D = 4, K = 32;
  Tensor centers = random_tensor({8, D}, rng, 3.0);
  Tensor data({N, D});
  for (long r = 0; r < N; ++r) {
    const long c = static_cast<long>(rng.uniform_index(8));
    for (long i = 0; i < D; ++i) data[r * D + i] = centers[c * D + i] + 0.35 * rng.normal();
  }
  VqConfig cfg;
  cfg.groups = 1;
  cfg.codewords = K;
  cfg.dim = D;
  auto x = ad::Var::constant(data);
  auto cb = ad::Var::leaf(init_codebook_kmeans(data, cfg, 3, rng));
  Adam opt({cb}, 5e-3);
  Rng noise(61);
  const double target = 3.0;
  const long steps = 400;
  for (long step = 0; step < steps; ++step) {
    const double frac = static_cast<double>(step) / steps;
    const double tau = 2.0 * std::pow(0.25, frac);
    auto q = vq_quantize(x, cb, cfg, tau, true, &noise);
    auto dist = ad::mean_all(ad::square(ad::sub(q.quantized, x)));
    auto rate = rate_loss(soft_entropy_total_bits(q.mean_soft), target);
    auto loss = ad::add(dist, ad::mul_scalar(rate, 0.5));
    ad::backward(loss);
    opt.step();
  }
  auto qf = vq_quantize(x, cb, cfg, 0.5, false, nullptr);
  const double h = hard_assignment_entropy_bits(qf.indices, 1, K);
  MESSAGE("hard entropy after training: ", h, " bits (target 3)");
  CHECK(h > 0.9 * target);
  CHECK(h < 1.1 * target);
}

TEST_CASE("kmeans++ init covers clusters") {
  Rng rng(67);
  const long N = 256, D = 3;
  Tensor data({N, D});
  for (long r = 0; r < N; ++r)
    for (long i = 0; i < D; ++i) data[r * D + i] = (r % 4) * 5.0 + 0.1 * rng.normal();
  VqConfig cfg;
  cfg.groups = 1;
  cfg.codewords = 8;
  cfg.dim = D;
  Tensor cb = init_codebook_kmeans(data, cfg, 5, rng);
  // quantizing with the seeded book leaves small distortion
  auto q = vq_quantize(ad::Var::constant(data), ad::Var::constant(cb), cfg, 1.0, false, nullptr);
  double mse = 0.0;
  for (long i = 0; i < data.size(); ++i) {
    const double dd = data[i] - q.quantized.value()[i];
    mse += dd * dd;
  }
  mse /= data.size();
  CHECK(mse < 0.1);
}
