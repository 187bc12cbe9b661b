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
#include "tfcodec/losses.hpp"
#include "testutil.hpp"

using namespace tfcodec;
using testutil::grad_check;
using testutil::random_tensor;

namespace {

StftConfig small_stft() {
  StftConfig cfg;
  cfg.window_len = 64;
  cfg.hop_len = 16;
  return cfg;
}

}  // namespace

TEST_CASE("loss_bin: zero at identity, grows with magnitude scaling, gradient") {
  Rng rng(3);
  StftConfig cfg = small_stft();
  auto x = ad::Var::leaf(random_tensor({1, 400}, rng, 0.4));
  auto p = ad::Var::leaf(Tensor::scalar(0.5));

  CHECK(loss_bin(x, x, p, cfg).item() == doctest::Approx(0.0).epsilon(1e-12));

  auto scaled = ad::mul_scalar(x, 2.0);
  auto half = ad::mul_scalar(x, 1.3);
  CHECK(loss_bin(x, scaled, p, cfg).item() > loss_bin(x, half, p, cfg).item());
  CHECK(loss_bin(x, half, p, cfg).item() > 0.0);

  auto y = ad::Var::leaf(random_tensor({1, 400}, rng, 0.4));
  auto build = [&]() { return loss_bin(x, y, p, cfg); };
  CHECK(grad_check(build, {x, y, p}, rng, 20) < 1e-4);
}

TEST_CASE("consistency projection is idempotent") {
  Rng rng(5);
  StftConfig cfg = small_stft();
  Tensor w = random_tensor({1, 500}, rng, 0.4);
  auto spec = ad::stft_op(ad::Var::constant(w), cfg);
  auto once = ad::stft_op(ad::istft_op(spec, cfg), cfg);
  auto twice = ad::stft_op(ad::istft_op(once, cfg), cfg);
  double worst = 0.0;
  for (long i = 0; i < once.size(); ++i)
    worst = std::max(worst, std::abs(once.value()[i] - twice.value()[i]));
  CHECK(worst < 1e-6);
}

TEST_CASE("loss_mel: identity zero, noise-vs-silence positive, gradient") {
  Rng rng(7);
  const std::vector<long> windows = {64, 128, 256};
  auto x = ad::Var::leaf(random_tensor({1, 1200}, rng, 0.3));
  CHECK(loss_mel(x, x, 16000, windows).item() == doctest::Approx(0.0));

  auto silence = ad::Var::constant(Tensor({1, 1200}));
  CHECK(loss_mel(x, silence, 16000, windows).item() > 0.0);

  auto y = ad::Var::leaf(random_tensor({1, 1200}, rng, 0.3));
  auto build = [&]() { return loss_mel(x, y, 16000, windows); };
  CHECK(grad_check(build, {x, y}, rng, 16) < 1e-4);
}

TEST_CASE("mel filterbank covers the band with triangular weights") {
  Tensor fb = mel_filterbank(256, 16000, 32);
  CHECK(fb.dim(0) == 32);
  CHECK(fb.dim(1) == 129);
  for (long i = 0; i < fb.size(); ++i) {
    CHECK(fb[i] >= 0.0);
    CHECK(fb[i] <= 1.0);
  }
  // every filter has positive mass
  for (long m = 0; m < 32; ++m) {
    double s = 0.0;
    for (long k = 0; k < 129; ++k) s += fb[m * 129 + k];
    CHECK(s > 0.0);
  }
}

TEST_CASE("loss_pred: zero at equality, stop-gradient on target, hand value") {
  Rng rng(9);
  auto xp = ad::Var::leaf(random_tensor({1, 2, 3}, rng));
  CHECK(loss_pred(xp, xp).item() == doctest::Approx(0.0));

  // hand-computed 2x3 toy value
  auto a = ad::Var::leaf(Tensor::from({1, 2, 3}, {1, 2, 3, 4, 5, 6}));
  auto b = ad::Var::leaf(Tensor::from({1, 2, 3}, {2, 2, 2, 2, 2, 2}));
  // squared diffs: 1,0,1,4,9,16 -> mean = 31/6
  CHECK(loss_pred(a, b).item() == doctest::Approx(31.0 / 6.0));

  auto target = ad::Var::leaf(random_tensor({1, 2, 3}, rng));
  auto loss = loss_pred(xp, target);
  ad::backward(loss);
  CHECK(!xp.grad().empty());
  CHECK(target.grad().empty());  // exactly no gradient to the target side
}

TEST_CASE("adversarial losses: published arithmetic") {
  auto ones = ad::Var::constant(Tensor::full({2, 3}, 1.0));
  auto zeros = ad::Var::constant(Tensor({2, 3}));
  CHECK(loss_adv_g(ones).item() == doctest::Approx(0.0));
  CHECK(loss_d(ones, zeros).item() == doctest::Approx(0.0));
  CHECK(loss_d(zeros, ones).item() == doctest::Approx(2.0));
}

TEST_CASE("loss_feat: zero at equality, hand value, layer permutation invariance") {
  Rng rng(11);
  std::vector<ad::Var> real, fake;
  for (int l = 0; l < 4; ++l) {
    real.push_back(ad::Var::constant(random_tensor({1, 2, 2, 2}, rng)));
    fake.push_back(real.back());
  }
  CHECK(loss_feat(real, fake).item() == doctest::Approx(0.0));

  // hand-computed on 1x2x2 toy maps (two layers)
  auto r1 = ad::Var::constant(Tensor::from({1, 1, 2, 2}, {1, 2, 3, 4}));
  auto f1 = ad::Var::constant(Tensor::from({1, 1, 2, 2}, {0, 2, 3, 8}));
  auto r2 = ad::Var::constant(Tensor::from({1, 1, 2, 2}, {0, 0, 0, 0}));
  auto f2 = ad::Var::constant(Tensor::from({1, 1, 2, 2}, {1, 1, 1, 1}));
  // layer1 mean |d| = (1+0+0+4)/4 = 1.25; layer2 = 1 -> mean = 1.125
  CHECK(loss_feat({r1, r2}, {f1, f2}).item() == doctest::Approx(1.125));
  CHECK(loss_feat({r2, r1}, {f2, f1}).item() == doctest::Approx(1.125));
}

TEST_CASE("total generator loss arithmetic") {
  LossWeights w;
  GeneratorLossParts parts;
  auto unit = [] { return ad::Var::constant(Tensor::scalar(1.0)); };
  parts.bin = unit();
  parts.mel = unit();
  parts.rate = unit();
  parts.pred = unit();
  parts.adv = unit();
  parts.feat = unit();
  CHECK(total_generator_loss(parts, w).item() == doctest::Approx(1.411));

  // gradient linearity: d(total)/d(bin component) is the weight
  auto binv = ad::Var::leaf(Tensor::scalar(1.0));
  parts.bin = binv;
  auto total = total_generator_loss(parts, w);
  ad::backward(total);
  CHECK(binv.grad()[0] == doctest::Approx(1.0));
}

TEST_CASE("discriminator shapes, determinism and gradients") {
  Rng rng(13);
  ParamRegistry reg;
  StftConfig cfg = small_stft();  // 33 bins
  DiscriminatorConfig dc;
  dc.channels = {4, 4, 8, 8};
  Discriminator disc(reg, "disc", cfg, dc, rng);

  // T frames: wave length such that T >= 160 -> T_d = T/16/10
  const long L = cfg.window_len + cfg.hop_len * (320 - 1);
  auto x = ad::Var::constant(random_tensor({1, L}, rng, 0.3));
  auto out = disc(x);
  CHECK(out.logits.shape() == std::vector<long>{1, 2});  // floor(320/16/10) = 2
  CHECK(out.features.size() == 4);

  auto out2 = disc(x);
  for (long i = 0; i < out.logits.size(); ++i)
    REQUIRE(out.logits.value()[i] == out2.logits.value()[i]);

  // too-short input is rejected
  auto shorty = ad::Var::constant(random_tensor({1, cfg.window_len + 20 * cfg.hop_len}, rng));
  CHECK_THROWS_AS(disc(shorty), CodecError);

  // finite gradients through logits and features
  Rng rng2(17);
  auto xw = ad::Var::leaf(random_tensor({1, L}, rng2, 0.3));
  std::vector<ad::Var> leaves = {xw};
  for (auto& [n, v] : reg.params()) leaves.push_back(v);
  auto build = [&]() {
    auto o = disc(xw);
    return ad::add(ad::mean_all(ad::square(o.logits)),
                   ad::mean_all(ad::abs_(o.features[2])));
  };
  CHECK(grad_check(build, leaves, rng2, 4) < 1e-4);
}
