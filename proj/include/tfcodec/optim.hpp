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

#ifndef TFCODEC_OPTIM_HPP_
#define TFCODEC_OPTIM_HPP_

#include <vector>

#include "tfcodec/autodiff.hpp"

namespace tfcodec {

class Adam {
 public:
  Adam() = default;
  explicit Adam(std::vector<ad::Var> params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  // Applies accumulated gradients and clears them.
  void step();
  void zero_grad();

 private:
  struct Slot {
    ad::Var p;
    Tensor m, v;
  };
  std::vector<Slot> slots_;
  long t_ = 0;
  double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
};

}  // namespace tfcodec

#endif  // TFCODEC_OPTIM_HPP_
