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

#ifndef TFCODEC_PARAMS_HPP_
#define TFCODEC_PARAMS_HPP_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tfcodec/autodiff.hpp"

namespace tfcodec {

// Ordered name -> tensor registry. Parameters are trainable leaves; buffers
// (running statistics) are plain tensors serialized alongside them.
// Construction order is the iteration order, which keeps initialization and
// optimizer traversal deterministic.
class ParamRegistry {
 public:
  ad::Var add_param(const std::string& name, Tensor init);
  Tensor* add_buffer(const std::string& name, Tensor init);

  const std::vector<std::pair<std::string, ad::Var>>& params() const { return params_; }
  std::vector<std::pair<std::string, Tensor*>> buffers();

  ad::Var find_param(const std::string& name) const;
  Tensor* find_buffer(const std::string& name);

  long count_params(const std::string& prefix = "") const;

  void zero_grads();

 private:
  std::vector<std::pair<std::string, ad::Var>> params_;
  // unique_ptr keeps buffer addresses stable across registry growth
  std::vector<std::pair<std::string, std::unique_ptr<Tensor>>> buffers_;
};

}  // namespace tfcodec

#endif  // TFCODEC_PARAMS_HPP_
