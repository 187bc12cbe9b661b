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

#include "tfcodec/params.hpp"

#include "tfcodec/errors.hpp"

namespace tfcodec {

ad::Var ParamRegistry::add_param(const std::string& name, Tensor init) {
  for (const auto& [n, v] : params_)
    if (n == name) throw internal_error("duplicate parameter: " + name);
  ad::Var v = ad::Var::leaf(std::move(init));
  params_.emplace_back(name, v);
  return v;
}

Tensor* ParamRegistry::add_buffer(const std::string& name, Tensor init) {
  for (const auto& [n, t] : buffers_)
    if (n == name) throw internal_error("duplicate buffer: " + name);
  buffers_.emplace_back(name, std::make_unique<Tensor>(std::move(init)));
  return buffers_.back().second.get();
}

std::vector<std::pair<std::string, Tensor*>> ParamRegistry::buffers() {
  std::vector<std::pair<std::string, Tensor*>> out;
  out.reserve(buffers_.size());
  for (auto& [n, t] : buffers_) out.emplace_back(n, t.get());
  return out;
}

ad::Var ParamRegistry::find_param(const std::string& name) const {
  for (const auto& [n, v] : params_)
    if (n == name) return v;
  throw internal_error("unknown parameter: " + name);
}

Tensor* ParamRegistry::find_buffer(const std::string& name) {
  for (auto& [n, t] : buffers_)
    if (n == name) return t.get();
  throw internal_error("unknown buffer: " + name);
}

long ParamRegistry::count_params(const std::string& prefix) const {
  long total = 0;
  for (const auto& [n, v] : params_)
    if (n.rfind(prefix, 0) == 0) total += v.size();
  return total;
}

void ParamRegistry::zero_grads() {
  for (auto& [n, v] : params_) v.zero_grad();
}

}  // namespace tfcodec
