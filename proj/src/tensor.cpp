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

#include "tfcodec/tensor.hpp"

#include <sstream>

namespace tfcodec {

Tensor Tensor::from(std::vector<long> shape, std::initializer_list<double> vals) {
  Tensor t(std::move(shape));
  if (static_cast<long>(vals.size()) != t.size())
    throw TensorError("from(): value count does not match shape");
  long i = 0;
  for (double v : vals) t.data_[i++] = v;
  return t;
}

Tensor Tensor::reshaped(std::vector<long> shape) const {
  if (count(shape) != size()) throw TensorError("reshape: element count mismatch");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << ",";
    os << shape_[i];
  }
  os << "]";
  return os.str();
}

}  // namespace tfcodec
