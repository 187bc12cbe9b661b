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

#ifndef TFCODEC_TENSOR_HPP_
#define TFCODEC_TENSOR_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace tfcodec {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;
using VecMap = Eigen::Map<Eigen::ArrayXd>;
using ConstVecMap = Eigen::Map<const Eigen::ArrayXd>;

class TensorError : public std::runtime_error {
 public:
  explicit TensorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense row-major double tensor, rank <= 4. The last axis varies fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<long> shape) : shape_(std::move(shape)) {
    data_.setZero(count(shape_));
  }
  Tensor(std::initializer_list<long> shape) : Tensor(std::vector<long>(shape)) {}

  static Tensor zeros(std::vector<long> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<long> shape, double v) {
    Tensor t(std::move(shape));
    t.data_.setConstant(v);
    return t;
  }
  static Tensor scalar(double v) { return full({1}, v); }
  static Tensor from(std::vector<long> shape, std::initializer_list<double> vals);

  const std::vector<long>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  long dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  long size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](long i) { return data_[i]; }
  double operator[](long i) const { return data_[i]; }
  double item() const {
    if (size() != 1) throw TensorError("item() on non-scalar tensor");
    return data_[0];
  }

  VecMap flat() { return VecMap(data_.data(), data_.size()); }
  ConstVecMap flat() const { return ConstVecMap(data_.data(), data_.size()); }

  // Contiguous 2D view; rows*cols must equal size().
  MatMap mat(long rows, long cols) {
    check2d(rows, cols);
    return MatMap(data_.data(), rows, cols);
  }
  ConstMatMap mat(long rows, long cols) const {
    check2d(rows, cols);
    return ConstMatMap(data_.data(), rows, cols);
  }

  Tensor reshaped(std::vector<long> shape) const;

  void set_zero() { data_.setZero(); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const { return data_.isFinite().all(); }

  static long count(const std::vector<long>& shape) {
    long n = 1;
    for (long d : shape) {
      if (d < 0) throw TensorError("negative dimension");
      n *= d;
    }
    return n;
  }

  std::string shape_str() const;

 private:
  void check2d(long rows, long cols) const {
    if (rows * cols != data_.size()) throw TensorError("mat() view size mismatch");
  }

  std::vector<long> shape_;
  Eigen::ArrayXd data_;
};

}  // namespace tfcodec

#endif  // TFCODEC_TENSOR_HPP_
