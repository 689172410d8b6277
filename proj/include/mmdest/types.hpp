// Copyright 2026 The mmdest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMDEST_TYPES_HPP_
#define MMDEST_TYPES_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mmdest {

using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
// One observation per row.
using SampleSet = RowMatrix;
using ParamVec = Eigen::VectorXd;

// theta outside the family's parameter domain
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Jacobians of a batch of draws, stored as an (n*d) x p row-major stack.
class JacobianStack {
 public:
  JacobianStack() = default;
  JacobianStack(Index n, Index d, Index p) : n_(n), d_(d), p_(p), data_(n * d, p) {
    data_.setZero();
  }

  Index size() const { return n_; }
  Index rows() const { return d_; }
  Index cols() const { return p_; }

  auto operator[](Index i) { return data_.middleRows(i * d_, d_); }
  auto operator[](Index i) const { return data_.middleRows(i * d_, d_); }
  const double* row_ptr(Index i) const { return data_.data() + i * d_ * p_; }
  double* row_ptr(Index i) { return data_.data() + i * d_ * p_; }

  const RowMatrix& stacked() const { return data_; }

 private:
  Index n_ = 0, d_ = 0, p_ = 0;
  RowMatrix data_;
};

}  // namespace mmdest

#endif  // MMDEST_TYPES_HPP_
