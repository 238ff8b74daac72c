// SPDX-License-Identifier: Apache-2.0
//
// nfbt - Thompson-sampling beam training toolkit for near-field XL-MIMO links
// Copyright (C) 2026 the nfbt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace nfbt {

template <class Scalar>
using Complex = std::complex<Scalar>;

template <class Scalar>
using CVector = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;

template <class Scalar>
using CMatrix = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using RVector = Eigen::Vector<Scalar, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Raised when a covariance factorization or gain computation loses
/// positive-definiteness beyond the tolerated slack.
class NumericalDegeneracyError : public std::runtime_error {
  public:
    explicit NumericalDegeneracyError(const std::string &what) : std::runtime_error(what) {}
};

} // namespace nfbt
