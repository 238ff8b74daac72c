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

#include "nfbt/common.hpp"
#include "nfbt/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>

namespace nfbt {

/// Complex-Gaussian belief over the beamspace channel vector. The covariance
/// is kept Hermitian by re-symmetrizing after every update; `t` counts the
/// observations absorbed so far.
template <class Scalar>
struct GaussianBelief {
    CVector<Scalar> mean;
    CMatrix<Scalar> cov;
    long t = 0;
};

template <class Scalar>
struct PriorConfig {
    Scalar length_scale = Scalar(1) / Scalar(128); // correlation length on the angular grid
    CVector<Scalar> prior_mean;                    // empty means zero
    Scalar prior_scale = Scalar(1);                // multiplier on the kernel
};

/// One linear measurement of the beamspace channel: y = v^H g + noise, with
/// v the probing beam mapped into the DFT basis. The stored y is the
/// conjugate of the physical receive sample, which is exactly the convention
/// the mean/covariance recursion below assumes.
template <class Scalar>
struct Observation {
    CVector<Scalar> v;
    Complex<Scalar> y = Complex<Scalar>(0);
    Scalar noise_var = Scalar(0);
};

namespace detail {

// Unit-norm tolerance: 1e-10 in double precision, loosened proportionally
// for narrower scalars.
template <class Scalar>
constexpr Scalar unit_norm_slack() {
    return std::max(Scalar(1e-10), Scalar(500) * std::numeric_limits<Scalar>::epsilon());
}

template <class Scalar>
void validate_observation(const Observation<Scalar> &obs, Index n) {
    if (obs.v.size() != n)
        throw std::invalid_argument("observation dimension mismatch");
    if (!(obs.noise_var > Scalar(0)))
        throw std::invalid_argument("observation noise variance must be positive");
    if (std::abs(obs.v.norm() - Scalar(1)) > unit_norm_slack<Scalar>())
        throw std::invalid_argument("observation beam must be unit norm");
}

// Factor C with C C^H = cov via pivoted LDLT, tolerating the slightly
// indefinite pivots floating point leaves behind. Returns false when the
// matrix is indefinite beyond that slack.
template <class Scalar>
bool sampling_factor(const CMatrix<Scalar> &cov, CMatrix<Scalar> &factor) {
    Eigen::LDLT<CMatrix<Scalar>> ldlt(cov);
    if (ldlt.info() != Eigen::Success)
        return false;
    const RVector<Scalar> d = ldlt.vectorD().real();
    const Scalar d_max = std::max(d.maxCoeff(), Scalar(0));
    if (d.minCoeff() < -Scalar(1e-9) * d_max - std::numeric_limits<Scalar>::denorm_min())
        return false;
    factor = ldlt.matrixL();
    factor = ldlt.transpositionsP().transpose() * factor;
    factor *= d.cwiseMax(Scalar(0)).cwiseSqrt().template cast<Complex<Scalar>>().asDiagonal();
    return true;
}

} // namespace detail

/// Prior belief with a squared-exponential kernel over the DFT angular grid:
/// cov(i, j) = scale * exp(-((phi_i - phi_j) / l)^2 / 2). Neighboring angular
/// bins of a near-field channel share energy, and this kernel is what lets an
/// observation of one beam inform the belief about its neighbors.
template <class Scalar>
GaussianBelief<Scalar> rbf_prior(Index n, const PriorConfig<Scalar> &config) {
    if (n < 1)
        throw std::invalid_argument("rbf_prior: dimension must be positive");
    if (!(config.length_scale > Scalar(0)))
        throw std::invalid_argument("rbf_prior: length scale must be positive");
    if (config.prior_mean.size() != 0 && config.prior_mean.size() != n)
        throw std::invalid_argument("rbf_prior: prior mean dimension mismatch");

    GaussianBelief<Scalar> belief;
    belief.mean = config.prior_mean.size() ? config.prior_mean : CVector<Scalar>::Zero(n);
    belief.cov.resize(n, n);
    const Scalar grid_step = Scalar(2) / Scalar(n); // phi_i = (2i - n + 1) / n
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j <= i; ++j) {
            const Scalar u = grid_step * Scalar(i - j) / config.length_scale;
            const Scalar k = config.prior_scale * std::exp(Scalar(-0.5) * u * u);
            belief.cov(i, j) = k;
            belief.cov(j, i) = k;
        }
    }
    belief.t = 0;
    return belief;
}

/// Draws from CN(mean, cov): g = m + C (u1 + j u2) / sqrt(2) with C C^H = cov.
/// If the plain factorization rejects the matrix, one retry adds a diagonal
/// jitter of 1e-12 * trace / N on a copy; the stored covariance is never
/// touched. A second rejection raises NumericalDegeneracyError.
template <class Scalar>
CVector<Scalar> sample_belief(const GaussianBelief<Scalar> &belief, SplitMix64 &rng) {
    CMatrix<Scalar> factor;
    if (!detail::sampling_factor(belief.cov, factor)) {
        const Scalar jitter = Scalar(1e-12) * std::real(belief.cov.trace()) / Scalar(belief.cov.rows());
        CMatrix<Scalar> jittered = belief.cov;
        jittered.diagonal().array() += jitter;
        if (!detail::sampling_factor(jittered, factor))
            throw NumericalDegeneracyError("sample_belief: covariance factorization failed");
    }
    CVector<Scalar> z(belief.mean.size());
    for (Index i = 0; i < z.size(); ++i)
        z(i) = static_cast<Complex<Scalar>>(rng.complex_normal());
    return belief.mean + factor * z;
}

/// Rank-one conjugate-Gaussian step:
///   alpha = v^H D v + sigma^2,  k = D v / alpha,
///   m <- m + k (y - v^H m),     D <- D - k (D v)^H.
/// The updated covariance is re-symmetrized and its diagonal clamped to be
/// real non-negative, so long update chains cannot drift off the Hermitian
/// PSD manifold.
template <class Scalar>
GaussianBelief<Scalar> update(const GaussianBelief<Scalar> &belief, const Observation<Scalar> &obs) {
    detail::validate_observation(obs, belief.mean.size());

    const CVector<Scalar> cov_v = belief.cov * obs.v;
    const Scalar alpha = std::real(obs.v.dot(cov_v)) + obs.noise_var;
    if (!(alpha > Scalar(0)))
        throw NumericalDegeneracyError("update: non-positive innovation variance");

    const CVector<Scalar> gain = cov_v / alpha;
    const Complex<Scalar> innovation = obs.y - obs.v.dot(belief.mean);

    GaussianBelief<Scalar> next;
    next.mean = belief.mean + gain * innovation;
    next.cov = belief.cov - gain * cov_v.adjoint();
    CMatrix<Scalar> sym = (next.cov + next.cov.adjoint()) * Scalar(0.5);
    next.cov = std::move(sym);
    next.cov.diagonal() = next.cov.diagonal().real().cwiseMax(Scalar(0)).template cast<Complex<Scalar>>();
    next.t = belief.t + 1;
    return next;
}

/// Closed-form posterior from the whole observation set at once,
///   D_T = (D_0^-1 + sum v v^H / sigma^2)^-1,
///   m_T = D_T (D_0^-1 m_0 + sum v y / sigma^2).
/// Order-free by construction; serves as the independent cross-check of the
/// recursive update. A 1e-10 ridge rescues a singular prior.
template <class Scalar>
GaussianBelief<Scalar> batch_posterior(const GaussianBelief<Scalar> &prior,
                                       std::span<const Observation<Scalar>> observations) {
    if (observations.empty())
        return prior;
    const Index n = prior.mean.size();

    auto well_conditioned = [n](const Eigen::LDLT<CMatrix<Scalar>> &f) {
        if (f.info() != Eigen::Success)
            return false;
        const RVector<Scalar> d = f.vectorD().real();
        return d.minCoeff() > d.maxCoeff() * std::numeric_limits<Scalar>::epsilon() * Scalar(n);
    };

    CMatrix<Scalar> prior_cov = prior.cov;
    Eigen::LDLT<CMatrix<Scalar>> prior_ldlt(prior_cov);
    if (!well_conditioned(prior_ldlt)) {
        prior_cov.diagonal().array() += Scalar(1e-10);
        prior_ldlt.compute(prior_cov);
        if (!well_conditioned(prior_ldlt))
            throw NumericalDegeneracyError("batch_posterior: prior covariance is singular");
    }

    CMatrix<Scalar> info = prior_ldlt.solve(CMatrix<Scalar>::Identity(n, n));
    CVector<Scalar> rhs = prior_ldlt.solve(prior.mean);
    for (const auto &obs : observations) {
        detail::validate_observation(obs, n);
        info.noalias() += (obs.v * obs.v.adjoint()) / obs.noise_var;
        rhs.noalias() += obs.v * (obs.y / obs.noise_var);
    }

    Eigen::LDLT<CMatrix<Scalar>> info_ldlt(info);
    if (info_ldlt.info() != Eigen::Success)
        throw NumericalDegeneracyError("batch_posterior: information matrix factorization failed");

    GaussianBelief<Scalar> posterior;
    posterior.cov = info_ldlt.solve(CMatrix<Scalar>::Identity(n, n));
    CMatrix<Scalar> sym = (posterior.cov + posterior.cov.adjoint()) * Scalar(0.5);
    posterior.cov = std::move(sym);
    posterior.mean = info_ldlt.solve(rhs);
    posterior.t = prior.t + static_cast<long>(observations.size());
    return posterior;
}

} // namespace nfbt
