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

#include "nfbt/channel.hpp"
#include "nfbt/common.hpp"
#include "nfbt/rng.hpp"
#include "nfbt/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace nfbt {

enum class BaselineKind { ExhaustiveNF, MultiBeam, FullCSI };

template <class Scalar>
struct BaselineOutcome {
    CVector<Scalar> w_data;
    long pilots_used = 0;
    BaselineKind label = BaselineKind::FullCSI;
};

/// Spectral efficiency of serving the channel with beam w,
/// log2(1 + |w^H h|^2 / sigma^2) in bits/s/Hz.
template <class Scalar>
Scalar achievable_rate(const CVector<Scalar> &h, const CVector<Scalar> &w, Scalar noise_var) {
    if (!(noise_var > Scalar(0)))
        throw std::invalid_argument("achievable_rate: noise variance must be positive");
    if (h.size() != w.size())
        throw std::invalid_argument("achievable_rate: dimension mismatch");
    const Scalar gain = std::norm(w.dot(h));
    return std::log2(Scalar(1) + gain / noise_var);
}

/// Matched filter with perfect channel knowledge; the rate every training
/// scheme is bounded by.
template <class Scalar>
BaselineOutcome<Scalar> full_csi_bound(const ChannelRealization<Scalar> &channel, Scalar /*noise_var*/) {
    const Scalar norm = channel.h.norm();
    if (!(norm > Scalar(0)))
        throw std::invalid_argument("full_csi_bound: zero channel");
    return {channel.h / norm, 0, BaselineKind::FullCSI};
}

/// Sweeps every codeword once with fresh measurement noise and keeps the one
/// with the largest received magnitude; exact ties go to the lowest index.
template <class Scalar>
BaselineOutcome<Scalar> exhaustive_nf_search(const ChannelRealization<Scalar> &channel,
                                             const PolarCodebook<Scalar> &codebook, Scalar noise_var,
                                             SplitMix64 &rng) {
    if (codebook.size() == 0)
        throw std::invalid_argument("exhaustive_nf_search: empty codebook");
    if (!(noise_var > Scalar(0)))
        throw std::invalid_argument("exhaustive_nf_search: noise variance must be positive");
    const Scalar sigma = std::sqrt(noise_var);
    Index best = 0;
    Scalar best_mag = Scalar(-1);
    for (Index c = 0; c < codebook.size(); ++c) {
        const Complex<Scalar> y =
            channel.h.dot(codebook.codewords.col(c)) + sigma * static_cast<Complex<Scalar>>(rng.complex_normal());
        const Scalar mag = std::abs(y);
        if (mag > best_mag) {
            best_mag = mag;
            best = c;
        }
    }
    return {codebook.codewords.col(best), codebook.size(), BaselineKind::ExhaustiveNF};
}

/// Full DFT sweep followed by a linear recombination of all measured beams.
/// Probing with the conjugated DFT columns makes the noiseless measurement of
/// bin n exactly conj(g_n), so conjugating the receive samples reconstructs
/// the beamspace channel and w = F^H g_hat / ||.|| recovers the matched
/// filter up to measurement noise.
template <class Scalar>
BaselineOutcome<Scalar> multi_beam_combination(const ChannelRealization<Scalar> &channel,
                                               const DftMatrix<Scalar> &f, Scalar noise_var, SplitMix64 &rng) {
    if (channel.h.size() != f.n)
        throw std::invalid_argument("multi_beam_combination: dimension mismatch");
    if (!(noise_var > Scalar(0)))
        throw std::invalid_argument("multi_beam_combination: noise variance must be positive");
    const Scalar sigma = std::sqrt(noise_var);
    CVector<Scalar> g_hat(f.n);
    for (Index n = 0; n < f.n; ++n) {
        const CVector<Scalar> probe = f.columns.col(n).conjugate();
        const Complex<Scalar> y = channel.h.dot(probe) + sigma * static_cast<Complex<Scalar>>(rng.complex_normal());
        g_hat(n) = std::conj(y);
    }
    CVector<Scalar> w = f.columns.adjoint() * g_hat;
    const Scalar norm = w.norm();
    if (!(norm > Scalar(0)))
        throw NumericalDegeneracyError("multi_beam_combination: degenerate reconstruction");
    return {w / norm, f.n, BaselineKind::MultiBeam};
}

} // namespace nfbt
