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
#include "nfbt/format.hpp"
#include "nfbt/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace nfbt {

/// Unitary DFT basis over the angular grid phi_k = (2k - N + 1) / N. Column k
/// holds the far-field response a(phi_k); the map g = F h takes a spatial
/// channel into the beamspace domain and h = F^H g back.
template <class Scalar>
struct DftMatrix {
    Index n = 0;
    CMatrix<Scalar> columns;     // N x N, column k = a(phi_k)
    RVector<Scalar> angle_grid;  // phi_k
};

template <class Scalar>
DftMatrix<Scalar> dft_matrix(Index n) {
    if (n < 1)
        throw std::invalid_argument("dft_matrix: size must be positive");
    DftMatrix<Scalar> f;
    f.n = n;
    f.angle_grid = RVector<Scalar>::LinSpaced(n, Scalar(1 - n) / Scalar(n), Scalar(n - 1) / Scalar(n));
    f.columns.resize(n, n);
    const Scalar amp = Scalar(1) / std::sqrt(Scalar(n));
    // Entry (m, k) is exp(-j*pi*(2m-N+1)(2k-N+1)/(2N))/sqrt(N). The integer
    // numerator is reduced modulo 4N so the trig argument stays within one
    // period; this is what keeps ||F F^H - I|| at machine precision for large N.
    const long long period = 4 * static_cast<long long>(n);
    for (Index k = 0; k < n; ++k) {
        const long long ok = 2 * static_cast<long long>(k) - n + 1;
        for (Index m = 0; m < n; ++m) {
            const long long om = 2 * static_cast<long long>(m) - n + 1;
            long long num = (om * ok) % period;
            if (num > period / 2)
                num -= period;
            if (num < -period / 2)
                num += period;
            const Scalar phase = -std::numbers::pi_v<Scalar> * Scalar(num) / Scalar(2 * n);
            f.columns(m, k) = std::polar(amp, phase);
        }
    }
    return f;
}

template <class Scalar>
CVector<Scalar> spatial_to_dft(const DftMatrix<Scalar> &f, const CVector<Scalar> &h) {
    if (h.size() != f.n)
        throw std::invalid_argument("spatial_to_dft: dimension mismatch");
    return f.columns * h;
}

template <class Scalar>
CVector<Scalar> dft_to_spatial(const DftMatrix<Scalar> &f, const CVector<Scalar> &g) {
    if (g.size() != f.n)
        throw std::invalid_argument("dft_to_spatial: dimension mismatch");
    return f.columns.adjoint() * g;
}

template <class Scalar>
struct CodewordInfo {
    Index angle_index = 0;
    Index ring_index = 0;
    Scalar theta = Scalar(0);
    Scalar distance = std::numeric_limits<Scalar>::infinity(); // infinity on the far-field ring
};

/// Polar-domain codebook: the DFT angular grid crossed with S distance rings
/// per angle. Ring 0 is the far-field DFT codeword; rings s >= 1 focus at
/// r(theta, s) = N^2 d^2 (1 - theta^2) / (2 lambda beta^2 s), so distances
/// shrink as s grows. Codewords are ordered angle-major, ring-minor.
template <class Scalar>
struct PolarCodebook {
    CMatrix<Scalar> codewords; // N x (N * S), column (n * S + s)
    std::vector<CodewordInfo<Scalar>> meta;
    Scalar beta = Scalar(0);
    Index n_angles = 0;
    Index n_rings = 0;

    Index size() const { return static_cast<Index>(meta.size()); }
    Index column_of(Index angle_index, Index ring_index) const { return angle_index * n_rings + ring_index; }

    /// Far-field codeword at the angle closest to boresight (lowest index on a
    /// tie); used as the fallback beam when a belief carries no information.
    Index boresight_index() const {
        Index best = 0;
        for (Index n = 1; n < n_angles; ++n)
            if (std::abs(meta[static_cast<std::size_t>(column_of(n, 0))].theta) <
                std::abs(meta[static_cast<std::size_t>(column_of(best, 0))].theta))
                best = n;
        return column_of(best, 0);
    }
};

template <class Scalar>
PolarCodebook<Scalar> polar_codebook(const ArrayGeometry<Scalar> &geometry, Scalar beta, Index n_rings) {
    if (n_rings < 1)
        throw std::invalid_argument("polar_codebook: need at least one ring");
    if (!(beta > Scalar(0)))
        throw std::invalid_argument("polar_codebook: expansion factor must be positive");
    const Index n = geometry.n_antennas;
    const DftMatrix<Scalar> f = dft_matrix<Scalar>(n);

    PolarCodebook<Scalar> cb;
    cb.beta = beta;
    cb.n_angles = n;
    cb.n_rings = n_rings;
    cb.codewords.resize(n, n * n_rings);
    cb.meta.reserve(static_cast<std::size_t>(n * n_rings));

    const Scalar d = geometry.spacing;
    const Scalar ring_scale = Scalar(n) * Scalar(n) * d * d / (Scalar(2) * geometry.wavelength * beta * beta);
    for (Index a = 0; a < n; ++a) {
        const Scalar theta = f.angle_grid(a);
        for (Index s = 0; s < n_rings; ++s) {
            const Index col = a * n_rings + s;
            if (s == 0) {
                cb.codewords.col(col) = f.columns.col(a);
                cb.meta.push_back({a, s, theta, std::numeric_limits<Scalar>::infinity()});
            } else {
                const Scalar r = ring_scale * (Scalar(1) - theta * theta) / Scalar(s);
                cb.codewords.col(col) = steering_vector(geometry, theta, r);
                cb.meta.push_back({a, s, theta, r});
            }
        }
    }
    return cb;
}

/// The far-field sweep codebook is simply the DFT basis.
template <class Scalar>
CMatrix<Scalar> far_field_codebook(const ArrayGeometry<Scalar> &geometry) {
    return dft_matrix<Scalar>(geometry.n_antennas).columns;
}

/// CSV dump: angle_index, ring_index, theta, distance_m (empty on the
/// far-field ring), then re_0..re_{N-1}, im_0..im_{N-1}.
template <class Scalar>
void write_codebook_csv(std::ostream &os, const PolarCodebook<Scalar> &cb) {
    const Index n = cb.codewords.rows();
    os << "angle_index,ring_index,theta,distance_m";
    for (Index i = 0; i < n; ++i)
        os << ",re_" << i;
    for (Index i = 0; i < n; ++i)
        os << ",im_" << i;
    os << '\n';
    for (Index c = 0; c < cb.size(); ++c) {
        const auto &info = cb.meta[static_cast<std::size_t>(c)];
        os << info.angle_index << ',' << info.ring_index << ',' << format_double(double(info.theta)) << ',';
        if (std::isfinite(double(info.distance)))
            os << format_double(double(info.distance));
        for (Index i = 0; i < n; ++i)
            os << ',' << format_double(double(cb.codewords(i, c).real()));
        for (Index i = 0; i < n; ++i)
            os << ',' << format_double(double(cb.codewords(i, c).imag()));
        os << '\n';
    }
}

} // namespace nfbt
