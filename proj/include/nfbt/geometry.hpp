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

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nfbt {

/// Uniform linear array along the y-axis, centered at the origin. Element n
/// sits at (0, offset(n) * spacing) with offset(n) = (2n - N + 1) / 2, so the
/// offsets are symmetric about zero and step by one.
template <class Scalar>
struct ArrayGeometry {
    Index n_antennas = 0;
    Scalar wavelength = Scalar(0);
    Scalar spacing = Scalar(0);
    RVector<Scalar> element_offsets; // dimensionless, multiply by spacing for meters

    /// Standard half-wavelength construction.
    static ArrayGeometry half_wavelength(Index n, Scalar wavelength) {
        if (n < 1)
            throw std::invalid_argument("ArrayGeometry: antenna count must be positive");
        if (!(wavelength > Scalar(0)))
            throw std::invalid_argument("ArrayGeometry: wavelength must be positive");
        ArrayGeometry g;
        g.n_antennas = n;
        g.wavelength = wavelength;
        g.spacing = wavelength / Scalar(2);
        g.element_offsets = RVector<Scalar>::LinSpaced(n, Scalar(1 - n) / Scalar(2), Scalar(n - 1) / Scalar(2));
        return g;
    }

    Scalar offset(Index n) const { return element_offsets(n); }

    /// Physical aperture (N - 1) * d.
    Scalar aperture() const { return Scalar(n_antennas - 1) * spacing; }
};

namespace detail {

template <class Scalar>
void check_target(Scalar theta, Scalar r) {
    if (!(r > Scalar(0)))
        throw std::invalid_argument("target distance must be positive");
    if (!(std::abs(theta) <= Scalar(1)))
        throw std::invalid_argument("angle sine must lie in [-1, 1]");
}

// r^(n) - r without cancellation; needed when r dwarfs the aperture.
template <class Scalar>
Scalar element_distance_delta(const ArrayGeometry<Scalar> &geometry, Index n, Scalar theta, Scalar r) {
    const Scalar od = geometry.offset(n) * geometry.spacing;
    const Scalar q = od * od - Scalar(2) * r * od * theta;
    const Scalar rn = std::sqrt(r * r + q);
    return q / (rn + r);
}

} // namespace detail

/// Exact distance from element n to a target at angle-sine theta and range r,
/// with no far-field approximation. The target sits at Cartesian
/// (r*sqrt(1-theta^2), r*theta).
template <class Scalar>
Scalar element_distance(const ArrayGeometry<Scalar> &geometry, Index n, Scalar theta, Scalar r) {
    if (n < 0 || n >= geometry.n_antennas)
        throw std::invalid_argument("element_distance: antenna index out of range");
    detail::check_target(theta, r);
    return r + detail::element_distance_delta(geometry, n, theta, r);
}

/// Near-field steering vector: entry n is exp(-j*2*pi*(r^(n) - r)/lambda)/sqrt(N).
/// Unit modulus entries make the 2-norm exactly one.
template <class Scalar>
CVector<Scalar> steering_vector(const ArrayGeometry<Scalar> &geometry, Scalar theta, Scalar r) {
    detail::check_target(theta, r);
    const Index n = geometry.n_antennas;
    const Scalar amp = Scalar(1) / std::sqrt(Scalar(n));
    CVector<Scalar> b(n);
    for (Index i = 0; i < n; ++i) {
        // Reduce the path-length excess modulo one wavelength before forming
        // the phase so large apertures keep full trig accuracy.
        const Scalar cycles = detail::element_distance_delta(geometry, i, theta, r) / geometry.wavelength;
        const Scalar phase = Scalar(-2) * std::numbers::pi_v<Scalar> * static_cast<Scalar>(std::remainder(cycles, Scalar(1)));
        b(i) = std::polar(amp, phase);
    }
    return b;
}

} // namespace nfbt
