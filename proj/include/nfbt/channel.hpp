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
#include "nfbt/geometry.hpp"
#include "nfbt/rng.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nfbt {

enum class PathKind { LoS, NLoS };

/// Polar target location: angle sine and range from the array center.
template <class Scalar>
struct PolarPoint {
    Scalar theta = Scalar(0); // sin of the departure angle, in [-1, 1]
    Scalar r = Scalar(0);     // meters
};

/// One propagation path of a realization. `gain` carries the full complex
/// amplitude including the propagation phase; for the LoS path its magnitude
/// is exactly lambda / (4 pi r1).
template <class Scalar>
struct PathComponent {
    PathKind kind = PathKind::LoS;
    Scalar theta = Scalar(0);
    Scalar r1 = Scalar(0);          // array center to user (LoS) or to scatterer (NLoS)
    std::optional<Scalar> r2 = {};  // scatterer to user, NLoS only
    Complex<Scalar> gain = Complex<Scalar>(0);
};

/// Quasi-static channel draw, rescaled so that ||h||^2 equals the antenna
/// count. The pre-normalization norm is kept for diagnostics.
template <class Scalar>
struct ChannelRealization {
    CVector<Scalar> h;
    std::vector<PathComponent<Scalar>> paths;
    Scalar norm_scale = Scalar(1);
    Scalar raw_norm_sq = Scalar(0);
};

template <class Scalar>
struct ScenarioConfig {
    Index n_paths = 1;                                       // total paths, LoS included
    std::pair<Scalar, Scalar> distance_range{Scalar(0), Scalar(0)}; // meters
    std::pair<Scalar, Scalar> angle_range{Scalar(0), Scalar(0)};    // physical AoD, radians
    ArrayGeometry<Scalar> geometry;

    void validate() const {
        if (n_paths < 1)
            throw std::invalid_argument("ScenarioConfig: need at least one path");
        if (!(distance_range.first > Scalar(0)) || !(distance_range.first < distance_range.second))
            throw std::invalid_argument("ScenarioConfig: invalid distance range");
        if (!(angle_range.first < angle_range.second))
            throw std::invalid_argument("ScenarioConfig: invalid angle range");
        if (geometry.n_antennas < 1)
            throw std::invalid_argument("ScenarioConfig: empty geometry");
    }
};

namespace detail {

// exp(-j*2*pi*distance/lambda) with the argument reduced modulo one
// wavelength; keeps phase accuracy at ranges of many thousand wavelengths.
template <class Scalar>
Complex<Scalar> propagation_phasor(Scalar distance, Scalar wavelength) {
    const Scalar cycles = static_cast<Scalar>(std::remainder(distance / wavelength, Scalar(1)));
    return std::polar(Scalar(1), Scalar(-2) * std::numbers::pi_v<Scalar> * cycles);
}

} // namespace detail

/// Scatterer-to-user distance by the law of cosines, applied to the
/// angle-sine difference (theta, not the physical angle).
template <class Scalar>
Scalar scatterer_user_distance(Scalar theta_u, Scalar r_u, Scalar theta_l, Scalar r_l1) {
    const Scalar c = std::cos(theta_u - theta_l);
    const Scalar d_sq = r_l1 * r_l1 + r_u * r_u - Scalar(2) * r_u * r_l1 * c;
    return std::sqrt(std::max(d_sq, Scalar(0)));
}

/// Direct-path channel: sqrt(N) * g * exp(-j*2*pi*r/lambda) * b(theta, r)
/// with the free-space amplitude g = lambda / (4 pi r).
template <class Scalar>
CVector<Scalar> los_channel(const ArrayGeometry<Scalar> &geometry, Scalar theta_u, Scalar r_u) {
    detail::check_target(theta_u, r_u);
    const Scalar g = geometry.wavelength / (Scalar(4) * std::numbers::pi_v<Scalar> * r_u);
    const Complex<Scalar> amp = std::sqrt(Scalar(geometry.n_antennas)) * g *
                                detail::propagation_phasor(r_u, geometry.wavelength);
    return amp * steering_vector(geometry, theta_u, r_u);
}

/// Scattered component: one steering vector per scatterer, weighted by the
/// two-hop free-space amplitude and the injected reflection coefficient.
/// Deterministic; randomness stays with the caller.
template <class Scalar>
CVector<Scalar> nlos_channel(const ArrayGeometry<Scalar> &geometry, PolarPoint<Scalar> user,
                             std::span<const PolarPoint<Scalar>> scatterers,
                             std::span<const Complex<Scalar>> reflection_coeffs) {
    if (scatterers.size() != reflection_coeffs.size())
        throw std::invalid_argument("nlos_channel: one reflection coefficient per scatterer required");
    CVector<Scalar> h = CVector<Scalar>::Zero(geometry.n_antennas);
    const Scalar root_n = std::sqrt(Scalar(geometry.n_antennas));
    for (std::size_t l = 0; l < scatterers.size(); ++l) {
        const auto &s = scatterers[l];
        detail::check_target(s.theta, s.r);
        const Scalar r2 = scatterer_user_distance(user.theta, user.r, s.theta, s.r);
        if (!(r2 > Scalar(0)))
            throw std::invalid_argument("nlos_channel: scatterer coincides with the user");
        const Complex<Scalar> g = reflection_coeffs[l] * geometry.wavelength /
                                  (Scalar(4) * std::numbers::pi_v<Scalar> * s.r * r2);
        h += root_n * g * detail::propagation_phasor(s.r + r2, geometry.wavelength) *
             steering_vector(geometry, s.theta, s.r);
    }
    return h;
}

/// Draws one multipath realization: user and scatterers uniform in physical
/// angle and range, reflection coefficients i.i.d. CN(0,1), then the total
/// channel rescaled to ||h||^2 = N.
template <class Scalar>
ChannelRealization<Scalar> sample_scenario(const ScenarioConfig<Scalar> &config, SplitMix64 &rng) {
    config.validate();
    const auto &geom = config.geometry;

    auto draw_point = [&]() {
        const Scalar phi = static_cast<Scalar>(rng.uniform(double(config.angle_range.first), double(config.angle_range.second)));
        const Scalar r = static_cast<Scalar>(rng.uniform(double(config.distance_range.first), double(config.distance_range.second)));
        return PolarPoint<Scalar>{std::sin(phi), r};
    };

    const PolarPoint<Scalar> user = draw_point();

    std::vector<PolarPoint<Scalar>> scatterers;
    std::vector<Complex<Scalar>> coeffs;
    scatterers.reserve(static_cast<std::size_t>(config.n_paths - 1));
    for (Index l = 1; l < config.n_paths; ++l) {
        PolarPoint<Scalar> s = draw_point();
        // Redraw scatterers landing on top of the user; the two-hop amplitude
        // diverges as the second hop vanishes.
        int attempts = 0;
        while (scatterer_user_distance(user.theta, user.r, s.theta, s.r) < Scalar(1e-6)) {
            if (++attempts > 1000)
                throw NumericalDegeneracyError(
                    "sample_scenario: scenario ranges keep scatterers on top of the user");
            s = draw_point();
        }
        scatterers.push_back(s);
        coeffs.push_back(static_cast<Complex<Scalar>>(rng.complex_normal()));
    }

    ChannelRealization<Scalar> out;
    out.h = los_channel(geom, user.theta, user.r);
    if (!scatterers.empty())
        out.h += nlos_channel<Scalar>(geom, user, scatterers, coeffs);

    out.paths.reserve(static_cast<std::size_t>(config.n_paths));
    const Scalar g_u = geom.wavelength / (Scalar(4) * std::numbers::pi_v<Scalar> * user.r);
    out.paths.push_back({PathKind::LoS, user.theta, user.r, std::nullopt,
                         g_u * detail::propagation_phasor(user.r, geom.wavelength)});
    for (std::size_t l = 0; l < scatterers.size(); ++l) {
        const auto &s = scatterers[l];
        const Scalar r2 = scatterer_user_distance(user.theta, user.r, s.theta, s.r);
        const Complex<Scalar> g = coeffs[l] * geom.wavelength /
                                  (Scalar(4) * std::numbers::pi_v<Scalar> * s.r * r2);
        out.paths.push_back({PathKind::NLoS, s.theta, s.r, r2,
                             g * detail::propagation_phasor(s.r + r2, geom.wavelength)});
    }

    out.raw_norm_sq = out.h.squaredNorm();
    if (!(out.raw_norm_sq > Scalar(0)))
        throw NumericalDegeneracyError("sample_scenario: degenerate zero channel");
    out.norm_scale = std::sqrt(Scalar(geom.n_antennas) / out.raw_norm_sq);
    out.h *= out.norm_scale;
    return out;
}

} // namespace nfbt
