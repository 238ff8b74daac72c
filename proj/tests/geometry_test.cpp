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

#include "nfbt/geometry.hpp"

#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nfbt;

namespace {

// Independent oracle: plain Euclidean distance between element (0, offset*d)
// and the target at (r*sqrt(1-theta^2), r*theta).
double euclidean_element_distance(const ArrayGeometry<double> &geom, Index n, double theta, double r) {
    const double tx = r * std::sqrt(1.0 - theta * theta);
    const double ty = r * theta;
    const double ey = geom.offset(n) * geom.spacing;
    return std::hypot(tx, ty - ey);
}

} // namespace

TEST_CASE("half-wavelength geometry has symmetric unit-step offsets") {
    const auto geom = ArrayGeometry<double>::half_wavelength(8, 0.01);
    CHECK(geom.spacing == doctest::Approx(0.005).epsilon(1e-15));
    CHECK(geom.aperture() == doctest::Approx(7 * 0.005).epsilon(1e-15));
    for (Index n = 0; n < 8; ++n) {
        CHECK(geom.offset(n) == doctest::Approx((2.0 * n - 7.0) / 2.0).epsilon(1e-15));
        CHECK(geom.offset(n) == doctest::Approx(-geom.offset(7 - n)).epsilon(1e-15));
    }
    CHECK_THROWS_AS(ArrayGeometry<double>::half_wavelength(0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(ArrayGeometry<double>::half_wavelength(4, -1.0), std::invalid_argument);
}

TEST_CASE("element_distance matches the closed form and plain geometry") {
    const auto geom = ArrayGeometry<double>::half_wavelength(2, 0.01);

    // boresight, element below the axis
    const double d0 = element_distance(geom, 0, 0.0, 10.0);
    CHECK(d0 == doctest::Approx(std::sqrt(100.0 + 6.25e-6)).epsilon(1e-14));
    CHECK(d0 == doctest::Approx(10.0000003125).epsilon(1e-12));
    CHECK(d0 == doctest::Approx(euclidean_element_distance(geom, 0, 0.0, 10.0)).epsilon(1e-14));

    // endfire target, element toward the target: collapses to |r - offset*d|
    const double d1 = element_distance(geom, 1, 1.0, 10.0);
    CHECK(d1 == doctest::Approx(std::sqrt(100.0 + 6.25e-6 - 0.05)).epsilon(1e-14));
    CHECK(d1 == doctest::Approx(9.9975).epsilon(1e-14));
    CHECK(d1 == doctest::Approx(euclidean_element_distance(geom, 1, 1.0, 10.0)).epsilon(1e-14));
}

TEST_CASE("center element of an odd array sees exactly r") {
    const auto geom = ArrayGeometry<double>::half_wavelength(5, 0.02);
    CHECK(geom.offset(2) == 0.0);
    CHECK(element_distance(geom, 2, 0.37, 42.0) == 42.0);
}

TEST_CASE("element_distance rejects bad inputs") {
    const auto geom = ArrayGeometry<double>::half_wavelength(4, 0.01);
    CHECK_THROWS_AS(element_distance(geom, 0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(element_distance(geom, 0, 0.0, -3.0), std::invalid_argument);
    CHECK_THROWS_AS(element_distance(geom, 0, 1.5, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(element_distance(geom, -1, 0.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(element_distance(geom, 4, 0.0, 2.0), std::invalid_argument);
}

TEST_CASE("element_distance tends to r - offset*d*theta in the far field") {
    const auto geom = ArrayGeometry<double>::half_wavelength(16, 0.01);
    const double aperture = geom.aperture();
    for (double r : {1e3 * aperture, 1e5 * aperture}) {
        for (double theta : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
            for (Index n = 0; n < geom.n_antennas; ++n) {
                const double od = geom.offset(n) * geom.spacing;
                const double far = r - od * theta;
                CHECK(std::abs(element_distance(geom, n, theta, r) - far) <= 2.0 * od * od / (2.0 * r));
            }
        }
    }
}

TEST_CASE("steering vector is unit norm with per-element phases") {
    const auto geom = ArrayGeometry<double>::half_wavelength(4, 0.01);
    SplitMix64 rng(7);
    for (int i = 0; i < 50; ++i) {
        const double theta = rng.uniform(-1.0, 1.0);
        const double r = rng.uniform(0.05, 500.0);
        const auto b = steering_vector(geom, theta, r);
        CHECK(std::abs(b.norm() - 1.0) < 1e-12);
    }

    // element-wise oracle against plain geometry, independent of the
    // closed-form distance path
    const double theta = 0.5, r = 5.0;
    const auto b = steering_vector(geom, theta, r);
    for (Index n = 0; n < 4; ++n) {
        const double delta = euclidean_element_distance(geom, n, theta, r) - r;
        const Complex<double> expected =
            std::polar(0.5, -2.0 * std::numbers::pi * delta / geom.wavelength);
        CHECK(std::abs(b(n) - expected) < 1e-10);
    }
}

TEST_CASE("steering vector flattens to the DFT profile in the far-field limit") {
    const auto geom = ArrayGeometry<double>::half_wavelength(8, 0.01);
    const auto b = steering_vector(geom, 0.0, 1e9 * geom.aperture());
    const double amp = 1.0 / std::sqrt(8.0);
    for (Index n = 0; n < 8; ++n)
        CHECK(std::abs(b(n) - Complex<double>(amp, 0.0)) < 1e-6);
}
