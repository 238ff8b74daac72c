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

#include "nfbt/transform.hpp"

#include "nfbt/channel.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace nfbt;

TEST_CASE("trivial one-element DFT") {
    const auto f = dft_matrix<double>(1);
    CHECK(f.angle_grid(0) == 0.0);
    CHECK(std::abs(f.columns(0, 0) - Complex<double>(1.0, 0.0)) < 1e-15);
}

TEST_CASE("two-element DFT matches the hand evaluation") {
    const auto f = dft_matrix<double>(2);
    CHECK(f.angle_grid(0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(f.angle_grid(1) == doctest::Approx(0.5).epsilon(1e-15));
    const double amp = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f.columns(0, 0) - std::polar(amp, -std::numbers::pi / 4.0)) < 1e-15);
    CHECK(std::abs(f.columns(1, 0) - std::polar(amp, std::numbers::pi / 4.0)) < 1e-15);
}

TEST_CASE("DFT basis is unitary at machine precision") {
    for (Index n : {Index(1), Index(2), Index(16), Index(256)}) {
        const auto f = dft_matrix<double>(n);
        const CMatrix<double> gram = f.columns * f.columns.adjoint();
        CHECK((gram - CMatrix<double>::Identity(n, n)).norm() < 1e-12);
        for (Index k = 0; k < n; ++k)
            CHECK(std::abs(f.columns.col(k).norm() - 1.0) < 1e-14);
    }
}

TEST_CASE("beamspace maps round-trip and preserve norms") {
    const auto f = dft_matrix<double>(16);
    SplitMix64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const auto h = test::random_complex_vector(16, rng);
        const auto g = spatial_to_dft(f, h);
        CHECK(std::abs(g.norm() - h.norm()) < 1e-12);
        CHECK((dft_to_spatial(f, g) - h).norm() < 1e-12);
    }

    // columns of F^H map to standard basis vectors
    const CVector<double> h = f.columns.adjoint().col(3);
    const auto g = spatial_to_dft(f, h);
    CVector<double> e3 = CVector<double>::Zero(16);
    e3(3) = 1.0;
    CHECK((g - e3).norm() < 1e-12);

    CVector<double> wrong(4);
    wrong.setZero();
    CHECK_THROWS_AS(spatial_to_dft(f, wrong), std::invalid_argument);
    CHECK_THROWS_AS(dft_to_spatial(f, wrong), std::invalid_argument);
}

TEST_CASE("far-field steering at a grid angle concentrates on one bin") {
    const auto geom = ArrayGeometry<double>::half_wavelength(16, 0.01);
    const auto f = dft_matrix<double>(16);
    const Index bin = 11;
    const auto b = steering_vector(geom, f.angle_grid(bin), 1e6 * geom.aperture());
    const auto g = spatial_to_dft(f, b);
    CHECK(std::norm(g(bin)) / g.squaredNorm() > 0.99);
}

TEST_CASE("polar codebook layout, counts and ring distances") {
    const auto geom = ArrayGeometry<double>::half_wavelength(256, 0.01);
    const auto cb = polar_codebook(geom, 1.1, Index(5));
    CHECK(cb.size() == 1280);
    CHECK(cb.n_angles == 256);
    CHECK(cb.n_rings == 5);

    const auto f = dft_matrix<double>(256);
    for (Index a : {Index(0), Index(100), Index(255)}) {
        // far-field ring equals the DFT column bit for bit
        CHECK((cb.codewords.col(cb.column_of(a, 0)) - f.columns.col(a)).norm() == 0.0);
        const auto &info0 = cb.meta[static_cast<std::size_t>(cb.column_of(a, 0))];
        CHECK(std::isinf(info0.distance));
        // rings shrink strictly with s and follow the focus formula
        double prev = std::numeric_limits<double>::infinity();
        for (Index s = 1; s < 5; ++s) {
            const auto &info = cb.meta[static_cast<std::size_t>(cb.column_of(a, s))];
            CHECK(info.angle_index == a);
            CHECK(info.ring_index == s);
            const double expected = 256.0 * 256.0 * 0.005 * 0.005 * (1.0 - info.theta * info.theta) /
                                    (2.0 * 0.01 * 1.1 * 1.1 * double(s));
            CHECK(info.distance == doctest::Approx(expected).epsilon(1e-12));
            CHECK(info.distance < prev);
            prev = info.distance;
        }
    }

    // boresight ring distances straddle the working range
    const double boresight_ring1 = 256.0 * 256.0 * 0.005 * 0.005 / (2.0 * 0.01 * 1.21);
    CHECK(boresight_ring1 == doctest::Approx(67.70247933884298).epsilon(1e-12));
    const Index mid = 128; // theta = 1/256, nearly boresight
    CHECK(cb.meta[static_cast<std::size_t>(cb.column_of(mid, 1))].distance > 50.0);
    CHECK(cb.meta[static_cast<std::size_t>(cb.column_of(mid, 4))].distance < 25.0);

    for (Index c = 0; c < cb.size(); c += 97)
        CHECK(std::abs(cb.codewords.col(c).norm() - 1.0) < 1e-12);

    CHECK(cb.boresight_index() == cb.column_of(127, 0));
}

TEST_CASE("far-field codebook is the DFT basis") {
    const auto geom = ArrayGeometry<double>::half_wavelength(16, 0.01);
    const auto cols = far_field_codebook(geom);
    const auto f = dft_matrix<double>(16);
    CHECK((cols - f.columns).norm() == 0.0);
}

TEST_CASE("codebook CSV dump round-trips a sample entry") {
    const auto geom = ArrayGeometry<double>::half_wavelength(4, 0.01);
    const auto cb = polar_codebook(geom, 1.1, Index(2));
    std::ostringstream os;
    write_codebook_csv(os, cb);

    std::istringstream is(os.str());
    std::string header, line;
    std::getline(is, header);
    CHECK(header.rfind("angle_index,ring_index,theta,distance_m,re_0", 0) == 0);

    long rows = 0;
    while (std::getline(is, line))
        ++rows;
    CHECK(rows == cb.size());

    // first row is the far-field ring of angle 0: empty distance column
    std::istringstream body(os.str());
    std::getline(body, header);
    std::getline(body, line);
    std::stringstream fields(line);
    std::string a, s, theta, dist, re0;
    std::getline(fields, a, ',');
    std::getline(fields, s, ',');
    std::getline(fields, theta, ',');
    std::getline(fields, dist, ',');
    std::getline(fields, re0, ',');
    CHECK(a == "0");
    CHECK(s == "0");
    CHECK(dist.empty());
    CHECK(std::stod(theta) == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(std::stod(re0) == doctest::Approx(cb.codewords(0, 0).real()).epsilon(1e-15));
}
