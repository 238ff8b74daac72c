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
#include "nfbt/posterior.hpp"
#include "nfbt/rng.hpp"
#include "nfbt/transform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace nfbt {

/// Training policies: codebook-constrained sampling, continuous-space
/// sampling, or the two-stage hybrid that starts on the codebook and refines
/// in continuous space once the first stage settles.
enum class SchemeKind { CodebookTS, ContinuousTS, HybridTS };

enum class TrainingStage { Codebook, Continuous };

/// Declares convergence once the tracked magnitude stays within `epsilon` of
/// its previous value for `required_consecutive` comparisons in a row. The
/// first sample only seeds the reference, so the earliest possible firing is
/// at observation required_consecutive + 1. An optional magnitude floor
/// additionally requires both compared samples to clear it: a plateau at the
/// noise floor is indistinguishable from no signal at all and must not count.
template <class Scalar>
class ConvergenceDetector {
  public:
    ConvergenceDetector(Scalar epsilon, long required_consecutive, Scalar magnitude_floor = Scalar(0))
        : epsilon_(epsilon), required_(required_consecutive), magnitude_floor_(magnitude_floor) {
        if (!(epsilon >= Scalar(0)))
            throw std::invalid_argument("ConvergenceDetector: tolerance must be non-negative");
        if (required_consecutive < 1)
            throw std::invalid_argument("ConvergenceDetector: need at least one comparison");
        if (!(magnitude_floor >= Scalar(0)))
            throw std::invalid_argument("ConvergenceDetector: magnitude floor must be non-negative");
    }

    bool observe(Scalar magnitude) {
        if (has_last_) {
            const bool quiet = std::abs(magnitude - last_magnitude_) <= epsilon_ &&
                               std::min(magnitude, last_magnitude_) >= magnitude_floor_;
            counter_ = quiet ? std::min(counter_ + 1, required_) : 0;
        }
        last_magnitude_ = magnitude;
        has_last_ = true;
        return counter_ >= required_;
    }

    void reset() {
        counter_ = 0;
        has_last_ = false;
    }

    Scalar epsilon() const { return epsilon_; }
    long counter() const { return counter_; }

  private:
    Scalar epsilon_;
    long required_;
    Scalar magnitude_floor_;
    long counter_ = 0;
    Scalar last_magnitude_ = Scalar(0);
    bool has_last_ = false;
};

template <class Scalar>
bool check_convergence(ConvergenceDetector<Scalar> &detector, Scalar y_magnitude) {
    return detector.observe(y_magnitude);
}

template <class Scalar>
struct BeamChoice {
    CVector<Scalar> w;
    Index index = -1;
};

/// Best codeword for a sampled beamspace channel: maps the sample to the
/// spatial domain and scans |h~^H w| over every codeword. Exact ties go to
/// the lowest codeword index so traces replay deterministically.
template <class Scalar>
BeamChoice<Scalar> select_codebook_beam(const CVector<Scalar> &g_sample, const DftMatrix<Scalar> &f,
                                        const PolarCodebook<Scalar> &codebook) {
    if (codebook.size() == 0)
        throw std::invalid_argument("select_codebook_beam: empty codebook");
    const CVector<Scalar> h_sample = dft_to_spatial(f, g_sample);
    const RVector<Scalar> scores = (codebook.codewords.adjoint() * h_sample).cwiseAbs();
    Index best = 0;
    for (Index i = 1; i < scores.size(); ++i)
        if (scores(i) > scores(best))
            best = i;
    return {codebook.codewords.col(best), best};
}

/// Matched filter to the sampled channel over the continuous unit sphere.
template <class Scalar>
CVector<Scalar> select_continuous_beam(const CVector<Scalar> &g_sample, const DftMatrix<Scalar> &f) {
    CVector<Scalar> w = dft_to_spatial(f, g_sample);
    const Scalar norm = w.norm();
    if (!(norm > Scalar(0)))
        throw NumericalDegeneracyError("select_continuous_beam: zero channel sample");
    return w / norm;
}

/// Data beamformer from the belief mean, w = F^H m / ||F^H m||.
template <class Scalar>
CVector<Scalar> data_beam(const GaussianBelief<Scalar> &belief, const DftMatrix<Scalar> &f) {
    CVector<Scalar> w = dft_to_spatial(f, belief.mean);
    const Scalar norm = w.norm();
    if (!(norm > Scalar(0)))
        throw NumericalDegeneracyError("data_beam: belief mean is zero");
    return w / norm;
}

template <class Scalar>
struct SlotRecord {
    long slot = 0;                                  // 1-based
    Scalar y_magnitude = Scalar(0);                 // received pilot magnitude
    TrainingStage stage = TrainingStage::Codebook;
    Index codeword_index = -1;                      // -1 on continuous slots
};

template <class Scalar>
struct TrainingOutcome {
    CVector<Scalar> w_data;
    long pilots_used = 0;
    bool converged = false;
    long stage1_pilots = 0; // hybrid scheme only, otherwise 0
    std::vector<SlotRecord<Scalar>> trace;
};

template <class Scalar>
struct TrainingOptions {
    long budget = 1280;            // maximum pilot slots
    Scalar epsilon = Scalar(1e-7); // convergence tolerance
    long required_consecutive = 10;
    bool unconstrained_budget = false;
    // Successive received magnitudes carry fresh noise of scale sigma, so a
    // plateau is only resolvable down to that floor: the per-slot stop
    // tolerance is max(epsilon, noise_floor_scale * sigma), and a comparison
    // counts only when both magnitudes clear noise_floor_scale * sigma
    // (otherwise the "plateau" is just the noise floor itself). With
    // noiseless pilots the configured epsilon applies unchanged; zero
    // disables both adjustments.
    Scalar noise_floor_scale = Scalar(3);
    // Backstop for unconstrained runs so a detector that cannot fire ends the
    // trial (flagged unconverged) instead of spinning forever.
    long safety_cap = 1000000;
};

/// One full training episode. Per slot: draw a channel sample from the
/// belief, pick the beam for the active stage, measure y = h^H w + n, absorb
/// the conjugated measurement into the belief, and feed |y| to the stop rule.
/// The hybrid scheme switches from the codebook stage to continuous
/// refinement when the detector first fires, resets the detector, and keeps
/// the learned belief. The data beam always comes from the final belief mean;
/// a belief that never left zero falls back to the boresight far-field
/// codeword.
template <class Scalar>
TrainingOutcome<Scalar> run_training(SchemeKind scheme, const ChannelRealization<Scalar> &channel,
                                     const DftMatrix<Scalar> &f, const PolarCodebook<Scalar> &codebook,
                                     const GaussianBelief<Scalar> &prior, Scalar noise_var,
                                     const TrainingOptions<Scalar> &options, SplitMix64 &rng) {
    if (!(noise_var > Scalar(0)))
        throw std::invalid_argument("run_training: noise variance must be positive");
    const bool needs_codebook = scheme != SchemeKind::ContinuousTS;
    if (needs_codebook && codebook.size() == 0)
        throw std::invalid_argument("run_training: scheme requires a codebook");

    const Scalar sigma = std::sqrt(noise_var);
    const Scalar noise_band = options.noise_floor_scale * sigma;
    ConvergenceDetector<Scalar> detector(std::max(options.epsilon, noise_band),
                                         options.required_consecutive, noise_band);

    GaussianBelief<Scalar> belief = prior;
    TrainingStage stage = scheme == SchemeKind::ContinuousTS ? TrainingStage::Continuous : TrainingStage::Codebook;

    TrainingOutcome<Scalar> out;
    long stage1 = 0;

    for (long slot = 1; options.unconstrained_budget ? slot <= options.safety_cap : slot <= options.budget; ++slot) {
        CVector<Scalar> g_sample = sample_belief(belief, rng);
        Index codeword = -1;
        CVector<Scalar> w;
        if (stage == TrainingStage::Codebook) {
            BeamChoice<Scalar> choice = select_codebook_beam(g_sample, f, codebook);
            w = std::move(choice.w);
            codeword = choice.index;
        } else {
            int attempts = 0;
            while (!(g_sample.norm() > Scalar(0))) {
                if (++attempts > 8)
                    throw NumericalDegeneracyError("run_training: belief keeps producing zero samples");
                g_sample = sample_belief(belief, rng);
            }
            w = select_continuous_beam(g_sample, f);
        }
        if (std::abs(w.norm() - Scalar(1)) > detail::unit_norm_slack<Scalar>())
            throw NumericalDegeneracyError("run_training: probe beam lost unit norm");

        const Complex<Scalar> y = channel.h.dot(w) + sigma * static_cast<Complex<Scalar>>(rng.complex_normal());
        belief = update(belief, Observation<Scalar>{spatial_to_dft(f, w), std::conj(y), noise_var});

        const Scalar magnitude = std::abs(y);
        const bool fired = detector.observe(magnitude);
        out.trace.push_back({slot, magnitude, stage, codeword});
        out.pilots_used = slot;

        if (fired) {
            if (scheme == SchemeKind::HybridTS && stage == TrainingStage::Codebook) {
                stage1 = slot;
                stage = TrainingStage::Continuous;
                detector.reset();
            } else {
                out.converged = true;
                break;
            }
        }
    }

    if (scheme == SchemeKind::HybridTS)
        out.stage1_pilots = stage1 > 0 ? stage1 : out.pilots_used;

    if (belief.mean.norm() > Scalar(0)) {
        out.w_data = data_beam(belief, f);
    } else if (codebook.size() > 0) {
        out.w_data = codebook.codewords.col(codebook.boresight_index());
    } else {
        // No codebook and nothing learned: boresight far-field beam.
        Index best = 0;
        for (Index i = 1; i < f.n; ++i)
            if (std::abs(f.angle_grid(i)) < std::abs(f.angle_grid(best)))
                best = i;
        out.w_data = f.columns.col(best);
    }
    return out;
}

} // namespace nfbt
