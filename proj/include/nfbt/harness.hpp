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

#include "nfbt/baselines.hpp"
#include "nfbt/channel.hpp"
#include "nfbt/policies.hpp"
#include "nfbt/posterior.hpp"
#include "nfbt/transform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace nfbt {

inline constexpr const char *kVersion = "0.1.0";

/// Everything the Monte-Carlo engine can run per trial: the three training
/// policies plus the reference algorithms they are measured against.
enum class Scheme { FullCSI, ExhaustiveNF, MultiBeam, CodebookTS, ContinuousTS, HybridTS };

std::string scheme_label(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

/// Sweep parameters. Defaults reproduce the reference large-array setup:
/// 256 antennas at 30 GHz, four paths in [7, 100] m x [-pi/3, pi/3], a
/// 5-ring polar codebook with beta = 1.1, tolerance 1e-7 over 10 slots, a
/// 1280-pilot budget, kernel length 1/128, and 500 trials per SNR point.
struct ExperimentConfig {
    Index n_antennas = 256;
    double carrier_freq = 3e10; // Hz
    Index n_paths = 4;
    double distance_min = 7.0;   // meters
    double distance_max = 100.0; // meters
    double angle_min = -1.0471975511965976; // radians (-pi/3)
    double angle_max = 1.0471975511965976;  // radians (pi/3)
    double beta = 1.1;
    Index n_rings = 5;
    double epsilon = 1e-7;
    long consecutive = 10;
    long budget = 1280;
    double length_scale = 0.0078125; // 1/128
    long n_trials = 500;
    std::vector<double> snr_grid_db = default_snr_grid();
    std::vector<Scheme> schemes = default_schemes();
    std::uint64_t master_seed = 1;
    bool unconstrained = false;         // lift the pilot budget for ContinuousTS
    double detector_noise_floor = 3.0;  // see TrainingOptions::noise_floor_scale
    int workers = 0;                    // 0 = hardware concurrency

    static std::vector<double> default_snr_grid(); // 5..20 dB, 1 dB steps
    static std::vector<Scheme> default_schemes();  // every scheme and baseline

    double wavelength() const { return 299792458.0 / carrier_freq; }
    void validate() const;
};

/// sigma^2 = 10^(-snr_db / 10). Together with the ||h||^2 = N channel
/// normalization this makes the SNR axis the average per-antenna receive SNR,
/// so the full-CSI rate is log2(1 + N * 10^(snr_db/10)).
double noise_var_from_snr(double snr_db);

/// Immutable per-sweep precomputations shared by every trial.
struct SweepContext {
    ArrayGeometry<double> geometry;
    DftMatrix<double> dft;
    PolarCodebook<double> codebook;
    GaussianBelief<double> prior;
};

SweepContext make_context(const ExperimentConfig &config);

struct TrialRecord {
    double snr_db = 0;
    Scheme scheme = Scheme::FullCSI;
    long trial = 0;
    double rate = 0;       // bits/s/Hz
    long pilots = 0;
    bool converged = false;
    std::uint64_t channel_hash = 0;
    bool failed = false;   // numerical-degeneracy abort, recorded rather than dropped
};

struct SummaryRow {
    double snr_db = 0;
    Scheme scheme = Scheme::FullCSI;
    double mean_rate = 0;
    double rate_stderr = 0;
    double mean_overhead = 0;
    double overhead_stderr = 0;
    double convergence_fraction = 0;
};

/// One Monte-Carlo trial. The channel stream depends only on (seed, SNR
/// index, trial), so every scheme inside a trial sees the same realization;
/// the measurement-noise stream additionally hashes the scheme, so schemes
/// probe with independent noise.
TrialRecord run_trial(const ExperimentConfig &config, const SweepContext &context, Scheme scheme,
                      double snr_db, std::size_t snr_index, long trial_index);

/// run_trial plus the per-slot trace and the channel draw, for debugging.
struct TrialDebug {
    TrialRecord record;
    std::vector<SlotRecord<double>> trace;
    ChannelRealization<double> channel;
};

TrialDebug run_trial_debug(const ExperimentConfig &config, const SweepContext &context, Scheme scheme,
                           double snr_db, std::size_t snr_index, long trial_index);

struct SweepResult {
    std::vector<SummaryRow> summary; // (snr, scheme) in configured order
    std::vector<TrialRecord> raw;    // (snr, scheme, trial) in configured order
    long failed_trials = 0;
};

/// Runs the full grid. Trials execute on a worker pool; results are assembled
/// in (snr, scheme, trial) order, so the output is byte-identical for any
/// worker count.
SweepResult run_sweep(const ExperimentConfig &config);

std::uint64_t channel_hash(const CVector<double> &h);

void write_summary_csv(std::ostream &os, const std::vector<SummaryRow> &rows);
void write_raw_csv(std::ostream &os, const std::vector<TrialRecord> &rows);
std::string meta_json(const ExperimentConfig &config, const SweepResult &result);

/// Writes summary.csv, raw.csv and meta.json into `dir` (created if absent).
void write_sweep_outputs(const std::filesystem::path &dir, const ExperimentConfig &config,
                         const SweepResult &result);

/// Flat key = value config file mirroring the ExperimentConfig field names;
/// '#' starts a comment. Unknown keys raise std::invalid_argument.
ExperimentConfig load_config_file(const std::filesystem::path &path);
void apply_config_entry(ExperimentConfig &config, std::string_view key, std::string_view value);

std::vector<double> parse_double_list(std::string_view text);
std::vector<Scheme> parse_scheme_list(std::string_view text);

} // namespace nfbt
