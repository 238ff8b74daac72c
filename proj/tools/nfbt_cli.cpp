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

#include "nfbt/format.hpp"
#include "nfbt/harness.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    long trials = 0;
    std::string snr_list;
    std::string scheme_list;
    long antennas = 0;
    long paths = 0;
    long budget = -1;
    bool unconstrained = false;
    int workers = -1;
};

void add_common_flags(CLI::App *cmd, CommonFlags &flags) {
    cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--trials", flags.trials, "Monte-Carlo trials per grid point");
    cmd->add_option("--snr", flags.snr_list, "comma-separated SNR grid in dB");
    cmd->add_option("--schemes", flags.scheme_list, "comma-separated scheme list");
    cmd->add_option("--antennas", flags.antennas, "array size N");
    cmd->add_option("--paths", flags.paths, "number of propagation paths L");
    cmd->add_option("--budget", flags.budget, "pilot budget T");
    cmd->add_flag("--unconstrained", flags.unconstrained, "lift the pilot budget for ContinuousTS");
    cmd->add_option("--workers", flags.workers, "worker threads (0 = hardware concurrency)");
}

nfbt::ExperimentConfig resolve_config(const CLI::App *cmd, const CommonFlags &flags) {
    nfbt::ExperimentConfig config;
    if (cmd->count("--config"))
        config = nfbt::load_config_file(flags.config_path);
    if (cmd->count("--seed"))
        config.master_seed = flags.seed;
    if (cmd->count("--trials"))
        config.n_trials = flags.trials;
    if (cmd->count("--snr"))
        config.snr_grid_db = nfbt::parse_double_list(flags.snr_list);
    if (cmd->count("--schemes"))
        config.schemes = nfbt::parse_scheme_list(flags.scheme_list);
    if (cmd->count("--antennas"))
        config.n_antennas = flags.antennas;
    if (cmd->count("--paths"))
        config.n_paths = flags.paths;
    if (cmd->count("--budget"))
        config.budget = flags.budget;
    if (cmd->count("--unconstrained"))
        config.unconstrained = flags.unconstrained;
    if (cmd->count("--workers"))
        config.workers = flags.workers;
    config.validate();
    return config;
}

const char *stage_name(nfbt::TrainingStage stage) {
    return stage == nfbt::TrainingStage::Codebook ? "codebook" : "continuous";
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Thompson-sampling beam training over near-field multipath channels"};
    app.require_subcommand(1);

    CommonFlags sweep_flags;
    std::string out_dir = "out";
    auto *sweep = app.add_subcommand("sweep", "run the Monte-Carlo SNR sweep and write CSV/JSON results");
    add_common_flags(sweep, sweep_flags);
    sweep->add_option("--out", out_dir, "output directory")->capture_default_str();

    CommonFlags trial_flags;
    double trial_snr = 15.0;
    long trial_index = 0;
    std::string trial_scheme = "HybridTS";
    auto *trial = app.add_subcommand("trial", "run one trial and dump the per-slot trace");
    add_common_flags(trial, trial_flags);
    trial->add_option("--scheme", trial_scheme, "scheme to run")->capture_default_str();
    trial->add_option("--snr-db", trial_snr, "SNR point in dB")->capture_default_str();
    trial->add_option("--trial-index", trial_index, "trial index within the stream")->capture_default_str();

    long cb_antennas = 256;
    double cb_beta = 1.1;
    long cb_rings = 5;
    double cb_freq = 3e10;
    std::string cb_out;
    auto *codebook = app.add_subcommand("codebook", "dump the polar codebook as CSV");
    codebook->add_option("--antennas", cb_antennas, "array size N")->capture_default_str();
    codebook->add_option("--beta", cb_beta, "ring expansion factor")->capture_default_str();
    codebook->add_option("--rings", cb_rings, "distance rings per angle")->capture_default_str();
    codebook->add_option("--carrier-freq", cb_freq, "carrier frequency in Hz")->capture_default_str();
    codebook->add_option("--out", cb_out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sweep->parsed()) {
            const nfbt::ExperimentConfig config = resolve_config(sweep, sweep_flags);
            const nfbt::SweepResult result = nfbt::run_sweep(config);
            nfbt::write_sweep_outputs(out_dir, config, result);
            std::cout << "wrote " << result.summary.size() << " summary rows and " << result.raw.size()
                      << " trials to " << out_dir << '\n';
            if (result.failed_trials > 0)
                std::cout << "warning: " << result.failed_trials << " trials failed (see raw.csv)\n";
            return kExitOk;
        }

        if (trial->parsed()) {
            const nfbt::ExperimentConfig config = resolve_config(trial, trial_flags);
            const auto scheme = nfbt::parse_scheme(trial_scheme);
            if (!scheme)
                throw std::invalid_argument("unknown scheme '" + trial_scheme + "'");
            const nfbt::SweepContext context = nfbt::make_context(config);
            const nfbt::TrialDebug debug =
                nfbt::run_trial_debug(config, context, *scheme, trial_snr, 0, trial_index);

            std::cout << "scheme=" << nfbt::scheme_label(debug.record.scheme)
                      << " snr_db=" << nfbt::format_double(debug.record.snr_db)
                      << " rate=" << nfbt::format_double(debug.record.rate)
                      << " pilots=" << debug.record.pilots
                      << " converged=" << (debug.record.converged ? 1 : 0) << '\n';
            std::cout << "slot,y_magnitude,stage,codeword_index\n";
            for (const auto &slot : debug.trace)
                std::cout << slot.slot << ',' << nfbt::format_double(slot.y_magnitude) << ','
                          << stage_name(slot.stage) << ',' << slot.codeword_index << '\n';
            return kExitOk;
        }

        if (codebook->parsed()) {
            const auto geometry =
                nfbt::ArrayGeometry<double>::half_wavelength(cb_antennas, 299792458.0 / cb_freq);
            const auto cb = nfbt::polar_codebook(geometry, cb_beta, cb_rings);
            if (cb_out.empty()) {
                nfbt::write_codebook_csv(std::cout, cb);
            } else {
                std::ofstream os(cb_out, std::ios::binary);
                if (!os)
                    throw std::runtime_error("cannot open " + cb_out);
                nfbt::write_codebook_csv(os, cb);
            }
            return kExitOk;
        }
    } catch (const nfbt::NumericalDegeneracyError &e) {
        std::cerr << "numerical degeneracy: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
