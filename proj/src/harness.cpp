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

#include "nfbt/harness.hpp"

#include "nfbt/format.hpp"
#include "nfbt/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace nfbt {

namespace {

// Substream tags for per-trial seed derivation.
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kNoiseStream = 2;

std::string trim(std::string_view text) {
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1])))
        --e;
    return std::string(text.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string item = trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (!item.empty())
            out.push_back(item);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string &text, const char *what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size())
            throw std::invalid_argument(text);
        return v;
    } catch (const std::exception &) {
        throw std::invalid_argument(std::string("invalid numeric value for ") + what + ": '" + text + "'");
    }
}

long parse_long(const std::string &text, const char *what) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument(std::string("invalid integer value for ") + what + ": '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string &text, const char *what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument(std::string("invalid unsigned value for ") + what + ": '" + text + "'");
    return v;
}

bool parse_bool(const std::string &text, const char *what) {
    if (text == "true" || text == "1" || text == "yes" || text == "on")
        return true;
    if (text == "false" || text == "0" || text == "no" || text == "off")
        return false;
    throw std::invalid_argument(std::string("invalid boolean value for ") + what + ": '" + text + "'");
}

struct Task {
    std::size_t snr_index;
    std::size_t scheme_index;
    long trial;
};

TrialDebug run_trial_core(const ExperimentConfig &config, const SweepContext &context, Scheme scheme,
                          double snr_db, std::size_t snr_index, long trial_index) {
    const double noise_var = noise_var_from_snr(snr_db);

    SplitMix64 channel_rng(derive_seed(config.master_seed,
                                       {kChannelStream, static_cast<std::uint64_t>(snr_index),
                                        static_cast<std::uint64_t>(trial_index)}));
    SplitMix64 noise_rng(derive_seed(config.master_seed,
                                     {kNoiseStream, static_cast<std::uint64_t>(snr_index),
                                      static_cast<std::uint64_t>(trial_index),
                                      static_cast<std::uint64_t>(scheme)}));

    ScenarioConfig<double> scenario;
    scenario.n_paths = config.n_paths;
    scenario.distance_range = {config.distance_min, config.distance_max};
    scenario.angle_range = {config.angle_min, config.angle_max};
    scenario.geometry = context.geometry;

    TrialDebug out;
    out.record.snr_db = snr_db;
    out.record.scheme = scheme;
    out.record.trial = trial_index;

    try {
        out.channel = sample_scenario(scenario, channel_rng);
        out.record.channel_hash = channel_hash(out.channel.h);
        switch (scheme) {
        case Scheme::FullCSI: {
            const auto base = full_csi_bound(out.channel, noise_var);
            out.record.rate = achievable_rate(out.channel.h, base.w_data, noise_var);
            out.record.pilots = base.pilots_used;
            out.record.converged = true;
            break;
        }
        case Scheme::ExhaustiveNF: {
            const auto base = exhaustive_nf_search(out.channel, context.codebook, noise_var, noise_rng);
            out.record.rate = achievable_rate(out.channel.h, base.w_data, noise_var);
            out.record.pilots = base.pilots_used;
            out.record.converged = true;
            break;
        }
        case Scheme::MultiBeam: {
            const auto base = multi_beam_combination(out.channel, context.dft, noise_var, noise_rng);
            out.record.rate = achievable_rate(out.channel.h, base.w_data, noise_var);
            out.record.pilots = base.pilots_used;
            out.record.converged = true;
            break;
        }
        case Scheme::CodebookTS:
        case Scheme::ContinuousTS:
        case Scheme::HybridTS: {
            SchemeKind kind = SchemeKind::CodebookTS;
            if (scheme == Scheme::ContinuousTS)
                kind = SchemeKind::ContinuousTS;
            else if (scheme == Scheme::HybridTS)
                kind = SchemeKind::HybridTS;
            TrainingOptions<double> options;
            options.budget = config.budget;
            options.epsilon = config.epsilon;
            options.required_consecutive = config.consecutive;
            options.unconstrained_budget = config.unconstrained && scheme == Scheme::ContinuousTS;
            options.noise_floor_scale = config.detector_noise_floor;
            const auto outcome = run_training(kind, out.channel, context.dft, context.codebook,
                                              context.prior, noise_var, options, noise_rng);
            out.record.rate = achievable_rate(out.channel.h, outcome.w_data, noise_var);
            out.record.pilots = outcome.pilots_used;
            out.record.converged = outcome.converged;
            out.trace = outcome.trace;
            break;
        }
        }
    } catch (const NumericalDegeneracyError &) {
        out.record.failed = true;
        out.record.rate = 0.0;
        out.record.pilots = 0;
        out.record.converged = false;
    }
    return out;
}

} // namespace

std::string scheme_label(Scheme scheme) {
    switch (scheme) {
    case Scheme::FullCSI: return "FullCSI";
    case Scheme::ExhaustiveNF: return "ExhaustiveNF";
    case Scheme::MultiBeam: return "MultiBeam";
    case Scheme::CodebookTS: return "CodebookTS";
    case Scheme::ContinuousTS: return "ContinuousTS";
    case Scheme::HybridTS: return "HybridTS";
    }
    return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
    for (Scheme s : {Scheme::FullCSI, Scheme::ExhaustiveNF, Scheme::MultiBeam, Scheme::CodebookTS,
                     Scheme::ContinuousTS, Scheme::HybridTS})
        if (scheme_label(s) == name)
            return s;
    return std::nullopt;
}

std::vector<double> ExperimentConfig::default_snr_grid() {
    std::vector<double> grid;
    for (int db = 5; db <= 20; ++db)
        grid.push_back(static_cast<double>(db));
    return grid;
}

std::vector<Scheme> ExperimentConfig::default_schemes() {
    return {Scheme::CodebookTS, Scheme::ContinuousTS, Scheme::HybridTS,
            Scheme::ExhaustiveNF, Scheme::MultiBeam, Scheme::FullCSI};
}

void ExperimentConfig::validate() const {
    if (n_antennas < 1)
        throw std::invalid_argument("config: n_antennas must be positive");
    if (!(carrier_freq > 0))
        throw std::invalid_argument("config: carrier_freq must be positive");
    if (n_paths < 1)
        throw std::invalid_argument("config: n_paths must be positive");
    if (!(distance_min > 0) || !(distance_min < distance_max))
        throw std::invalid_argument("config: distance_range must satisfy 0 < min < max");
    if (!(angle_min < angle_max))
        throw std::invalid_argument("config: angle_range must satisfy min < max");
    if (!(beta > 0))
        throw std::invalid_argument("config: beta must be positive");
    if (n_rings < 1)
        throw std::invalid_argument("config: n_rings must be positive");
    if (!(epsilon >= 0))
        throw std::invalid_argument("config: epsilon must be non-negative");
    if (consecutive < 1)
        throw std::invalid_argument("config: consecutive must be positive");
    if (budget < 0)
        throw std::invalid_argument("config: budget must be non-negative");
    if (!(length_scale > 0))
        throw std::invalid_argument("config: length_scale must be positive");
    if (n_trials < 1)
        throw std::invalid_argument("config: n_trials must be positive");
    if (snr_grid_db.empty())
        throw std::invalid_argument("config: snr_grid_db must be non-empty");
    if (schemes.empty())
        throw std::invalid_argument("config: schemes must be non-empty");
    if (!(detector_noise_floor >= 0))
        throw std::invalid_argument("config: detector_noise_floor must be non-negative");
    if (workers < 0)
        throw std::invalid_argument("config: workers must be non-negative");
}

double noise_var_from_snr(double snr_db) {
    if (!std::isfinite(snr_db))
        throw std::invalid_argument("noise_var_from_snr: SNR must be finite");
    return std::pow(10.0, -snr_db / 10.0);
}

SweepContext make_context(const ExperimentConfig &config) {
    SweepContext ctx;
    ctx.geometry = ArrayGeometry<double>::half_wavelength(config.n_antennas, config.wavelength());
    ctx.dft = dft_matrix<double>(config.n_antennas);
    ctx.codebook = polar_codebook(ctx.geometry, config.beta, config.n_rings);
    PriorConfig<double> prior;
    prior.length_scale = config.length_scale;
    ctx.prior = rbf_prior(config.n_antennas, prior);
    return ctx;
}

TrialRecord run_trial(const ExperimentConfig &config, const SweepContext &context, Scheme scheme,
                      double snr_db, std::size_t snr_index, long trial_index) {
    return run_trial_core(config, context, scheme, snr_db, snr_index, trial_index).record;
}

TrialDebug run_trial_debug(const ExperimentConfig &config, const SweepContext &context, Scheme scheme,
                           double snr_db, std::size_t snr_index, long trial_index) {
    return run_trial_core(config, context, scheme, snr_db, snr_index, trial_index);
}

std::uint64_t channel_hash(const CVector<double> &h) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    auto absorb = [&hash](double value) {
        std::uint64_t bits = 0;
        std::memcpy(&bits, &value, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            hash ^= (bits >> (8 * i)) & 0xffu;
            hash *= 0x100000001b3ull;
        }
    };
    for (Index i = 0; i < h.size(); ++i) {
        absorb(h(i).real());
        absorb(h(i).imag());
    }
    return hash;
}

SweepResult run_sweep(const ExperimentConfig &config) {
    config.validate();
    const SweepContext context = make_context(config);

    std::vector<Task> tasks;
    tasks.reserve(config.snr_grid_db.size() * config.schemes.size() * static_cast<std::size_t>(config.n_trials));
    for (std::size_t si = 0; si < config.snr_grid_db.size(); ++si)
        for (std::size_t ci = 0; ci < config.schemes.size(); ++ci)
            for (long t = 0; t < config.n_trials; ++t)
                tasks.push_back({si, ci, t});

    SweepResult result;
    result.raw.resize(tasks.size());

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t n_workers =
        std::min<std::size_t>(config.workers > 0 ? static_cast<std::size_t>(config.workers) : hw, tasks.size());

    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size())
                return;
            const Task &task = tasks[i];
            result.raw[i] = run_trial(config, context, config.schemes[task.scheme_index],
                                      config.snr_grid_db[task.snr_index], task.snr_index, task.trial);
        }
    };

    if (n_workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t i = 0; i < n_workers; ++i)
            pool.emplace_back(work);
        for (auto &th : pool)
            th.join();
    }

    // Aggregate in task order; raw[] is already (snr, scheme, trial)-major.
    const std::size_t per_cell = static_cast<std::size_t>(config.n_trials);
    for (std::size_t si = 0; si < config.snr_grid_db.size(); ++si) {
        for (std::size_t ci = 0; ci < config.schemes.size(); ++ci) {
            const std::size_t base = (si * config.schemes.size() + ci) * per_cell;
            double rate_sum = 0, rate_sq = 0, pilot_sum = 0, pilot_sq = 0;
            long converged = 0, failed = 0;
            for (std::size_t t = 0; t < per_cell; ++t) {
                const TrialRecord &r = result.raw[base + t];
                rate_sum += r.rate;
                rate_sq += r.rate * r.rate;
                pilot_sum += static_cast<double>(r.pilots);
                pilot_sq += static_cast<double>(r.pilots) * static_cast<double>(r.pilots);
                converged += r.converged ? 1 : 0;
                failed += r.failed ? 1 : 0;
            }
            const double n = static_cast<double>(per_cell);
            auto stderr_of = [n](double sum, double sq) {
                if (n < 2)
                    return 0.0;
                const double var = std::max(0.0, (sq - sum * sum / n) / (n - 1.0));
                return std::sqrt(var / n);
            };
            SummaryRow row;
            row.snr_db = config.snr_grid_db[si];
            row.scheme = config.schemes[ci];
            row.mean_rate = rate_sum / n;
            row.rate_stderr = stderr_of(rate_sum, rate_sq);
            row.mean_overhead = pilot_sum / n;
            row.overhead_stderr = stderr_of(pilot_sum, pilot_sq);
            row.convergence_fraction = static_cast<double>(converged) / n;
            result.summary.push_back(row);
            result.failed_trials += failed;
        }
    }
    return result;
}

void write_summary_csv(std::ostream &os, const std::vector<SummaryRow> &rows) {
    os << "snr_db,scheme,mean_rate_bps_hz,rate_stderr,mean_overhead,overhead_stderr,convergence_fraction\n";
    for (const auto &row : rows) {
        os << format_double(row.snr_db) << ',' << scheme_label(row.scheme) << ','
           << format_double(row.mean_rate) << ',' << format_double(row.rate_stderr) << ','
           << format_double(row.mean_overhead) << ',' << format_double(row.overhead_stderr) << ','
           << format_double(row.convergence_fraction) << '\n';
    }
}

void write_raw_csv(std::ostream &os, const std::vector<TrialRecord> &rows) {
    os << "snr_db,scheme,trial,rate,pilots,converged,channel_hash\n";
    char hex[17];
    for (const auto &row : rows) {
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(row.channel_hash));
        os << format_double(row.snr_db) << ',' << scheme_label(row.scheme) << ',' << row.trial << ','
           << format_double(row.rate) << ',' << row.pilots << ',' << (row.converged ? 1 : 0) << ','
           << hex << '\n';
    }
}

std::string meta_json(const ExperimentConfig &config, const SweepResult &result) {
    nlohmann::json cfg;
    cfg["n_antennas"] = config.n_antennas;
    cfg["carrier_freq"] = config.carrier_freq;
    cfg["n_paths"] = config.n_paths;
    cfg["distance_range"] = {config.distance_min, config.distance_max};
    cfg["angle_range"] = {config.angle_min, config.angle_max};
    cfg["beta"] = config.beta;
    cfg["n_rings"] = config.n_rings;
    cfg["epsilon"] = config.epsilon;
    cfg["consecutive"] = config.consecutive;
    cfg["budget"] = config.budget;
    cfg["length_scale"] = config.length_scale;
    cfg["n_trials"] = config.n_trials;
    cfg["snr_grid_db"] = config.snr_grid_db;
    std::vector<std::string> labels;
    for (Scheme s : config.schemes)
        labels.push_back(scheme_label(s));
    cfg["schemes"] = labels;
    cfg["master_seed"] = config.master_seed;
    cfg["unconstrained"] = config.unconstrained;
    cfg["detector_noise_floor"] = config.detector_noise_floor;
    cfg["workers"] = config.workers;

    nlohmann::json meta;
    meta["version"] = kVersion;
    meta["config"] = cfg;
    meta["failed_trials"] = result.failed_trials;
    meta["notes"]["snr_convention"] =
        "snr_db is the average per-antenna receive SNR: channels are rescaled to ||h||^2 = N and "
        "sigma^2 = 10^(-snr_db/10), so the full-CSI rate is log2(1 + N * 10^(snr_db/10)).";
    meta["notes"]["stop_rule"] =
        "training stops when successive received magnitudes stay within max(epsilon, "
        "detector_noise_floor * sigma) for `consecutive` comparisons.";
    return meta.dump(2) + "\n";
}

void write_sweep_outputs(const std::filesystem::path &dir, const ExperimentConfig &config,
                         const SweepResult &result) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "summary.csv", std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + (dir / "summary.csv").string());
        write_summary_csv(os, result.summary);
    }
    {
        std::ofstream os(dir / "raw.csv", std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + (dir / "raw.csv").string());
        write_raw_csv(os, result.raw);
    }
    {
        std::ofstream os(dir / "meta.json", std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot open " + (dir / "meta.json").string());
        os << meta_json(config, result);
    }
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    for (const auto &item : split_list(text))
        out.push_back(parse_double(item, "list entry"));
    return out;
}

std::vector<Scheme> parse_scheme_list(std::string_view text) {
    std::vector<Scheme> out;
    for (const auto &item : split_list(text)) {
        const auto s = parse_scheme(item);
        if (!s)
            throw std::invalid_argument("unknown scheme '" + item + "'");
        out.push_back(*s);
    }
    return out;
}

void apply_config_entry(ExperimentConfig &config, std::string_view key_view, std::string_view value_view) {
    const std::string key = trim(key_view);
    const std::string value = trim(value_view);
    if (key == "n_antennas")
        config.n_antennas = parse_long(value, key.c_str());
    else if (key == "carrier_freq")
        config.carrier_freq = parse_double(value, key.c_str());
    else if (key == "n_paths")
        config.n_paths = parse_long(value, key.c_str());
    else if (key == "distance_range") {
        const auto pair = parse_double_list(value);
        if (pair.size() != 2)
            throw std::invalid_argument("distance_range expects two values");
        config.distance_min = pair[0];
        config.distance_max = pair[1];
    } else if (key == "angle_range") {
        const auto pair = parse_double_list(value);
        if (pair.size() != 2)
            throw std::invalid_argument("angle_range expects two values");
        config.angle_min = pair[0];
        config.angle_max = pair[1];
    } else if (key == "beta")
        config.beta = parse_double(value, key.c_str());
    else if (key == "n_rings")
        config.n_rings = parse_long(value, key.c_str());
    else if (key == "epsilon")
        config.epsilon = parse_double(value, key.c_str());
    else if (key == "consecutive")
        config.consecutive = parse_long(value, key.c_str());
    else if (key == "budget")
        config.budget = parse_long(value, key.c_str());
    else if (key == "length_scale")
        config.length_scale = parse_double(value, key.c_str());
    else if (key == "n_trials")
        config.n_trials = parse_long(value, key.c_str());
    else if (key == "snr_grid_db")
        config.snr_grid_db = parse_double_list(value);
    else if (key == "schemes")
        config.schemes = parse_scheme_list(value);
    else if (key == "master_seed")
        config.master_seed = parse_u64(value, key.c_str());
    else if (key == "unconstrained")
        config.unconstrained = parse_bool(value, key.c_str());
    else if (key == "detector_noise_floor")
        config.detector_noise_floor = parse_double(value, key.c_str());
    else if (key == "workers")
        config.workers = static_cast<int>(parse_long(value, key.c_str()));
    else
        throw std::invalid_argument("unknown config key '" + key + "'");
}

ExperimentConfig load_config_file(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is)
        throw std::invalid_argument("cannot open config file " + path.string());
    ExperimentConfig config;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                        ": expected key = value");
        try {
            apply_config_entry(config, stripped.substr(0, eq), stripped.substr(eq + 1));
        } catch (const std::invalid_argument &err) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + err.what());
        }
    }
    return config;
}

} // namespace nfbt
