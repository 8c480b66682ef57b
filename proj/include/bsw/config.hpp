#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "bsw/beats.hpp"
#include "bsw/diagnosis.hpp"
#include "bsw/error.hpp"
#include "bsw/prototype.hpp"
#include "bsw/rpeaks.hpp"
#include "bsw/warp.hpp"

namespace bsw {

// Every tunable constant of the pipeline in one place. The defaults here are
// the reference values; the checked-in config file spells out the same
// numbers so that a default-constructed PipelineConfig and a parsed stock
// file agree field for field.
struct PipelineConfig {
    std::uint64_t rng_seed = 1;
    int workers = 1;

    // [io]
    double sample_rate_hz = 500.0;  // assumed rate for headerless CSV input

    // [preprocess]
    double highpass_cutoff_hz = 0.5;
    int highpass_order = 4;
    RPeakConfig rpeaks;

    // [screening]
    double screening_threshold = 0.3;

    // [warp]
    WarpConfig warp;

    // [prototype]
    PrototypeConfig prototype;
    std::size_t normal_subsample = 256;  // class balancing during library build

    // [diagnosis]
    DiagnosisConfig diagnosis;
};

namespace detail {

inline double config_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::ConfigError, key + ": expected a number, got '" + value + "'");
}

inline long long config_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used == value.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorCode::ConfigError, key + ": expected an integer, got '" + value + "'");
}

inline std::string strip_comment(const std::string& line) {
    const std::size_t cut = line.find_first_of("#;");
    return cut == std::string::npos ? line : line.substr(0, cut);
}

inline std::string trim_ws(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Dispatches one parsed key to its config field. The long if-chain doubles
// as the canonical list of recognised keys.
inline void apply_config_key(PipelineConfig& cfg, const std::string& section,
                             const std::string& key, const std::string& value) {
    const std::string where =
        section.empty() ? key : "[" + section + "] " + key;
    const auto num = [&] { return config_double(where, value); };
    const auto integer = [&] { return config_int(where, value); };
    const auto positive_count = [&](const char* what) {
        const long long v = integer();
        if (v < 1) fail(ErrorCode::ConfigError, where + ": " + what + " must be >= 1");
        return v;
    };

    if (section.empty()) {
        if (key == "rng_seed") {
            const long long v = integer();
            if (v < 0) fail(ErrorCode::ConfigError, where + ": seed must be non-negative");
            cfg.rng_seed = static_cast<std::uint64_t>(v);
            return;
        }
        if (key == "workers") {
            cfg.workers = static_cast<int>(positive_count("worker count"));
            return;
        }
    } else if (section == "io") {
        if (key == "sample_rate_hz") { cfg.sample_rate_hz = num(); return; }
    } else if (section == "preprocess") {
        if (key == "highpass_cutoff_hz") { cfg.highpass_cutoff_hz = num(); return; }
        if (key == "highpass_order") {
            cfg.highpass_order = static_cast<int>(positive_count("filter order"));
            return;
        }
        if (key == "bandpass_low_hz") { cfg.rpeaks.bandpass_low_hz = num(); return; }
        if (key == "bandpass_high_hz") { cfg.rpeaks.bandpass_high_hz = num(); return; }
        if (key == "bandpass_order") {
            cfg.rpeaks.bandpass_order = static_cast<int>(positive_count("filter order"));
            return;
        }
        if (key == "integration_window_s") { cfg.rpeaks.integration_window_s = num(); return; }
        if (key == "threshold_fraction") { cfg.rpeaks.threshold_fraction = num(); return; }
        if (key == "peak_memory") {
            cfg.rpeaks.peak_memory = static_cast<std::size_t>(positive_count("peak memory"));
            return;
        }
        if (key == "refractory_s") { cfg.rpeaks.refractory_s = num(); return; }
        if (key == "refine_window_s") { cfg.rpeaks.refine_window_s = num(); return; }
        if (key == "seed_window_s") { cfg.rpeaks.seed_window_s = num(); return; }
        if (key == "beat_length") {
            if (integer() != static_cast<long long>(kBeatLength))
                fail(ErrorCode::ConfigError,
                     where + ": beat length is fixed at " + std::to_string(kBeatLength));
            return;
        }
    } else if (section == "screening") {
        if (key == "threshold") { cfg.screening_threshold = num(); return; }
    } else if (section == "warp") {
        if (key == "w_r") { cfg.warp.w_r = num(); return; }
        if (key == "w_s") { cfg.warp.w_s = num(); return; }
        if (key == "w_o") { cfg.warp.w_o = num(); return; }
        if (key == "s_min") { cfg.warp.s_min = num(); return; }
        if (key == "s_max") { cfg.warp.s_max = num(); return; }
        if (key == "max_iters") {
            cfg.warp.max_iters = static_cast<int>(positive_count("iteration cap"));
            return;
        }
        if (key == "step_size") { cfg.warp.step_size = num(); return; }
        if (key == "rel_tol") { cfg.warp.rel_tol = num(); return; }
    } else if (section == "prototype") {
        if (key == "r_threshold_scale") { cfg.prototype.r_threshold_scale = num(); return; }
        if (key == "s_threshold") { cfg.prototype.s_threshold = num(); return; }
        if (key == "max_rounds") {
            cfg.prototype.max_rounds = static_cast<int>(positive_count("round cap"));
            return;
        }
        if (key == "normal_subsample") {
            cfg.normal_subsample = static_cast<std::size_t>(positive_count("subsample size"));
            return;
        }
    } else if (section == "diagnosis") {
        if (key == "r_term_weight") { cfg.diagnosis.r_term_weight = num(); return; }
        if (key == "s_term_divisor") { cfg.diagnosis.s_term_divisor = num(); return; }
        if (key == "sokolow_threshold_mv") { cfg.diagnosis.sokolow_threshold_mv = num(); return; }
        if (key == "cornell_threshold_mv") { cfg.diagnosis.cornell_threshold_mv = num(); return; }
    } else {
        fail(ErrorCode::ConfigError, "unknown config section [" + section + "]");
    }
    fail(ErrorCode::ConfigError, "unknown config key '" + where + "'");
}

}  // namespace detail

// Cross-field sanity checks, run after parsing and again before each
// pipeline stage (CLI overrides can break limits a valid file satisfied).
inline void validate_config(const PipelineConfig& cfg) {
    const auto bad = [](const std::string& msg) {
        fail(ErrorCode::ConfigError, msg);
    };
    if (!(cfg.sample_rate_hz > 0.0)) bad("io.sample_rate_hz must be positive");
    if (!(cfg.highpass_cutoff_hz > 0.0) ||
        cfg.highpass_cutoff_hz >= cfg.sample_rate_hz / 2.0)
        bad("preprocess.highpass_cutoff_hz must lie in (0, sample_rate/2)");
    if (!(cfg.rpeaks.bandpass_low_hz > 0.0) ||
        !(cfg.rpeaks.bandpass_high_hz > cfg.rpeaks.bandpass_low_hz))
        bad("preprocess band-pass edges must satisfy 0 < low < high");
    if (!(cfg.rpeaks.integration_window_s > 0.0)) bad("preprocess.integration_window_s must be positive");
    if (!(cfg.rpeaks.threshold_fraction > 0.0)) bad("preprocess.threshold_fraction must be positive");
    if (!(cfg.rpeaks.refractory_s > 0.0)) bad("preprocess.refractory_s must be positive");
    if (!(cfg.rpeaks.refine_window_s > 0.0)) bad("preprocess.refine_window_s must be positive");
    if (!(cfg.rpeaks.seed_window_s > 0.0)) bad("preprocess.seed_window_s must be positive");
    if (!(cfg.screening_threshold > 0.0)) bad("screening.threshold must be positive");
    if (cfg.warp.w_r < 0.0 || cfg.warp.w_s < 0.0 || cfg.warp.w_o < 0.0)
        bad("warp regularization weights must be non-negative");
    if (!(cfg.warp.s_min < cfg.warp.s_max)) bad("warp shift bounds must satisfy s_min < s_max");
    if (!(cfg.warp.step_size > 0.0)) bad("warp.step_size must be positive");
    if (!(cfg.warp.rel_tol > 0.0)) bad("warp.rel_tol must be positive");
    if (!(cfg.prototype.r_threshold_scale > 0.0)) bad("prototype.r_threshold_scale must be positive");
    if (!(cfg.prototype.s_threshold > 0.0)) bad("prototype.s_threshold must be positive");
    if (!(cfg.diagnosis.r_term_weight > 0.0)) bad("diagnosis.r_term_weight must be positive");
    if (!(cfg.diagnosis.s_term_divisor > 0.0)) bad("diagnosis.s_term_divisor must be positive");
    if (!(cfg.diagnosis.sokolow_threshold_mv > 0.0)) bad("diagnosis.sokolow_threshold_mv must be positive");
    if (!(cfg.diagnosis.cornell_threshold_mv > 0.0)) bad("diagnosis.cornell_threshold_mv must be positive");
}

// INI-style parser: [section] headers, key = value lines, # or ; comments.
// Unknown sections or keys are hard errors so that a typo can never silently
// fall back to a default.
inline PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = detail::trim_ws(detail::strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                fail(ErrorCode::ConfigError,
                     "line " + std::to_string(line_no) + ": malformed section header");
            section = detail::trim_ws(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::ConfigError,
                 "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim_ws(line.substr(0, eq));
        const std::string value = detail::trim_ws(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail(ErrorCode::ConfigError,
                 "line " + std::to_string(line_no) + ": empty key or value");
        detail::apply_config_key(cfg, section, key, value);
    }
    validate_config(cfg);
    return cfg;
}

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace bsw
