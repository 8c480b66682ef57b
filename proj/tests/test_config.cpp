#include <filesystem>
#include <string>

#include <catch2/catch_amalgamated.hpp>

#include "bsw/config.hpp"
#include "support.hpp"

using namespace bsw;

namespace {

// fails the test with the offending message if no ConfigError comes out
std::string config_error_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    FAIL("expected a ConfigError");
    return {};
}

void check_equal(const PipelineConfig& a, const PipelineConfig& b) {
    CHECK(a.rng_seed == b.rng_seed);
    CHECK(a.workers == b.workers);
    CHECK(a.sample_rate_hz == b.sample_rate_hz);
    CHECK(a.highpass_cutoff_hz == b.highpass_cutoff_hz);
    CHECK(a.highpass_order == b.highpass_order);
    CHECK(a.rpeaks.bandpass_low_hz == b.rpeaks.bandpass_low_hz);
    CHECK(a.rpeaks.bandpass_high_hz == b.rpeaks.bandpass_high_hz);
    CHECK(a.rpeaks.bandpass_order == b.rpeaks.bandpass_order);
    CHECK(a.rpeaks.integration_window_s == b.rpeaks.integration_window_s);
    CHECK(a.rpeaks.threshold_fraction == b.rpeaks.threshold_fraction);
    CHECK(a.rpeaks.peak_memory == b.rpeaks.peak_memory);
    CHECK(a.rpeaks.refractory_s == b.rpeaks.refractory_s);
    CHECK(a.rpeaks.refine_window_s == b.rpeaks.refine_window_s);
    CHECK(a.rpeaks.seed_window_s == b.rpeaks.seed_window_s);
    CHECK(a.screening_threshold == b.screening_threshold);
    CHECK(a.warp.w_r == b.warp.w_r);
    CHECK(a.warp.w_s == b.warp.w_s);
    CHECK(a.warp.w_o == b.warp.w_o);
    CHECK(a.warp.s_min == b.warp.s_min);
    CHECK(a.warp.s_max == b.warp.s_max);
    CHECK(a.warp.max_iters == b.warp.max_iters);
    CHECK(a.warp.step_size == b.warp.step_size);
    CHECK(a.warp.rel_tol == b.warp.rel_tol);
    CHECK(a.prototype.r_threshold_scale == b.prototype.r_threshold_scale);
    CHECK(a.prototype.s_threshold == b.prototype.s_threshold);
    CHECK(a.prototype.max_rounds == b.prototype.max_rounds);
    CHECK(a.normal_subsample == b.normal_subsample);
    CHECK(a.diagnosis.r_term_weight == b.diagnosis.r_term_weight);
    CHECK(a.diagnosis.s_term_divisor == b.diagnosis.s_term_divisor);
    CHECK(a.diagnosis.sokolow_threshold_mv == b.diagnosis.sokolow_threshold_mv);
    CHECK(a.diagnosis.cornell_threshold_mv == b.diagnosis.cornell_threshold_mv);
}

}  // namespace

TEST_CASE("stock config file equals the built-in defaults", "[config]") {
    const std::filesystem::path stock =
        std::filesystem::path(BSW_REPO_ROOT) / "bsw.conf";
    REQUIRE(std::filesystem::exists(stock));
    check_equal(load_config(stock.string()), PipelineConfig{});
}

TEST_CASE("config parsing", "[config]") {
    SECTION("empty text gives the defaults") {
        check_equal(parse_config_text(""), PipelineConfig{});
    }
    SECTION("values land in the right fields") {
        const PipelineConfig cfg = parse_config_text(
            "rng_seed = 42\n"
            "workers = 3\n"
            "[io]\n"
            "sample_rate_hz = 250\n"
            "[preprocess]\n"
            "highpass_cutoff_hz = 0.8\n"
            "peak_memory = 5\n"
            "[screening]\n"
            "threshold = 0.25\n"
            "[warp]\n"
            "w_r = 30\n"
            "s_min = -80\n"
            "max_iters = 500\n"
            "[prototype]\n"
            "s_threshold = 15\n"
            "normal_subsample = 64\n"
            "[diagnosis]\n"
            "sokolow_threshold_mv = 4.0\n");
        CHECK(cfg.rng_seed == 42);
        CHECK(cfg.workers == 3);
        CHECK(cfg.sample_rate_hz == 250.0);
        CHECK(cfg.highpass_cutoff_hz == 0.8);
        CHECK(cfg.rpeaks.peak_memory == 5);
        CHECK(cfg.screening_threshold == 0.25);
        CHECK(cfg.warp.w_r == 30.0);
        CHECK(cfg.warp.s_min == -80.0);
        CHECK(cfg.warp.max_iters == 500);
        CHECK(cfg.prototype.s_threshold == 15.0);
        CHECK(cfg.normal_subsample == 64);
        CHECK(cfg.diagnosis.sokolow_threshold_mv == 4.0);
        // untouched fields keep their defaults
        CHECK(cfg.warp.w_s == PipelineConfig{}.warp.w_s);
        CHECK(cfg.highpass_order == PipelineConfig{}.highpass_order);
    }
    SECTION("comments and whitespace are ignored") {
        const PipelineConfig cfg = parse_config_text(
            "# full-line comment\n"
            "; also a comment\n"
            "\n"
            "  [ warp ]  \n"
            "  w_r   =   30   # trailing comment\n"
            "w_s = 0.001 ; other comment style\n");
        CHECK(cfg.warp.w_r == 30.0);
        CHECK(cfg.warp.w_s == 0.001);
    }
    SECTION("fixed beat length is accepted only at its value") {
        CHECK_NOTHROW(parse_config_text("[preprocess]\nbeat_length = 500\n"));
        const std::string msg =
            config_error_of("[preprocess]\nbeat_length = 400\n");
        CHECK(msg.find("fixed at 500") != std::string::npos);
    }
}

TEST_CASE("config rejects unknown and malformed input", "[config]") {
    SECTION("unknown section") {
        CHECK(config_error_of("[nosuch]\nx = 1\n").find("[nosuch]") !=
              std::string::npos);
    }
    SECTION("unknown key in a known section") {
        CHECK(config_error_of("[warp]\nbogus = 1\n").find("bogus") !=
              std::string::npos);
    }
    SECTION("unknown top-level key") {
        config_error_of("verbosity = 2\n");
    }
    SECTION("line numbers in parse errors") {
        CHECK(config_error_of("[warp]\nw_r = 20\nstray line\n").find("line 3") !=
              std::string::npos);
        CHECK(config_error_of("[warp\n").find("line 1") != std::string::npos);
        CHECK(config_error_of("[warp]\n = 5\n").find("line 2") != std::string::npos);
        CHECK(config_error_of("[warp]\nw_r =\n").find("line 2") != std::string::npos);
    }
    SECTION("type errors") {
        config_error_of("[warp]\nw_r = fast\n");
        config_error_of("[warp]\nmax_iters = 2.5\n");
        config_error_of("rng_seed = -3\n");
        config_error_of("workers = 0\n");
    }
    SECTION("cross-field validation") {
        config_error_of("[io]\nsample_rate_hz = 0.9\n");  // cutoff 0.5 >= rate/2
        config_error_of("[warp]\ns_min = 50\ns_max = -50\n");
        config_error_of("[warp]\nw_r = -1\n");
        config_error_of("[warp]\nstep_size = 0\n");
        config_error_of("[preprocess]\nbandpass_low_hz = 20\nbandpass_high_hz = 10\n");
        config_error_of("[screening]\nthreshold = 0\n");
    }
}

TEST_CASE("config file loading", "[config]") {
    testsup::TempDir dir("config");
    SECTION("missing file") {
        try {
            load_config((dir.path / "absent.conf").string());
            FAIL("expected an IoError");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IoError);
        }
    }
    SECTION("round trip through a file") {
        const std::filesystem::path p = dir.path / "custom.conf";
        std::ofstream(p) << "[warp]\nw_r = 25\n";
        CHECK(load_config(p.string()).warp.w_r == 25.0);
    }
}
