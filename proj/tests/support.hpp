#pragma once

// Shared fixtures for the test suite: synthetic beat/record generators and
// a self-cleaning temp directory.

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bsw/beats.hpp"
#include "bsw/record.hpp"

namespace testsup {

// Plausible single beat on the 500-sample grid: P, Q, R, S, T bumps with
// seeded jitter in position, width and amplitude. r_amp > 0 pins the R-wave
// amplitude instead of drawing it.
inline bsw::Beat ecg_beat(unsigned seed, double r_amp = 0.0) {
    std::mt19937 rng(seed);
    auto jit = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    bsw::Beat b(bsw::kBeatLength, 0.0);
    auto add = [&](double c, double w, double a) {
        for (std::size_t t = 0; t < b.size(); ++t)
            b[t] += a * std::exp(-0.5 * (t - c) * (t - c) / (w * w));
    };
    add(jit(105, 135), jit(14, 22), jit(0.08, 0.22));   // P
    add(jit(228, 242), jit(5, 9), -jit(0.05, 0.18));    // Q
    add(jit(245, 255), jit(7, 11), r_amp > 0.0 ? r_amp : jit(0.7, 1.6));  // R
    add(jit(262, 274), jit(6, 10), -jit(0.1, 0.35));    // S
    add(jit(360, 400), jit(22, 34), jit(0.2, 0.5));     // T
    return b;
}

inline bsw::MeanBeat as_mean_beat(const std::string& id, bsw::Beat samples,
                                  bsw::LeadId lead = bsw::LeadId::V1) {
    bsw::MeanBeat m;
    m.record_id = id;
    m.lead = lead;
    m.samples = std::move(samples);
    m.n_beats_averaged = 2;
    return m;
}

// Full 12-lead raw recording: the fixed-shape beat below repeated every
// 500 samples (1 s at 500 Hz), per-lead amplitude scaling, small seeded
// jitter. LVH variants get the tall V5/V6 R and deep V1 S.
inline bsw::EcgRecord synth_record(const std::string& id, bsw::ClassLabel label,
                                   unsigned seed, int n_periods = 12) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> jit(-1e-4, 1e-4);
    const bool lvh = label == bsw::ClassLabel::LVH;
    const double r_amp = lvh ? 2.2 : 1.1;
    const double s_amp = lvh ? -1.4 : -0.25;
    const double scale[12] = {1.0, 1.1,  0.5,  -0.8, 0.7,  0.8,
                              lvh ? 1.3 : 0.6, 0.9, 1.0, 1.05,
                              lvh ? 1.5 : 1.0, 0.95};  // canonical lead order
    const int period = 500, n = n_periods * period;
    bsw::EcgRecord rec;
    rec.record_id = id;
    rec.label = label;
    rec.sample_rate_hz = 500.0;
    std::vector<double> beat(period, 0.0);
    auto add = [&](double c, double w, double a) {
        for (int t = 0; t < period; ++t)
            beat[t] += a * std::exp(-0.5 * (t - c) * (t - c) / (w * w));
    };
    add(120, 18, 0.15);
    add(235, 7, -0.10);
    add(250, 9, r_amp);
    add(268, 8, s_amp);
    add(380, 28, 0.35);
    for (int k = 0; k < 12; ++k) {
        rec.leads[k].reserve(n);
        for (int p = 0; p < n_periods; ++p)
            for (int t = 0; t < period; ++t)
                rec.leads[k].push_back(scale[k] * beat[t] + jit(rng));
    }
    return rec;
}

// Writes rec as a WFDB header + 16-bit .dat pair; lead rows appear in an
// intentionally scrambled order to exercise the canonical reordering.
inline void write_wfdb_pair(const std::filesystem::path& dir, const bsw::EcgRecord& rec) {
    const int order[12] = {6, 0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11};  // V1 first
    const std::size_t n = rec.duration_samples();
    std::ofstream hea(dir / (rec.record_id + ".hea"));
    hea << rec.record_id << " 12 " << rec.sample_rate_hz << ' ' << n << '\n';
    for (int k : order)
        hea << rec.record_id << ".dat 16 1000(0)/mV 16 0 0 0 0 "
            << bsw::lead_name(static_cast<bsw::LeadId>(k)) << '\n';
    if (rec.label != bsw::ClassLabel::Unknown)
        hea << "# label: " << bsw::class_name(rec.label) << '\n';
    hea.close();
    std::ofstream dat(dir / (rec.record_id + ".dat"), std::ios::binary);
    for (std::size_t t = 0; t < n; ++t)
        for (int k : order) {
            const int raw = static_cast<int>(std::lround(rec.leads[k][t] * 1000.0));
            const std::uint16_t u = static_cast<std::uint16_t>(raw);
            const char bytes[2] = {static_cast<char>(u & 0xff),
                                   static_cast<char>(u >> 8)};
            dat.write(bytes, 2);
        }
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::atomic<unsigned> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("bsw_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::size_t count_sub(const std::string& hay, const std::string& needle) {
    std::size_t c = 0, pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        ++c;
        pos += needle.size();
    }
    return c;
}

}  // namespace testsup
