#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include "bsw/error.hpp"
#include "bsw/filter.hpp"
#include "bsw/numeric.hpp"
#include "bsw/record.hpp"

namespace bsw {

// All detector constants in one place; defaults are the tuned values used
// throughout the pipeline.
struct RPeakConfig {
    double bandpass_low_hz = 5.0;
    double bandpass_high_hz = 15.0;
    int bandpass_order = 2;            // prototype order, band-pass has 2x poles
    double integration_window_s = 0.15;
    double threshold_fraction = 0.5;   // of the running mean peak height
    std::size_t peak_memory = 8;       // how many accepted peaks the mean spans
    double refractory_s = 0.3;
    double refine_window_s = 0.05;     // argmax refinement on the raw composite
    double seed_window_s = 2.0;        // initial threshold from this prefix
};

// Sum of the upward-R leads minus aVR. Operates on the record's samples as
// given; the pipeline passes a baseline-filtered record.
inline Signal composite_lead(const EcgRecord& record) {
    validate_record(record);
    const std::size_t n = record.duration_samples();
    Signal out(n, 0.0);
    for (LeadId lead : {LeadId::I, LeadId::II, LeadId::V4, LeadId::V5, LeadId::V6}) {
        const Signal& s = record.lead(lead);
        for (std::size_t t = 0; t < n; ++t) out[t] += s[t];
    }
    const Signal& avr = record.lead(LeadId::aVR);
    for (std::size_t t = 0; t < n; ++t) out[t] -= avr[t];
    return out;
}

// Energy-based R detector: band-pass 5-15 Hz, square, integrate over 150 ms,
// adaptive threshold at threshold_fraction x mean of the last peak_memory
// integrated peak heights, refractory 0.3 s, then refine each detection to
// the raw-composite argmax within +/-50 ms.
inline std::vector<std::size_t> detect_r_peaks(const Signal& composite,
                                               double sample_rate_hz,
                                               const RPeakConfig& cfg = {}) {
    if (sample_rate_hz <= 0.0)
        fail(ErrorCode::InvalidRecord, "non-positive sample rate");
    const std::size_t n = composite.size();
    if (static_cast<double>(n) < 2.0 * sample_rate_hz)
        fail(ErrorCode::SignalTooShort, "R detection needs at least 2 s of signal");

    const auto bp_sos = butter_bandpass(cfg.bandpass_order, cfg.bandpass_low_hz,
                                        cfg.bandpass_high_hz, sample_rate_hz);
    Signal energy = sosfiltfilt(bp_sos, composite);
    for (double& v : energy) v *= v;
    const std::size_t win =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     std::lround(cfg.integration_window_s * sample_rate_hz)));
    energy = moving_average(energy, win);

    const std::size_t refractory =
        static_cast<std::size_t>(std::lround(cfg.refractory_s * sample_rate_hz));
    const std::size_t refine =
        static_cast<std::size_t>(std::lround(cfg.refine_window_s * sample_rate_hz));

    // seed the adaptive threshold from the strongest feature in the prefix
    const std::size_t seed_end = std::min(
        n, static_cast<std::size_t>(std::lround(cfg.seed_window_s * sample_rate_hz)));
    double seed_peak = 0.0;
    for (std::size_t t = 0; t < seed_end; ++t) seed_peak = std::max(seed_peak, energy[t]);

    std::deque<double> recent;
    auto threshold = [&]() {
        if (recent.empty()) return cfg.threshold_fraction * seed_peak;
        double s = 0.0;
        for (double v : recent) s += v;
        return cfg.threshold_fraction * s / static_cast<double>(recent.size());
    };

    std::vector<std::size_t> detections;
    std::ptrdiff_t last = -static_cast<std::ptrdiff_t>(refractory) - 1;
    for (std::size_t t = 1; t + 1 < n; ++t) {
        if (energy[t] <= 0.0) continue;
        if (energy[t] < energy[t - 1] || energy[t] < energy[t + 1]) continue;
        if (energy[t] <= threshold()) continue;
        if (static_cast<std::ptrdiff_t>(t) - last < static_cast<std::ptrdiff_t>(refractory))
            continue;  // refractory: the earlier detection wins
        // the trigger can sit on a sidelobe of the integrated energy; commit
        // to the strongest sample within one refractory window instead
        std::size_t best = t;
        const std::size_t scan_end = std::min(n - 1, t + refractory);
        for (std::size_t u = t + 1; u <= scan_end; ++u)
            if (energy[u] > energy[best]) best = u;
        detections.push_back(best);
        last = static_cast<std::ptrdiff_t>(best);
        recent.push_back(energy[best]);
        if (recent.size() > cfg.peak_memory) recent.pop_front();
    }

    // refine to the raw-composite argmax near each detection
    std::vector<std::size_t> peaks;
    for (std::size_t d : detections) {
        const std::size_t lo = d >= refine ? d - refine : 0;
        const std::size_t hi = std::min(n - 1, d + refine);
        std::size_t best = lo;
        for (std::size_t t = lo + 1; t <= hi; ++t)
            if (composite[t] > composite[best]) best = t;
        peaks.push_back(best);
    }

    // refinement may pull neighbours together; re-impose order and spacing
    std::sort(peaks.begin(), peaks.end());
    std::vector<std::size_t> out;
    for (std::size_t p : peaks) {
        if (!out.empty() && p - out.back() < refractory) continue;
        if (!out.empty() && p == out.back()) continue;
        out.push_back(p);
    }

    if (out.size() < 3)
        fail(ErrorCode::NotEnoughBeats,
             "found " + std::to_string(out.size()) + " R peaks, need at least 3");
    return out;
}

}  // namespace bsw
