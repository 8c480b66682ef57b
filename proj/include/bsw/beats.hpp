#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "bsw/error.hpp"
#include "bsw/lead.hpp"
#include "bsw/numeric.hpp"
#include "bsw/record.hpp"

namespace bsw {

// Every beat downstream of segmentation lives on this fixed grid.
inline constexpr std::size_t kBeatLength = 500;

using Beat = std::vector<double>;

// The per-lead heartbeat collection H = {h_i}, each resampled to kBeatLength.
struct BeatSet {
    LeadId lead = LeadId::I;
    std::vector<Beat> beats;

    std::size_t size() const { return beats.size(); }
};

struct MeanBeat {
    std::string record_id;
    LeadId lead = LeadId::I;
    Beat samples;
    std::size_t n_beats_averaged = 0;
};

// Midpoint-to-midpoint segmentation around each interior R peak, linearly
// resampled onto kBeatLength samples. Yields exactly peaks.size() - 2 beats;
// the leading and trailing incomplete beats are dropped.
inline BeatSet segment_beats(const Signal& lead_signal,
                             const std::vector<std::size_t>& r_peaks,
                             LeadId lead = LeadId::I) {
    if (r_peaks.size() < 3)
        fail(ErrorCode::NotEnoughBeats,
             "segmentation needs at least 3 R peaks, got " + std::to_string(r_peaks.size()));
    BeatSet set;
    set.lead = lead;
    for (std::size_t k = 1; k + 1 < r_peaks.size(); ++k) {
        const std::size_t start = (r_peaks[k - 1] + r_peaks[k]) / 2;
        const std::size_t end = (r_peaks[k] + r_peaks[k + 1]) / 2;  // exclusive
        if (end > lead_signal.size() || start >= end)
            fail(ErrorCode::NotEnoughBeats, "R peaks outside the signal");
        Beat span(lead_signal.begin() + static_cast<std::ptrdiff_t>(start),
                  lead_signal.begin() + static_cast<std::ptrdiff_t>(end));
        set.beats.push_back(resample_linear(span, kBeatLength));
    }
    return set;
}

// Pointwise arithmetic mean over the set.
inline MeanBeat mean_beat(const BeatSet& beats, const std::string& record_id = {}) {
    if (beats.size() < 2)
        fail(ErrorCode::NotEnoughBeats,
             "mean beat needs at least 2 beats, got " + std::to_string(beats.size()));
    MeanBeat out;
    out.record_id = record_id;
    out.lead = beats.lead;
    out.n_beats_averaged = beats.size();
    out.samples.assign(kBeatLength, 0.0);
    for (const Beat& b : beats.beats)
        for (std::size_t t = 0; t < kBeatLength; ++t) out.samples[t] += b[t];
    for (double& v : out.samples) v /= static_cast<double>(beats.size());
    return out;
}

}  // namespace bsw
