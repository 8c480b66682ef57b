#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bsw/beats.hpp"
#include "bsw/error.hpp"
#include "bsw/lead.hpp"

namespace bsw {

// Mean cross-beat variability:
//   v(H) = (1/T) sum_t sqrt( (1/(n-1)) sum_i (h_i(t) - mean_t)^2 )
inline double variability(const BeatSet& beats) {
    const std::size_t n = beats.size();
    if (n < 2)
        fail(ErrorCode::NotEnoughBeats, "variability needs at least 2 beats");
    double total = 0.0;
    for (std::size_t t = 0; t < kBeatLength; ++t) {
        double m = 0.0;
        for (const Beat& b : beats.beats) m += b[t];
        m /= static_cast<double>(n);
        double ss = 0.0;
        for (const Beat& b : beats.beats) ss += (b[t] - m) * (b[t] - m);
        total += std::sqrt(ss / static_cast<double>(n - 1));
    }
    return total / static_cast<double>(kBeatLength);
}

// Average per-beat activity:
//   a(H) = (1/n) sum_i sqrt( (1/(T-1)) sum_t (h_i(t) - mean_i)^2 )
inline double activity(const BeatSet& beats) {
    const std::size_t n = beats.size();
    if (n < 2)
        fail(ErrorCode::NotEnoughBeats, "activity needs at least 2 beats");
    double total = 0.0;
    for (const Beat& b : beats.beats) {
        double m = 0.0;
        for (double v : b) m += v;
        m /= static_cast<double>(kBeatLength);
        double ss = 0.0;
        for (double v : b) ss += (v - m) * (v - m);
        total += std::sqrt(ss / static_cast<double>(kBeatLength - 1));
    }
    return total / static_cast<double>(n);
}

// Dimensionless heartbeat variability v_h = v(H)/a(H); scale invariant.
inline double vh(const BeatSet& beats) {
    const double a = activity(beats);
    if (a == 0.0)
        fail(ErrorCode::DegenerateFlatBeats, "all beats are constant, v_h undefined");
    return variability(beats) / a;
}

struct VariabilityReport {
    std::string record_id;
    std::array<double, kLeadCount> per_lead_vh{};
    double max_vh = 0.0;
    bool eligible = false;
    std::string reason;  // set when ineligible
};

// A record is an eligible prototype donor iff v_h stays below the threshold
// on every lead. Flat-beat degeneracy marks the record ineligible rather
// than failing the batch.
inline VariabilityReport screen_record(const std::string& record_id,
                                       const std::array<BeatSet, kLeadCount>& lead_beats,
                                       double threshold = 0.3) {
    VariabilityReport report;
    report.record_id = record_id;
    report.max_vh = 0.0;
    for (LeadId lead : kAllLeads) {
        const BeatSet& set = lead_beats[lead_index(lead)];
        double value = 0.0;
        try {
            value = vh(set);
        } catch (const Error& e) {
            report.per_lead_vh[lead_index(lead)] =
                std::numeric_limits<double>::quiet_NaN();
            report.max_vh = std::numeric_limits<double>::infinity();
            report.eligible = false;
            report.reason = std::string("lead ") + lead_name(lead) + ": " + e.what();
            return report;
        }
        report.per_lead_vh[lead_index(lead)] = value;
        report.max_vh = std::max(report.max_vh, value);
    }
    report.eligible = report.max_vh < threshold;
    if (!report.eligible) report.reason = "max v_h >= threshold";
    return report;
}

inline std::vector<VariabilityReport> screen(
    const std::vector<std::pair<std::string, std::array<BeatSet, kLeadCount>>>& records,
    double threshold = 0.3) {
    std::vector<VariabilityReport> out;
    out.reserve(records.size());
    for (const auto& [id, beats] : records)
        out.push_back(screen_record(id, beats, threshold));
    return out;
}

}  // namespace bsw
