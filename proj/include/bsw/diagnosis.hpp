#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bsw/beats.hpp"
#include "bsw/error.hpp"
#include "bsw/lead.hpp"
#include "bsw/numeric.hpp"
#include "bsw/prototype.hpp"
#include "bsw/record.hpp"
#include "bsw/warp.hpp"

namespace bsw {

struct DiagnosisConfig {
    double r_term_weight = 10.0;      // amplitude changes dominate the metric
    double s_term_divisor = 500.0;    // shifts are in samples, so rescale
    double sokolow_threshold_mv = 3.5;
    double cornell_threshold_mv = 1.2;
};

// Distance of a warped beat from its reference:
//   d = w_r (||r - 1||_inf + sigma(r)) + (||s||_inf + sigma(s)) / c_s
// Zero exactly when r = 1 and s = 0.
inline double prototype_distance(const WarpResult& result,
                                 const DiagnosisConfig& cfg = {}) {
    double r_inf = 0.0;
    for (double v : result.r) r_inf = std::max(r_inf, std::abs(v - 1.0));
    return cfg.r_term_weight * (r_inf + stddev(result.r)) +
           (inf_norm(result.s) + stddev(result.s)) / cfg.s_term_divisor;
}

// R/S landmarks of a mean beat: the landmark is the sample of largest |value|
// (the dominant deflection, normally the R peak). R amplitude is the maximum
// within +/-60 samples of it, S depth the |minimum| over the 60 samples from
// the landmark on — inclusive, so a dominant S trough measures itself.
struct WaveMeasurements {
    std::size_t landmark = 0;
    double r_amplitude = 0.0;
    double s_depth = 0.0;
};

inline WaveMeasurements measure_waves(const Beat& beat) {
    if (beat.empty()) fail(ErrorCode::MissingLead, "cannot measure an empty beat");
    const std::size_t n = beat.size();
    WaveMeasurements m;
    for (std::size_t t = 1; t < n; ++t)
        if (std::abs(beat[t]) > std::abs(beat[m.landmark])) m.landmark = t;
    const std::size_t r_lo = m.landmark >= 60 ? m.landmark - 60 : 0;
    const std::size_t r_hi = std::min(n - 1, m.landmark + 60);
    double r = beat[r_lo];
    for (std::size_t t = r_lo; t <= r_hi; ++t) r = std::max(r, beat[t]);
    m.r_amplitude = r;
    const std::size_t s_hi = std::min(n - 1, m.landmark + 60);
    double s = beat[m.landmark];
    for (std::size_t t = m.landmark; t <= s_hi; ++t) s = std::min(s, beat[t]);
    m.s_depth = std::abs(s);
    return m;
}

struct SokolowLyonResult {
    double s_v1 = 0.0;
    double r_v5 = 0.0;
    double r_v6 = 0.0;
    double index = 0.0;  // S_V1 + max(R_V5, R_V6), in mV
    ClassLabel decision = ClassLabel::Normal;
};

struct CornellResult {
    double r_avl = 0.0;
    ClassLabel decision = ClassLabel::Normal;
};

namespace detail {

inline const Beat& require_lead(const RecordMeanBeats& record, LeadId lead) {
    const Beat& b = record.leads[lead_index(lead)];
    if (b.empty())
        fail(ErrorCode::MissingLead, std::string("record '") + record.record_id +
                                         "' has no mean beat for lead " +
                                         lead_name(lead));
    return b;
}

}  // namespace detail

// Sokolow-Lyon voltage criterion: S_V1 + max(R_V5, R_V6) > threshold => LVH
// (strictly greater; the boundary itself is Normal).
inline SokolowLyonResult sokolow_lyon(const RecordMeanBeats& record,
                                      const DiagnosisConfig& cfg = {}) {
    SokolowLyonResult out;
    out.s_v1 = measure_waves(detail::require_lead(record, LeadId::V1)).s_depth;
    out.r_v5 = measure_waves(detail::require_lead(record, LeadId::V5)).r_amplitude;
    out.r_v6 = measure_waves(detail::require_lead(record, LeadId::V6)).r_amplitude;
    out.index = out.s_v1 + std::max(out.r_v5, out.r_v6);
    out.decision = out.index > cfg.sokolow_threshold_mv ? ClassLabel::LVH
                                                        : ClassLabel::Normal;
    return out;
}

// Modified Cornell criterion: R_aVL > threshold => LVH (strict).
inline CornellResult modified_cornell(const RecordMeanBeats& record,
                                      const DiagnosisConfig& cfg = {}) {
    CornellResult out;
    out.r_avl = measure_waves(detail::require_lead(record, LeadId::aVL)).r_amplitude;
    out.decision = out.r_avl > cfg.cornell_threshold_mv ? ClassLabel::LVH
                                                        : ClassLabel::Normal;
    return out;
}

// Distances from one record's beat to the two closest prototypes of one
// class library, for one lead.
struct LeadClassDistances {
    double two_smallest_sum = 0.0;
    int nearest = -1;  // index into the (deduplicated) library
    std::size_t nearest_occurrence = 0;
};

struct LeadDiagnosis {
    bool computed = false;
    LeadClassDistances normal;
    LeadClassDistances lvh;
};

struct DiagnosisReport {
    std::string record_id;
    std::array<LeadDiagnosis, kLeadCount> per_lead{};
    double total_normal = 0.0;
    double total_lvh = 0.0;
    ClassLabel bsw_decision = ClassLabel::Normal;
    SokolowLyonResult sokolow;
    CornellResult cornell;
};

// The decision compares summed distances over the LVH-sensitive leads only.
inline constexpr std::array<LeadId, 3> kDecisionLeads = {LeadId::V1, LeadId::V5,
                                                         LeadId::V6};

namespace detail {

// Exact duplicates would otherwise occupy both of the "closest two" slots,
// so the library is deduplicated by sample equality before ranking.
inline std::vector<std::size_t> unique_prototype_indices(
    const std::vector<Prototype>& library) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < library.size(); ++i) {
        bool duplicate = false;
        for (const std::size_t k : keep) {
            if (library[k].samples == library[i].samples) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) keep.push_back(i);
    }
    return keep;
}

inline LeadClassDistances closest_two(const Beat& beat,
                                      const std::vector<Prototype>& library,
                                      const WarpConfig& warp_cfg,
                                      const DiagnosisConfig& cfg) {
    const std::vector<std::size_t> unique = unique_prototype_indices(library);
    double best = 0.0, second = 0.0;
    int best_idx = -1, second_idx = -1;
    for (const std::size_t k : unique) {
        const double d =
            prototype_distance(warp(beat, library[k].samples, warp_cfg), cfg);
        if (best_idx == -1 || d < best) {
            second = best;
            second_idx = best_idx;
            best = d;
            best_idx = static_cast<int>(k);
        } else if (second_idx == -1 || d < second) {
            second = d;
            second_idx = static_cast<int>(k);
        }
    }
    LeadClassDistances out;
    out.nearest = best_idx;
    out.nearest_occurrence = library[static_cast<std::size_t>(best_idx)].occurrence;
    // a singleton library counts double so scales stay comparable
    out.two_smallest_sum = second_idx == -1 ? 2.0 * best : best + second;
    return out;
}

}  // namespace detail

// Warp the record's mean beat (as f) against every prototype (as g) of both
// class libraries, lead by lead; keep the two smallest distances per class.
// LVH iff the normal-library total over V1/V5/V6 exceeds the LVH total;
// ties stay Normal.
inline DiagnosisReport classify_bsw(const RecordMeanBeats& record,
                                    const PrototypeLibrarySet& libraries,
                                    const WarpConfig& warp_cfg = {},
                                    const DiagnosisConfig& cfg = {}) {
    DiagnosisReport report;
    report.record_id = record.record_id;
    for (LeadId lead : kDecisionLeads) {
        detail::require_lead(record, lead);
        for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH}) {
            if (libraries.at(label, lead).empty())
                fail(ErrorCode::EmptyLibrary,
                     std::string("no ") + class_name(label) +
                         " prototypes for lead " + lead_name(lead));
        }
    }
    for (LeadId lead : kAllLeads) {
        const Beat& beat = record.leads[lead_index(lead)];
        const auto& normal_lib = libraries.at(ClassLabel::Normal, lead);
        const auto& lvh_lib = libraries.at(ClassLabel::LVH, lead);
        if (beat.empty() || normal_lib.empty() || lvh_lib.empty()) continue;
        LeadDiagnosis& entry = report.per_lead[lead_index(lead)];
        entry.normal = detail::closest_two(beat, normal_lib, warp_cfg, cfg);
        entry.lvh = detail::closest_two(beat, lvh_lib, warp_cfg, cfg);
        entry.computed = true;
    }
    for (LeadId lead : kDecisionLeads) {
        const LeadDiagnosis& entry = report.per_lead[lead_index(lead)];
        report.total_normal += entry.normal.two_smallest_sum;
        report.total_lvh += entry.lvh.two_smallest_sum;
    }
    report.bsw_decision = report.total_normal > report.total_lvh
                              ? ClassLabel::LVH
                              : ClassLabel::Normal;
    return report;
}

// Full per-record report: BSW classification plus both voltage baselines.
inline DiagnosisReport diagnose_record(const RecordMeanBeats& record,
                                       const PrototypeLibrarySet& libraries,
                                       const WarpConfig& warp_cfg = {},
                                       const DiagnosisConfig& cfg = {}) {
    DiagnosisReport report = classify_bsw(record, libraries, warp_cfg, cfg);
    report.sokolow = sokolow_lyon(record, cfg);
    report.cornell = modified_cornell(record, cfg);
    return report;
}

// LVH is the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
    double sensitivity() const {
        return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                           : 0.0;
    }
    double specificity() const {
        return tn + fp > 0 ? static_cast<double>(tn) / static_cast<double>(tn + fp)
                           : 0.0;
    }

    void tally(ClassLabel truth, ClassLabel predicted) {
        if (truth == ClassLabel::LVH)
            predicted == ClassLabel::LVH ? ++tp : ++fn;
        else
            predicted == ClassLabel::LVH ? ++fp : ++tn;
    }
};

struct EvaluationSummary {
    ConfusionMatrix bsw;
    ConfusionMatrix sokolow;
    ConfusionMatrix cornell;
};

inline EvaluationSummary evaluate(const std::vector<DiagnosisReport>& reports,
                                  const std::vector<ClassLabel>& truth) {
    if (reports.size() != truth.size())
        fail(ErrorCode::LengthMismatch,
             "evaluation needs one true label per report");
    if (reports.empty())
        fail(ErrorCode::EmptyInput, "evaluation needs at least one report");
    EvaluationSummary summary;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        if (truth[i] == ClassLabel::Unknown)
            fail(ErrorCode::InvalidRecord,
                 "record '" + reports[i].record_id + "' has no true label");
        summary.bsw.tally(truth[i], reports[i].bsw_decision);
        summary.sokolow.tally(truth[i], reports[i].sokolow.decision);
        summary.cornell.tally(truth[i], reports[i].cornell.decision);
    }
    return summary;
}

}  // namespace bsw
