#pragma once

#include <array>
#include <string>
#include <vector>

#include "bsw/error.hpp"
#include "bsw/lead.hpp"

namespace bsw {

enum class ClassLabel { Normal, LVH, Unknown };

inline const char* class_name(ClassLabel label) {
    switch (label) {
        case ClassLabel::Normal: return "Normal";
        case ClassLabel::LVH: return "LVH";
        case ClassLabel::Unknown: return "Unknown";
    }
    return "Unknown";
}

inline ClassLabel parse_class_label(const std::string& s) {
    if (s == "Normal") return ClassLabel::Normal;
    if (s == "LVH") return ClassLabel::LVH;
    if (s == "Unknown") return ClassLabel::Unknown;
    fail(ErrorCode::MalformedHeader, "unknown class label '" + s + "'");
}

using Signal = std::vector<double>;

// One raw multi-lead recording, amplitudes already normalized to millivolts.
// Leads are stored in canonical LeadId order.
struct EcgRecord {
    std::string record_id;
    ClassLabel label = ClassLabel::Unknown;
    double sample_rate_hz = 0.0;
    std::array<Signal, kLeadCount> leads;

    std::size_t duration_samples() const { return leads[0].size(); }

    const Signal& lead(LeadId id) const { return leads[lead_index(id)]; }
    Signal& lead(LeadId id) { return leads[lead_index(id)]; }
};

// Enforces the record invariants: 12 equal-length leads, positive sample
// rate, at least 2 s of signal.
inline void validate_record(const EcgRecord& record) {
    if (record.sample_rate_hz <= 0.0)
        fail(ErrorCode::InvalidRecord,
             "record '" + record.record_id + "' has non-positive sample rate");
    const std::size_t len = record.leads[0].size();
    for (LeadId lead : kAllLeads) {
        if (record.lead(lead).size() != len)
            fail(ErrorCode::InvalidRecord,
                 "record '" + record.record_id + "' lead " + lead_name(lead) +
                     " length differs from lead I");
    }
    if (static_cast<double>(len) < 2.0 * record.sample_rate_hz)
        fail(ErrorCode::InvalidRecord,
             "record '" + record.record_id + "' is shorter than 2 s");
}

}  // namespace bsw
