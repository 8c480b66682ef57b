#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "bsw/error.hpp"

namespace bsw {

// The 12 standard leads in canonical order. Everything downstream indexes
// leads by this order, regardless of how an input file arranged them.
enum class LeadId : int {
    I = 0,
    II,
    III,
    aVR,
    aVL,
    aVF,
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
};

inline constexpr std::size_t kLeadCount = 12;

inline constexpr std::array<LeadId, kLeadCount> kAllLeads = {
    LeadId::I,   LeadId::II,  LeadId::III, LeadId::aVR,
    LeadId::aVL, LeadId::aVF, LeadId::V1,  LeadId::V2,
    LeadId::V3,  LeadId::V4,  LeadId::V5,  LeadId::V6,
};

inline const char* lead_name(LeadId lead) {
    static constexpr std::array<const char*, kLeadCount> names = {
        "I", "II", "III", "aVR", "aVL", "aVF",
        "V1", "V2", "V3", "V4", "V5", "V6",
    };
    return names[static_cast<std::size_t>(lead)];
}

inline std::size_t lead_index(LeadId lead) {
    return static_cast<std::size_t>(lead);
}

// Case-insensitive lookup; WFDB headers spell augmented leads AVR/AVL/AVF.
inline std::optional<LeadId> try_parse_lead(std::string_view name) {
    auto eq = [](std::string_view a, std::string_view b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            char ca = a[i], cb = b[i];
            if (ca >= 'a' && ca <= 'z') ca = static_cast<char>(ca - 'a' + 'A');
            if (cb >= 'a' && cb <= 'z') cb = static_cast<char>(cb - 'a' + 'A');
            if (ca != cb) return false;
        }
        return true;
    };
    for (LeadId lead : kAllLeads) {
        if (eq(name, lead_name(lead))) return lead;
    }
    return std::nullopt;
}

inline LeadId parse_lead(std::string_view name) {
    if (auto lead = try_parse_lead(name)) return *lead;
    fail(ErrorCode::MalformedHeader, "unknown lead name '" + std::string(name) + "'");
}

}  // namespace bsw
