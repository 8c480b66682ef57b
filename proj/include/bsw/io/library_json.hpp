#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsw/beats.hpp"
#include "bsw/error.hpp"
#include "bsw/io/atomic_write.hpp"
#include "bsw/lead.hpp"
#include "bsw/prototype.hpp"
#include "bsw/record.hpp"

namespace bsw {

inline constexpr int kLibraryFormatVersion = 1;

namespace detail {

inline nlohmann::json prototype_to_json(const Prototype& proto) {
    if (proto.occurrence < 1)
        fail(ErrorCode::InvalidOccurrence, "prototype occurrence must be positive");
    if (proto.samples.size() != kBeatLength)
        fail(ErrorCode::BeatLengthMismatch,
             "prototype has " + std::to_string(proto.samples.size()) +
                 " samples, expected " + std::to_string(kBeatLength));
    nlohmann::json j;
    j["occurrence"] = proto.occurrence;
    j["lineage"] = proto.lineage;
    j["samples"] = proto.samples;
    return j;
}

inline Prototype prototype_from_json(const nlohmann::json& j, std::size_t beat_length) {
    if (!j.is_object() || !j.contains("occurrence") || !j.contains("samples"))
        fail(ErrorCode::MalformedLibrary, "prototype entry lacks occurrence/samples");
    Prototype proto;
    if (!j["occurrence"].is_number_integer() ||
        j["occurrence"].get<long long>() <= 0)
        fail(ErrorCode::InvalidOccurrence,
             "occurrence " + j["occurrence"].dump() + " is not a positive integer");
    proto.occurrence = j["occurrence"].get<std::size_t>();
    if (!j["samples"].is_array() || j["samples"].size() != beat_length)
        fail(ErrorCode::BeatLengthMismatch,
             "prototype has " + std::to_string(j["samples"].size()) +
                 " samples, expected " + std::to_string(beat_length));
    proto.samples = j["samples"].get<Beat>();
    if (j.contains("lineage"))
        proto.lineage = j["lineage"].get<std::vector<std::string>>();
    return proto;
}

}  // namespace detail

// Schema: top-level object with format_version, beat_length, and
// libraries[class][lead] = list of prototypes (descending occurrence).
inline void save_library(const PrototypeLibrarySet& set,
                         const std::filesystem::path& path) {
    nlohmann::json root;
    root["format_version"] = kLibraryFormatVersion;
    root["beat_length"] = kBeatLength;
    nlohmann::json classes = nlohmann::json::object();
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH}) {
        nlohmann::json per_lead = nlohmann::json::object();
        for (LeadId lead : kAllLeads) {
            nlohmann::json protos = nlohmann::json::array();
            for (const Prototype& p : set.at(label, lead))
                protos.push_back(detail::prototype_to_json(p));
            per_lead[lead_name(lead)] = std::move(protos);
        }
        classes[class_name(label)] = std::move(per_lead);
    }
    root["libraries"] = std::move(classes);
    write_file_atomic(path, root.dump(1) + "\n");
}

inline PrototypeLibrarySet load_library(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedLibrary,
             "'" + path.string() + "' is not valid JSON: " + e.what());
    }
    if (!root.is_object() || !root.contains("format_version"))
        fail(ErrorCode::MalformedLibrary, "'" + path.string() + "' lacks format_version");
    if (!root["format_version"].is_number_integer() ||
        root["format_version"].get<int>() != kLibraryFormatVersion)
        fail(ErrorCode::VersionMismatch,
             "library format " + root["format_version"].dump() + ", expected " +
                 std::to_string(kLibraryFormatVersion));
    if (!root.contains("beat_length") || !root["beat_length"].is_number_integer())
        fail(ErrorCode::MalformedLibrary, "missing beat_length");
    const auto beat_length = root["beat_length"].get<std::size_t>();
    if (beat_length != kBeatLength)
        fail(ErrorCode::BeatLengthMismatch,
             "library beat length " + std::to_string(beat_length) + ", expected " +
                 std::to_string(kBeatLength));
    if (!root.contains("libraries") || !root["libraries"].is_object())
        fail(ErrorCode::MalformedLibrary, "missing libraries object");

    PrototypeLibrarySet set;
    for (const auto& [class_key, per_lead] : root["libraries"].items()) {
        ClassLabel label = ClassLabel::Unknown;
        try {
            label = parse_class_label(class_key);
        } catch (const Error&) {
            fail(ErrorCode::MalformedLibrary, "unknown class key '" + class_key + "'");
        }
        if (label == ClassLabel::Unknown)
            fail(ErrorCode::MalformedLibrary, "unknown class key '" + class_key + "'");
        if (!per_lead.is_object())
            fail(ErrorCode::MalformedLibrary, "class '" + class_key + "' is not an object");
        for (const auto& [lead_key, protos] : per_lead.items()) {
            const auto lead = try_parse_lead(lead_key);
            if (!lead)
                fail(ErrorCode::MalformedLibrary, "unknown lead key '" + lead_key + "'");
            if (!protos.is_array())
                fail(ErrorCode::MalformedLibrary,
                     "lead '" + lead_key + "' is not an array");
            auto& target = set.at(label, *lead);
            for (const auto& j : protos)
                target.push_back(detail::prototype_from_json(j, beat_length));
        }
    }
    return set;
}

}  // namespace bsw
