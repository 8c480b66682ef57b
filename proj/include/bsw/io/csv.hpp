#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bsw/error.hpp"
#include "bsw/io/atomic_write.hpp"
#include "bsw/lead.hpp"
#include "bsw/record.hpp"

namespace bsw {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
    while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
    return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

inline double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument("trailing garbage");
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::NonNumericCell, "row " + std::to_string(row) + ", column " +
                                            std::to_string(col) + ": '" + cell +
                                            "' is not a number");
    }
}

}  // namespace detail

// One header row naming the 12 leads (any order), then one row per sample,
// values in millivolts.
inline EcgRecord read_csv(const std::filesystem::path& path, double sample_rate_hz,
                          ClassLabel label = ClassLabel::Unknown) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line))
        fail(ErrorCode::MalformedHeader, "'" + path.string() + "' is empty");

    const std::vector<std::string> names = detail::split_csv_line(line);
    std::array<int, kLeadCount> column_of_lead;
    column_of_lead.fill(-1);
    for (std::size_t c = 0; c < names.size(); ++c) {
        const auto lead = try_parse_lead(names[c]);
        if (!lead)
            fail(ErrorCode::MalformedHeader,
                 "column '" + names[c] + "' is not a lead name");
        if (column_of_lead[lead_index(*lead)] != -1)
            fail(ErrorCode::DuplicateLead,
                 std::string("duplicate column for lead ") + lead_name(*lead));
        column_of_lead[lead_index(*lead)] = static_cast<int>(c);
    }
    for (LeadId lead : kAllLeads) {
        if (column_of_lead[lead_index(lead)] == -1)
            fail(ErrorCode::MissingLead,
                 std::string("missing column for lead ") + lead_name(lead));
    }

    EcgRecord record;
    record.record_id = path.stem().string();
    record.label = label;
    record.sample_rate_hz = sample_rate_hz;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != names.size())
            fail(ErrorCode::RaggedRow, "row " + std::to_string(row) + " has " +
                                           std::to_string(cells.size()) +
                                           " cells, expected " +
                                           std::to_string(names.size()));
        for (LeadId lead : kAllLeads) {
            const std::size_t c =
                static_cast<std::size_t>(column_of_lead[lead_index(lead)]);
            record.lead(lead).push_back(detail::parse_cell(cells[c], row, c));
        }
    }
    validate_record(record);
    return record;
}

// Canonical lead order, 12 significant digits (round-trips well under the
// 1e-9 mV contract).
inline void write_csv(const EcgRecord& record, const std::filesystem::path& path) {
    validate_record(record);
    std::string out;
    for (LeadId lead : kAllLeads) {
        if (lead != LeadId::I) out += ',';
        out += lead_name(lead);
    }
    out += '\n';
    char buf[64];
    for (std::size_t t = 0; t < record.duration_samples(); ++t) {
        for (LeadId lead : kAllLeads) {
            if (lead != LeadId::I) out += ',';
            std::snprintf(buf, sizeof buf, "%.12g", record.lead(lead)[t]);
            out += buf;
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

}  // namespace bsw
