#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bsw/error.hpp"
#include "bsw/io/csv.hpp"  // detail::trim
#include "bsw/lead.hpp"
#include "bsw/record.hpp"

namespace bsw {

namespace detail {

struct WfdbSignalSpec {
    std::string file_name;
    double gain = 0.0;      // ADC units per millivolt
    double baseline = 0.0;  // ADC value of 0 mV
    LeadId lead = LeadId::I;
};

inline double parse_leading_double(const std::string& token, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used == 0) throw std::invalid_argument("empty");
        return v;
    } catch (const std::exception&) {
        fail(ErrorCode::MalformedHeader,
             std::string(what) + ": '" + token + "' is not numeric");
    }
}

// "1000(0)/mV" -> gain 1000, baseline 0; both the "(baseline)" and "/units"
// parts are optional, in which case baseline falls back to adc_zero.
inline void parse_gain_spec(const std::string& token, double adc_zero, double& gain,
                            double& baseline) {
    std::string body = token;
    const std::size_t slash = body.find('/');
    if (slash != std::string::npos) body = body.substr(0, slash);
    const std::size_t open = body.find('(');
    if (open != std::string::npos) {
        const std::size_t close = body.find(')', open);
        if (close == std::string::npos)
            fail(ErrorCode::MalformedHeader, "unbalanced baseline in '" + token + "'");
        baseline = parse_leading_double(body.substr(open + 1, close - open - 1),
                                        "baseline");
        body = body.substr(0, open);
    } else {
        baseline = adc_zero;
    }
    gain = parse_leading_double(body, "gain");
    if (gain <= 0.0)
        fail(ErrorCode::MalformedHeader, "gain must be positive in '" + token + "'");
}

}  // namespace detail

// Reads the WFDB subset PTB-XL ships: a single-segment header whose signals
// all live in one companion file, stored as format 16 (little-endian 16-bit
// two's complement, sample-interleaved). Amplitude comes out in millivolts
// via (raw - baseline) / gain, leads reordered canonically. A `# label:`
// comment, when present, sets the class label.
inline EcgRecord read_wfdb(const std::filesystem::path& header_path) {
    std::ifstream in(header_path);
    if (!in)
        fail(ErrorCode::MissingCompanionFile,
             "cannot open header '" + header_path.string() + "'");

    std::string line;
    std::vector<std::string> signal_lines;
    std::string record_line;
    ClassLabel label = ClassLabel::Unknown;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::size_t pos = line.find("label:");
            if (pos != std::string::npos)
                label = parse_class_label(detail::trim(line.substr(pos + 6)));
            continue;
        }
        if (record_line.empty())
            record_line = line;
        else
            signal_lines.push_back(line);
    }
    if (record_line.empty())
        fail(ErrorCode::MalformedHeader, "'" + header_path.string() + "' has no record line");

    std::stringstream rec_ss(record_line);
    std::string record_name, n_sig_tok, rate_tok, n_samp_tok;
    rec_ss >> record_name >> n_sig_tok >> rate_tok >> n_samp_tok;
    if (record_name.empty() || n_sig_tok.empty())
        fail(ErrorCode::MalformedHeader, "record line '" + record_line + "'");
    // multi-segment records ("name/segments") are out of scope
    if (record_name.find('/') != std::string::npos)
        fail(ErrorCode::UnsupportedFormat, "multi-segment record '" + record_name + "'");
    const int n_signals =
        static_cast<int>(detail::parse_leading_double(n_sig_tok, "signal count"));
    if (n_signals != static_cast<int>(kLeadCount))
        fail(ErrorCode::LeadCountMismatch,
             "expected 12 leads, header declares " + std::to_string(n_signals));
    if (rate_tok.empty() || n_samp_tok.empty())
        fail(ErrorCode::MalformedHeader,
             "record line lacks sample rate or length: '" + record_line + "'");
    const double sample_rate = detail::parse_leading_double(rate_tok, "sample rate");
    const auto n_samples = static_cast<std::size_t>(
        detail::parse_leading_double(n_samp_tok, "sample count"));
    if (signal_lines.size() != kLeadCount)
        fail(ErrorCode::LeadCountMismatch,
             "header has " + std::to_string(signal_lines.size()) + " signal lines");

    std::vector<detail::WfdbSignalSpec> specs;
    specs.reserve(kLeadCount);
    std::array<bool, kLeadCount> seen{};
    for (const std::string& sig_line : signal_lines) {
        std::stringstream ss(sig_line);
        std::vector<std::string> tok;
        std::string t;
        while (ss >> t) tok.push_back(t);
        if (tok.size() < 9)
            fail(ErrorCode::MalformedHeader, "signal line '" + sig_line + "'");
        if (tok[1] != "16")
            fail(ErrorCode::UnsupportedFormat,
                 "signal format '" + tok[1] + "' (only format 16 is supported)");
        detail::WfdbSignalSpec spec;
        spec.file_name = tok[0];
        const double adc_zero = detail::parse_leading_double(tok[4], "ADC zero");
        detail::parse_gain_spec(tok[2], adc_zero, spec.gain, spec.baseline);
        std::string description = tok[8];
        for (std::size_t i = 9; i < tok.size(); ++i) description += " " + tok[i];
        const auto lead = try_parse_lead(description);
        if (!lead)
            fail(ErrorCode::MalformedHeader,
                 "signal description '" + description + "' is not a lead name");
        if (seen[lead_index(*lead)])
            fail(ErrorCode::DuplicateLead,
                 std::string("lead ") + lead_name(*lead) + " appears twice");
        seen[lead_index(*lead)] = true;
        spec.lead = *lead;
        specs.push_back(spec);
        if (spec.file_name != specs.front().file_name)
            fail(ErrorCode::UnsupportedFormat,
                 "signals split across files ('" + spec.file_name + "' vs '" +
                     specs.front().file_name + "')");
    }

    const std::filesystem::path dat_path =
        header_path.parent_path() / specs.front().file_name;
    std::ifstream dat(dat_path, std::ios::binary);
    if (!dat)
        fail(ErrorCode::MissingCompanionFile,
             "cannot open signal file '" + dat_path.string() + "'");
    std::vector<char> raw((std::istreambuf_iterator<char>(dat)),
                          std::istreambuf_iterator<char>());
    const std::size_t expected = n_samples * kLeadCount * 2;
    if (raw.size() < expected)
        fail(ErrorCode::IoError, "'" + dat_path.string() + "' holds " +
                                     std::to_string(raw.size()) + " bytes, expected " +
                                     std::to_string(expected));

    EcgRecord record;
    record.record_id = record_name;
    record.label = label;
    record.sample_rate_hz = sample_rate;
    for (LeadId lead : kAllLeads) record.lead(lead).resize(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t c = 0; c < kLeadCount; ++c) {
            const std::size_t off = 2 * (s * kLeadCount + c);
            const auto lo = static_cast<std::uint8_t>(raw[off]);
            const auto hi = static_cast<std::uint8_t>(raw[off + 1]);
            const auto value = static_cast<std::int16_t>(
                static_cast<std::uint16_t>(lo) |
                (static_cast<std::uint16_t>(hi) << 8));
            const detail::WfdbSignalSpec& spec = specs[c];
            record.lead(spec.lead)[s] =
                (static_cast<double>(value) - spec.baseline) / spec.gain;
        }
    }
    validate_record(record);
    return record;
}

}  // namespace bsw
