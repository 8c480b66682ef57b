#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "bsw/beats.hpp"
#include "bsw/config.hpp"
#include "bsw/diagnosis.hpp"
#include "bsw/error.hpp"
#include "bsw/filter.hpp"
#include "bsw/io/atomic_write.hpp"
#include "bsw/io/csv.hpp"
#include "bsw/io/library_json.hpp"
#include "bsw/io/svg.hpp"
#include "bsw/io/wfdb.hpp"
#include "bsw/prototype.hpp"
#include "bsw/rpeaks.hpp"
#include "bsw/screening.hpp"

namespace bsw {

namespace fs = std::filesystem;

inline constexpr int kBundleFormatVersion = 1;

// ---------------------------------------------------------------------------
// Mean-beat bundle: the per-record artifact the preprocess stage hands to
// everything downstream. One file per record, twelve mean beats plus label.

struct MeanBeatBundle {
    std::string record_id;
    ClassLabel label = ClassLabel::Unknown;
    double sample_rate_hz = 0.0;
    std::array<MeanBeat, kLeadCount> leads;

    RecordMeanBeats to_record() const {
        RecordMeanBeats rec;
        rec.record_id = record_id;
        rec.label = label;
        for (LeadId lead : kAllLeads)
            rec.leads[lead_index(lead)] = leads[lead_index(lead)].samples;
        return rec;
    }
};

inline void save_bundle(const MeanBeatBundle& bundle, const std::string& path) {
    nlohmann::json leads = nlohmann::json::object();
    for (LeadId lead : kAllLeads) {
        const MeanBeat& mb = bundle.leads[lead_index(lead)];
        if (mb.samples.size() != kBeatLength)
            fail(ErrorCode::BeatLengthMismatch,
                 "bundle lead " + std::string(lead_name(lead)) + " has " +
                     std::to_string(mb.samples.size()) + " samples, expected " +
                     std::to_string(kBeatLength));
        leads[lead_name(lead)] = {{"n_beats_averaged", mb.n_beats_averaged},
                                  {"samples", mb.samples}};
    }
    const nlohmann::json root = {{"format_version", kBundleFormatVersion},
                                 {"record_id", bundle.record_id},
                                 {"label", class_name(bundle.label)},
                                 {"sample_rate_hz", bundle.sample_rate_hz},
                                 {"beat_length", kBeatLength},
                                 {"leads", leads}};
    write_file_atomic(path, root.dump(1) + "\n");
}

inline MeanBeatBundle load_bundle(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open bundle " + path);
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedBundle, path + ": " + e.what());
    }
    const auto need = [&](const char* key) -> const nlohmann::json& {
        if (!root.is_object() || !root.contains(key))
            fail(ErrorCode::MalformedBundle, path + ": missing key '" + key + "'");
        return root.at(key);
    };
    if (need("format_version") != kBundleFormatVersion)
        fail(ErrorCode::VersionMismatch,
             path + ": unsupported bundle format version " + need("format_version").dump());
    if (need("beat_length") != kBeatLength)
        fail(ErrorCode::BeatLengthMismatch,
             path + ": beat length " + need("beat_length").dump() + ", expected " +
                 std::to_string(kBeatLength));

    MeanBeatBundle bundle;
    try {
        bundle.record_id = need("record_id").get<std::string>();
        bundle.label = parse_class_label(need("label").get<std::string>());
        bundle.sample_rate_hz = need("sample_rate_hz").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedBundle, path + ": " + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::MalformedBundle, path + ": " + e.what());
    }

    const nlohmann::json& leads = need("leads");
    if (!leads.is_object())
        fail(ErrorCode::MalformedBundle, path + ": 'leads' is not an object");
    for (const auto& [key, value] : leads.items())
        if (!try_parse_lead(key))
            fail(ErrorCode::MalformedBundle, path + ": unknown lead '" + key + "'");
    for (LeadId lead : kAllLeads) {
        if (!leads.contains(lead_name(lead)))
            fail(ErrorCode::MissingLead,
                 path + ": bundle lacks lead " + lead_name(lead));
        const nlohmann::json& entry = leads.at(lead_name(lead));
        MeanBeat& mb = bundle.leads[lead_index(lead)];
        mb.record_id = bundle.record_id;
        mb.lead = lead;
        try {
            mb.n_beats_averaged = entry.at("n_beats_averaged").get<std::size_t>();
            mb.samples = entry.at("samples").get<Beat>();
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::MalformedBundle, path + ": " + e.what());
        }
        if (mb.n_beats_averaged < 1)
            fail(ErrorCode::MalformedBundle,
                 path + ": lead " + lead_name(lead) + " has no averaged beats");
        if (mb.samples.size() != kBeatLength)
            fail(ErrorCode::BeatLengthMismatch,
                 path + ": lead " + std::string(lead_name(lead)) + " has " +
                     std::to_string(mb.samples.size()) + " samples, expected " +
                     std::to_string(kBeatLength));
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// Record preprocessing: baseline filter, composite-lead R detection, beat
// segmentation, mean beats. The beat sets stay available for screening.

struct PreprocessedRecord {
    MeanBeatBundle bundle;
    std::array<BeatSet, kLeadCount> beats;
    std::vector<std::size_t> r_peaks;
};

inline PreprocessedRecord preprocess_record(const EcgRecord& record,
                                            const PipelineConfig& cfg = {}) {
    validate_record(record);
    EcgRecord filtered = record;
    for (LeadId lead : kAllLeads)
        filtered.lead(lead) =
            highpass_baseline(record.lead(lead), record.sample_rate_hz,
                              cfg.highpass_cutoff_hz, cfg.highpass_order);
    const Signal composite = composite_lead(filtered);

    PreprocessedRecord out;
    out.r_peaks = detect_r_peaks(composite, record.sample_rate_hz, cfg.rpeaks);
    out.bundle.record_id = record.record_id;
    out.bundle.label = record.label;
    out.bundle.sample_rate_hz = record.sample_rate_hz;
    for (LeadId lead : kAllLeads) {
        const std::size_t i = lead_index(lead);
        out.beats[i] = segment_beats(filtered.lead(lead), out.r_peaks, lead);
        out.bundle.leads[i] = mean_beat(out.beats[i], record.record_id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Batch plumbing.

inline EcgRecord read_record_any(const fs::path& path, const PipelineConfig& cfg) {
    const std::string ext = path.extension().string();
    if (ext == ".hea") return read_wfdb(path.string());
    if (ext == ".csv") return read_csv(path.string(), cfg.sample_rate_hz);
    fail(ErrorCode::UnsupportedFormat, "no reader for '" + path.string() + "'");
}

// Recursively lists record entry points (.hea headers and .csv files), one
// per record id, sorted by id. When both formats share a stem the header
// wins; remaining ties resolve to the lexicographically smaller path.
inline std::vector<fs::path> find_record_files(const fs::path& dir) {
    if (!fs::is_directory(dir))
        fail(ErrorCode::IoError, "not a readable directory: " + dir.string());
    std::map<std::string, fs::path> by_id;
    try {
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const fs::path& p = entry.path();
            const std::string ext = p.extension().string();
            if (ext != ".hea" && ext != ".csv") continue;
            const std::string id = p.stem().string();
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                by_id.emplace(id, p);
                continue;
            }
            const bool old_hea = it->second.extension() == ".hea";
            const bool new_hea = ext == ".hea";
            if ((new_hea && !old_hea) ||
                (new_hea == old_hea && p.string() < it->second.string()))
                it->second = p;
        }
    } catch (const fs::filesystem_error& e) {
        fail(ErrorCode::IoError, std::string("cannot scan directory: ") + e.what());
    }
    std::vector<fs::path> out;
    out.reserve(by_id.size());
    for (const auto& [id, p] : by_id) out.push_back(p);
    return out;
}

inline std::vector<fs::path> find_files_with_suffix(const fs::path& dir,
                                                    const std::string& suffix) {
    if (!fs::is_directory(dir))
        fail(ErrorCode::IoError, "not a readable directory: " + dir.string());
    std::vector<fs::path> out;
    try {
        for (const auto& entry : fs::recursive_directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.size() > suffix.size() &&
                name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
                out.push_back(entry.path());
        }
    } catch (const fs::filesystem_error& e) {
        fail(ErrorCode::IoError, std::string("cannot scan directory: ") + e.what());
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

// Runs fn(0..n-1) across a bounded pool. fn must not throw; callers buffer
// per-index results and emit them in order afterwards so logs and files stay
// deterministic regardless of scheduling.
template <typename Fn>
inline void run_indexed(std::size_t n, int workers, Fn&& fn) {
    const std::size_t pool_size =
        std::min<std::size_t>(n, workers < 1 ? 1 : static_cast<std::size_t>(workers));
    if (pool_size <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (std::size_t t = 0; t < pool_size; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
        });
    for (auto& th : pool) th.join();
}

struct StageOutcome {
    std::string line;
    bool ok = false;
};

// Wraps one record worth of stage work in the batch-failure policy: the
// outcome line reports either success detail or the error code + message.
template <typename Fn>
inline StageOutcome guarded(const std::string& stage, const std::string& id, Fn&& fn) {
    std::ostringstream line;
    line << stage << " record=" << id;
    StageOutcome out;
    try {
        fn(line);
        out.ok = true;
    } catch (const Error& e) {
        line << " status=error code=" << error_code_name(e.code()) << " msg=\""
             << e.what() << "\"";
    } catch (const std::exception& e) {
        line << " status=error code=Internal msg=\"" << e.what() << "\"";
    }
    out.line = line.str();
    return out;
}

inline std::size_t emit_outcomes(const std::vector<StageOutcome>& outcomes,
                                 std::ostream& log) {
    std::size_t ok = 0;
    for (const StageOutcome& o : outcomes) {
        log << o.line << '\n';
        ok += o.ok ? 1 : 0;
    }
    return ok;
}

inline std::string fmt_double(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

// "00017.beats" -> "00017": drop the artifact part of a two-dot stem.
inline std::string record_stem(const fs::path& p, const std::string& artifact) {
    std::string stem = p.stem().string();
    if (stem.size() > artifact.size() &&
        stem.compare(stem.size() - artifact.size(), artifact.size(), artifact) == 0)
        stem.resize(stem.size() - artifact.size());
    return stem;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stages. Each returns a process exit code: 0 on success (individual record
// failures are logged and skipped), 2 when the input holds no records at
// all. Unrecoverable conditions throw and the CLI maps them to exit 1.

inline int cmd_preprocess(const fs::path& input_dir, const fs::path& output_dir,
                          const PipelineConfig& cfg, std::ostream& log) {
    validate_config(cfg);
    const auto files = find_record_files(input_dir);
    if (files.empty()) {
        log << "no records found\n";
        return 2;
    }
    fs::create_directories(output_dir);
    std::vector<detail::StageOutcome> outcomes(files.size());
    detail::run_indexed(files.size(), cfg.workers, [&](std::size_t i) {
        outcomes[i] = detail::guarded(
            "preprocess", files[i].stem().string(), [&](std::ostream& line) {
                const EcgRecord record = read_record_any(files[i], cfg);
                const PreprocessedRecord pre = preprocess_record(record, cfg);
                const fs::path out = output_dir / (pre.bundle.record_id + ".beats.json");
                save_bundle(pre.bundle, out.string());
                line << " status=ok label=" << class_name(pre.bundle.label)
                     << " r_peaks=" << pre.r_peaks.size()
                     << " beats=" << pre.bundle.leads[0].n_beats_averaged
                     << " out=" << out.filename().string();
            });
    });
    const std::size_t ok = detail::emit_outcomes(outcomes, log);
    log << "preprocess done records=" << files.size() << " ok=" << ok
        << " failed=" << files.size() - ok << '\n';
    return 0;
}

inline int cmd_screen(const fs::path& input_dir, const fs::path& output_dir,
                      const PipelineConfig& cfg, std::ostream& log) {
    validate_config(cfg);
    const auto files = find_record_files(input_dir);
    if (files.empty()) {
        log << "no records found\n";
        return 2;
    }
    fs::create_directories(output_dir);
    struct Slot {
        detail::StageOutcome outcome;
        nlohmann::json row;
        bool has_row = false;
    };
    std::vector<Slot> slots(files.size());
    detail::run_indexed(files.size(), cfg.workers, [&](std::size_t i) {
        slots[i].outcome = detail::guarded(
            "screen", files[i].stem().string(), [&](std::ostream& line) {
                const EcgRecord record = read_record_any(files[i], cfg);
                const PreprocessedRecord pre = preprocess_record(record, cfg);
                const VariabilityReport report = screen_record(
                    pre.bundle.record_id, pre.beats, cfg.screening_threshold);
                nlohmann::json per_lead = nlohmann::json::object();
                for (LeadId lead : kAllLeads)
                    per_lead[lead_name(lead)] = report.per_lead_vh[lead_index(lead)];
                slots[i].row = {{"record_id", report.record_id},
                                {"eligible", report.eligible},
                                {"max_vh", report.max_vh},
                                {"per_lead_vh", per_lead},
                                {"reason", report.reason}};
                slots[i].has_row = true;
                line << " status=ok eligible=" << (report.eligible ? "true" : "false")
                     << " max_vh=" << detail::fmt_double(report.max_vh);
                if (!report.eligible) line << " reason=\"" << report.reason << "\"";
            });
    });
    nlohmann::json rows = nlohmann::json::array();
    std::size_t ok = 0, eligible = 0;
    for (const Slot& s : slots) {
        log << s.outcome.line << '\n';
        ok += s.outcome.ok ? 1 : 0;
        if (s.has_row) {
            eligible += s.row.at("eligible").get<bool>() ? 1 : 0;
            rows.push_back(s.row);
        }
    }
    const nlohmann::json root = {{"format_version", 1},
                                 {"threshold", cfg.screening_threshold},
                                 {"records", rows}};
    const fs::path out = output_dir / "screening.json";
    write_file_atomic(out.string(), root.dump(1) + "\n");
    log << "screen done records=" << files.size() << " ok=" << ok
        << " failed=" << files.size() - ok << " eligible=" << eligible
        << " out=" << out.string() << '\n';
    return 0;
}

// Reads a screening report and returns the set of ineligible record ids.
inline std::map<std::string, bool> load_screening_flags(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open screening report " + path.string());
    nlohmann::json root;
    try {
        in >> root;
        std::map<std::string, bool> flags;
        for (const auto& row : root.at("records"))
            flags[row.at("record_id").get<std::string>()] = row.at("eligible").get<bool>();
        return flags;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::MalformedBundle, path.string() + ": " + e.what());
    }
}

inline int cmd_build(const fs::path& bundle_dir, const fs::path& output_dir,
                     const PipelineConfig& cfg, std::ostream& log,
                     const fs::path& screening_report = {}) {
    validate_config(cfg);
    const auto files = find_files_with_suffix(bundle_dir, ".beats.json");
    if (files.empty()) {
        log << "no records found\n";
        return 2;
    }
    std::map<std::string, bool> eligible;
    const bool have_screening = !screening_report.empty();
    if (have_screening) eligible = load_screening_flags(screening_report);

    struct Candidate {
        MeanBeatBundle bundle;
        std::string status;  // empty while still in the running
    };
    std::vector<Candidate> pool;
    std::vector<detail::StageOutcome> load_failures;
    for (const fs::path& p : files) {
        Candidate c;
        const auto outcome = detail::guarded(
            "build", detail::record_stem(p, ".beats"), [&](std::ostream& line) {
                c.bundle = load_bundle(p.string());
                line << " status=ok";  // placeholder, rewritten below
            });
        if (!outcome.ok) {
            load_failures.push_back(outcome);
            continue;
        }
        if (c.bundle.label == ClassLabel::Unknown)
            c.status = "skipped=unlabeled";
        else if (have_screening) {
            const auto it = eligible.find(c.bundle.record_id);
            if (it != eligible.end() && !it->second) c.status = "skipped=ineligible";
        }
        pool.push_back(std::move(c));
    }
    for (const auto& o : load_failures) log << o.line << '\n';

    // Class balancing: every record of the sparse class, a seeded subsample
    // of the plentiful normal pool.
    std::vector<std::size_t> normals, lvh;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (!pool[i].status.empty()) continue;
        (pool[i].bundle.label == ClassLabel::Normal ? normals : lvh).push_back(i);
    }
    if (normals.size() > cfg.normal_subsample) {
        std::mt19937_64 rng(cfg.rng_seed);
        std::vector<std::size_t> order(normals.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng() % i]);
        for (std::size_t k = cfg.normal_subsample; k < order.size(); ++k)
            pool[normals[order[k]]].status = "skipped=subsample";
    }

    std::vector<RecordMeanBeats> records;
    std::size_t kept_normal = 0, kept_lvh = 0;
    for (const Candidate& c : pool) {
        std::ostringstream line;
        line << "build record=" << c.bundle.record_id
             << " label=" << class_name(c.bundle.label);
        if (!c.status.empty()) {
            log << line.str() << ' ' << c.status << '\n';
            continue;
        }
        log << line.str() << " selected=true\n";
        records.push_back(c.bundle.to_record());
        (c.bundle.label == ClassLabel::Normal ? kept_normal : kept_lvh) += 1;
    }
    log << "build candidates normal=" << kept_normal << " lvh=" << kept_lvh
        << " seed=" << cfg.rng_seed << '\n';
    if (kept_normal == 0 || kept_lvh == 0)
        fail(ErrorCode::EmptyInput, "library build needs candidates of both classes");

    const PrototypeLibrarySet set =
        build_all_libraries(records, cfg.warp, cfg.prototype);
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH})
        for (LeadId lead : kAllLeads) {
            const auto& protos = set.at(label, lead);
            std::size_t top = 0;
            for (const Prototype& p : protos) top = std::max(top, p.occurrence);
            log << "build class=" << class_name(label) << " lead=" << lead_name(lead)
                << " prototypes=" << protos.size() << " top_occurrence=" << top << '\n';
        }
    fs::create_directories(output_dir);
    const fs::path out = output_dir / "library.json";
    save_library(set, out.string());
    log << "build done out=" << out.string() << '\n';
    return 0;
}

namespace detail {

inline nlohmann::json report_to_json(const DiagnosisReport& report, ClassLabel truth) {
    const auto side = [](const LeadClassDistances& c) -> nlohmann::json {
        return {{"distance", c.two_smallest_sum},
                {"nearest_prototype", c.nearest},
                {"nearest_occurrence", c.nearest_occurrence}};
    };
    nlohmann::json per_lead = nlohmann::json::object();
    for (LeadId lead : kAllLeads) {
        const LeadDiagnosis& d = report.per_lead[lead_index(lead)];
        if (!d.computed) continue;
        per_lead[lead_name(lead)] = {{"normal", side(d.normal)},
                                     {"lvh", side(d.lvh)}};
    }
    return {{"format_version", 1},
            {"record_id", report.record_id},
            {"label", class_name(truth)},
            {"bsw",
             {{"decision", class_name(report.bsw_decision)},
              {"total_normal", report.total_normal},
              {"total_lvh", report.total_lvh},
              {"per_lead", per_lead}}},
            {"sokolow_lyon",
             {{"s_v1", report.sokolow.s_v1},
              {"r_v5", report.sokolow.r_v5},
              {"r_v6", report.sokolow.r_v6},
              {"index", report.sokolow.index},
              {"decision", class_name(report.sokolow.decision)}}},
            {"modified_cornell",
             {{"r_avl", report.cornell.r_avl},
              {"decision", class_name(report.cornell.decision)}}}};
}

}  // namespace detail

inline int cmd_diagnose(const fs::path& bundle_dir, const fs::path& library_path,
                        const fs::path& output_dir, const PipelineConfig& cfg,
                        std::ostream& log) {
    validate_config(cfg);
    const PrototypeLibrarySet library = load_library(library_path.string());
    const auto files = find_files_with_suffix(bundle_dir, ".beats.json");
    if (files.empty()) {
        log << "no records found\n";
        return 2;
    }
    fs::create_directories(output_dir);
    std::vector<detail::StageOutcome> outcomes(files.size());
    detail::run_indexed(files.size(), cfg.workers, [&](std::size_t i) {
        outcomes[i] = detail::guarded(
            "diagnose", detail::record_stem(files[i], ".beats"),
            [&](std::ostream& line) {
                const MeanBeatBundle bundle = load_bundle(files[i].string());
                const DiagnosisReport report = diagnose_record(
                    bundle.to_record(), library, cfg.warp, cfg.diagnosis);
                const fs::path out =
                    output_dir / (report.record_id + ".report.json");
                write_file_atomic(
                    out.string(),
                    detail::report_to_json(report, bundle.label).dump(1) + "\n");
                line << " status=ok bsw=" << class_name(report.bsw_decision)
                     << " total_normal=" << detail::fmt_double(report.total_normal)
                     << " total_lvh=" << detail::fmt_double(report.total_lvh)
                     << " sokolow=" << class_name(report.sokolow.decision)
                     << " cornell=" << class_name(report.cornell.decision)
                     << " out=" << out.filename().string();
            });
    });
    const std::size_t ok = detail::emit_outcomes(outcomes, log);
    log << "diagnose done records=" << files.size() << " ok=" << ok
        << " failed=" << files.size() - ok << '\n';
    return 0;
}

inline int cmd_evaluate(const fs::path& report_dir, const fs::path& output_dir,
                        const PipelineConfig& cfg, std::ostream& log) {
    validate_config(cfg);
    const auto files = find_files_with_suffix(report_dir, ".report.json");
    if (files.empty()) {
        log << "no records found\n";
        return 2;
    }
    std::vector<DiagnosisReport> reports;
    std::vector<ClassLabel> truth;
    for (const fs::path& p : files) {
        const auto outcome = detail::guarded(
            "evaluate", detail::record_stem(p, ".report"), [&](std::ostream& line) {
                std::ifstream in(p, std::ios::binary);
                if (!in) fail(ErrorCode::IoError, "cannot open report " + p.string());
                nlohmann::json root;
                try {
                    in >> root;
                    const ClassLabel label =
                        parse_class_label(root.at("label").get<std::string>());
                    if (label == ClassLabel::Unknown) {
                        line << " skipped=unlabeled";
                        return;
                    }
                    DiagnosisReport report;
                    report.record_id = root.at("record_id").get<std::string>();
                    report.bsw_decision = parse_class_label(
                        root.at("bsw").at("decision").get<std::string>());
                    report.sokolow.decision = parse_class_label(
                        root.at("sokolow_lyon").at("decision").get<std::string>());
                    report.cornell.decision = parse_class_label(
                        root.at("modified_cornell").at("decision").get<std::string>());
                    reports.push_back(report);
                    truth.push_back(label);
                    line << " status=ok truth=" << class_name(label)
                         << " bsw=" << class_name(report.bsw_decision)
                         << " sokolow=" << class_name(report.sokolow.decision)
                         << " cornell=" << class_name(report.cornell.decision);
                } catch (const nlohmann::json::exception& e) {
                    fail(ErrorCode::MalformedBundle, p.string() + ": " + e.what());
                }
            });
        log << outcome.line << '\n';
    }
    if (reports.empty())
        fail(ErrorCode::EmptyInput, "no labeled reports to evaluate");
    const EvaluationSummary summary = evaluate(reports, truth);

    const auto matrix_json = [](const ConfusionMatrix& m) -> nlohmann::json {
        return {{"tp", m.tp},       {"fp", m.fp},
                {"tn", m.tn},       {"fn", m.fn},
                {"sensitivity", m.sensitivity()},
                {"specificity", m.specificity()}};
    };
    const nlohmann::json root = {{"format_version", 1},
                                 {"n_records", reports.size()},
                                 {"methods",
                                  {{"bsw", matrix_json(summary.bsw)},
                                   {"sokolow_lyon", matrix_json(summary.sokolow)},
                                   {"modified_cornell", matrix_json(summary.cornell)}}}};
    fs::create_directories(output_dir);
    const fs::path out = output_dir / "evaluation.json";
    write_file_atomic(out.string(), root.dump(1) + "\n");
    const fs::path svg = output_dir / "confusion.svg";
    emit_svg_confusion({{"BSW", summary.bsw},
                        {"Sokolow-Lyon", summary.sokolow},
                        {"Modified Cornell", summary.cornell}},
                       svg.string());
    for (const auto& [name, m] :
         std::vector<std::pair<std::string, const ConfusionMatrix*>>{
             {"bsw", &summary.bsw},
             {"sokolow_lyon", &summary.sokolow},
             {"modified_cornell", &summary.cornell}}) {
        log << "evaluate method=" << name << " tp=" << m->tp << " fp=" << m->fp
            << " tn=" << m->tn << " fn=" << m->fn
            << " sensitivity=" << detail::fmt_double(m->sensitivity())
            << " specificity=" << detail::fmt_double(m->specificity()) << '\n';
    }
    log << "evaluate done records=" << reports.size() << " out=" << out.string()
        << '\n';
    return 0;
}

inline int cmd_plot(const fs::path& library_path, const fs::path& output_dir,
                    const PipelineConfig& cfg, std::ostream& log) {
    validate_config(cfg);
    const PrototypeLibrarySet set = load_library(library_path.string());
    fs::create_directories(output_dir);
    std::size_t written = 0;
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH})
        for (LeadId lead : kAllLeads) {
            const auto& protos = set.at(label, lead);
            if (protos.empty()) {
                log << "plot class=" << class_name(label)
                    << " lead=" << lead_name(lead) << " skipped=empty\n";
                continue;
            }
            std::vector<SvgCurve> curves;
            curves.reserve(protos.size());
            for (std::size_t k = 0; k < protos.size(); ++k)
                curves.push_back({"P" + std::to_string(k + 1) + " (n=" +
                                      std::to_string(protos[k].occurrence) + ")",
                                  protos[k].samples,
                                  static_cast<double>(protos[k].occurrence)});
            const fs::path out =
                output_dir / ("library_" + std::string(class_name(label)) + "_" +
                              lead_name(lead) + ".svg");
            emit_svg_comparison(curves, {}, out.string(),
                                std::string(class_name(label)) + " " +
                                    lead_name(lead) + " prototypes");
            log << "plot class=" << class_name(label) << " lead=" << lead_name(lead)
                << " prototypes=" << protos.size()
                << " out=" << out.filename().string() << '\n';
            ++written;
        }
    log << "plot done files=" << written << '\n';
    return 0;
}

}  // namespace bsw
