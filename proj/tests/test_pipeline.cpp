#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include "bsw/pipeline.hpp"
#include "support.hpp"

using namespace bsw;
using testsup::TempDir;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a bsw::Error");
    return ErrorCode::IoError;  // unreachable
}

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::fstream out(p, std::ios::out | std::ios::binary | std::ios::trunc);
    out << text;
}

// One dataset, all stages run once; every test case reads off this fixture.
struct PipelineFixture {
    TempDir raw{"pl_raw"};
    TempDir bundles{"pl_bundles"};
    TempDir screen_out{"pl_screen"};
    TempDir lib_out{"pl_lib"};
    TempDir report_out{"pl_reports"};
    TempDir eval_out{"pl_eval"};
    TempDir plot_out{"pl_plot"};
    PipelineConfig cfg;

    std::string preprocess_log, screen_log, build_log, diagnose_log, evaluate_log,
        plot_log;
    int preprocess_rc = -1, screen_rc = -1, build_rc = -1, diagnose_rc = -1,
        evaluate_rc = -1, plot_rc = -1;
    std::filesystem::path screening_override;

    PipelineFixture() {
        for (unsigned i = 0; i < 3; ++i)
            testsup::write_wfdb_pair(
                raw.path, testsup::synth_record("n" + std::to_string(i),
                                                ClassLabel::Normal, 11 + i));
        for (unsigned i = 0; i < 2; ++i)
            testsup::write_wfdb_pair(
                raw.path, testsup::synth_record("l" + std::to_string(i),
                                                ClassLabel::LVH, 21 + i));
        testsup::write_wfdb_pair(
            raw.path, testsup::synth_record("u0", ClassLabel::Unknown, 31));
        // header that declares one lead: read_wfdb must reject it
        write_text(raw.path / "broken.hea", "broken 1 500 6000\n");

        auto run = [](auto&& fn, std::string& log_text) {
            std::ostringstream log;
            const int rc = fn(log);
            log_text = log.str();
            return rc;
        };
        preprocess_rc = run(
            [&](std::ostream& log) {
                return cmd_preprocess(raw.path, bundles.path, cfg, log);
            },
            preprocess_log);
        screen_rc = run(
            [&](std::ostream& log) {
                return cmd_screen(raw.path, screen_out.path, cfg, log);
            },
            screen_log);

        // hand-written screening verdicts: n2 ruled out, the rest kept
        screening_override = screen_out.path / "override.json";
        nlohmann::json rows = nlohmann::json::array();
        for (const std::string& id : {"n0", "n1", "n2", "l0", "l1", "u0"})
            rows.push_back({{"record_id", id},
                            {"eligible", id != "n2"},
                            {"max_vh", 0.1},
                            {"reason", id != "n2" ? "" : "lead V1 variability"}});
        write_text(screening_override,
                   nlohmann::json{{"format_version", 1},
                                  {"threshold", cfg.screening_threshold},
                                  {"records", rows}}
                       .dump());

        build_rc = run(
            [&](std::ostream& log) {
                return cmd_build(bundles.path, lib_out.path, cfg, log,
                                 screening_override);
            },
            build_log);
        diagnose_rc = run(
            [&](std::ostream& log) {
                return cmd_diagnose(bundles.path, lib_out.path / "library.json",
                                    report_out.path, cfg, log);
            },
            diagnose_log);
        evaluate_rc = run(
            [&](std::ostream& log) {
                return cmd_evaluate(report_out.path, eval_out.path, cfg, log);
            },
            evaluate_log);
        plot_rc = run(
            [&](std::ostream& log) {
                return cmd_plot(lib_out.path / "library.json", plot_out.path, cfg,
                                log);
            },
            plot_log);
    }

    static const PipelineFixture& get() {
        static PipelineFixture fixture;
        return fixture;
    }
};

}  // namespace

TEST_CASE("bundle round trip", "[pipeline]") {
    TempDir dir("bundle");
    const EcgRecord rec = testsup::synth_record("b1", ClassLabel::LVH, 9);
    const PreprocessedRecord pre = preprocess_record(rec);
    CHECK(pre.r_peaks.size() == 12);
    CHECK(pre.bundle.leads[0].n_beats_averaged == 10);  // first/last beats dropped

    const std::string path = (dir.path / "b1.beats.json").string();
    save_bundle(pre.bundle, path);
    const MeanBeatBundle back = load_bundle(path);
    CHECK(back.record_id == "b1");
    CHECK(back.label == ClassLabel::LVH);
    CHECK(back.sample_rate_hz == 500.0);
    for (LeadId lead : kAllLeads) {
        const MeanBeat& orig = pre.bundle.leads[lead_index(lead)];
        const MeanBeat& got = back.leads[lead_index(lead)];
        CHECK(got.n_beats_averaged == orig.n_beats_averaged);
        CHECK(got.samples == orig.samples);  // bit-exact doubles
    }

    SECTION("to_record carries the label and beats over") {
        const RecordMeanBeats r = back.to_record();
        CHECK(r.record_id == "b1");
        CHECK(r.label == ClassLabel::LVH);
        CHECK(r.leads[lead_index(LeadId::V5)] ==
              back.leads[lead_index(LeadId::V5)].samples);
    }
}

TEST_CASE("bundle validation", "[pipeline]") {
    TempDir dir("bundleerr");
    const EcgRecord rec = testsup::synth_record("b2", ClassLabel::Normal, 10);
    const std::string good = (dir.path / "b2.beats.json").string();
    save_bundle(preprocess_record(rec).bundle, good);
    const nlohmann::json original = nlohmann::json::parse(testsup::slurp(good));
    auto with_json = [&](nlohmann::json j) {
        const std::string p = (dir.path / "edited.json").string();
        write_text(p, j.dump());
        return p;
    };

    CHECK(code_of([&] { load_bundle((dir.path / "absent.json").string()); }) ==
          ErrorCode::IoError);
    {
        const std::string p = (dir.path / "junk.json").string();
        write_text(p, "{ nope");
        CHECK(code_of([&] { load_bundle(p); }) == ErrorCode::MalformedBundle);
    }
    {
        nlohmann::json j = original;
        j["format_version"] = 2;
        CHECK(code_of([&] { load_bundle(with_json(j)); }) == ErrorCode::VersionMismatch);
    }
    {
        nlohmann::json j = original;
        j["beat_length"] = 400;
        CHECK(code_of([&] { load_bundle(with_json(j)); }) ==
              ErrorCode::BeatLengthMismatch);
    }
    {
        nlohmann::json j = original;
        j.erase("record_id");
        CHECK(code_of([&] { load_bundle(with_json(j)); }) == ErrorCode::MalformedBundle);
    }
    {
        nlohmann::json j = original;
        j["leads"].erase("V3");
        CHECK(code_of([&] { load_bundle(with_json(j)); }) == ErrorCode::MissingLead);
    }
    {
        nlohmann::json j = original;
        j["leads"]["XX"] = j["leads"]["V1"];
        CHECK(code_of([&] { load_bundle(with_json(j)); }) == ErrorCode::MalformedBundle);
    }
    {
        nlohmann::json j = original;
        j["leads"]["V1"]["n_beats_averaged"] = 0;
        CHECK(code_of([&] { load_bundle(with_json(j)); }) == ErrorCode::MalformedBundle);
    }
    {
        nlohmann::json j = original;
        j["label"] = "Borderline";
        CHECK(code_of([&] { load_bundle(with_json(j)); }) == ErrorCode::MalformedBundle);
    }

    SECTION("save rejects wrong beat lengths") {
        MeanBeatBundle bad = load_bundle(good);
        bad.leads[0].samples.resize(100);
        CHECK(code_of([&] {
                  save_bundle(bad, (dir.path / "bad.json").string());
              }) == ErrorCode::BeatLengthMismatch);
    }
}

TEST_CASE("record discovery", "[pipeline]") {
    TempDir dir("discover");
    std::filesystem::create_directories(dir.path / "sub1");
    std::filesystem::create_directories(dir.path / "sub2");
    write_text(dir.path / "a.csv", "x");
    write_text(dir.path / "b.csv", "x");
    write_text(dir.path / "sub1" / "b.hea", "x");  // header beats the csv
    write_text(dir.path / "sub1" / "d.csv", "x");
    write_text(dir.path / "sub2" / "d.csv", "x");  // loses the path tie-break
    write_text(dir.path / "notes.txt", "x");

    const std::vector<fs::path> files = find_record_files(dir.path);
    REQUIRE(files.size() == 3);
    CHECK(files[0].filename() == "a.csv");
    CHECK(files[1].filename() == "b.hea");
    CHECK(files[2] == dir.path / "sub1" / "d.csv");

    SECTION("suffix scan") {
        write_text(dir.path / "sub2" / "x.beats.json", "{}");
        write_text(dir.path / "y.beats.json", "{}");
        const auto found = find_files_with_suffix(dir.path, ".beats.json");
        REQUIRE(found.size() == 2);
        CHECK(found[0].filename() == "x.beats.json");  // sorted by full path
        CHECK(found[1].filename() == "y.beats.json");
    }
    SECTION("not a directory") {
        CHECK(code_of([&] { find_record_files(dir.path / "missing"); }) ==
              ErrorCode::IoError);
        CHECK(code_of([&] { find_files_with_suffix(dir.path / "missing", ".x"); }) ==
              ErrorCode::IoError);
    }
    SECTION("unsupported extension") {
        CHECK(code_of([&] { read_record_any(dir.path / "notes.txt", {}); }) ==
              ErrorCode::UnsupportedFormat);
    }
}

TEST_CASE("preprocess stage", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();
    CHECK(f.preprocess_rc == 0);  // per-record failures do not fail the batch
    CHECK(testsup::count_sub(f.preprocess_log, "status=ok") == 6);
    CHECK(f.preprocess_log.find("preprocess record=broken status=error "
                                "code=LeadCountMismatch") != std::string::npos);
    CHECK(f.preprocess_log.find("preprocess done records=7 ok=6 failed=1") !=
          std::string::npos);
    for (const std::string& id : {"n0", "n1", "n2", "l0", "l1", "u0"})
        CHECK(std::filesystem::exists(f.bundles.path / (id + ".beats.json")));
    CHECK(!std::filesystem::exists(f.bundles.path / "broken.beats.json"));

    SECTION("empty input directory") {
        TempDir in("pre_empty"), out("pre_empty_out");
        std::ostringstream log;
        CHECK(cmd_preprocess(in.path, out.path, {}, log) == 2);
        CHECK(log.str().find("no records found") != std::string::npos);
    }
}

TEST_CASE("screen stage", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();
    CHECK(f.screen_rc == 0);
    CHECK(f.screen_log.find("screen done records=7 ok=6 failed=1 eligible=6") !=
          std::string::npos);

    const nlohmann::json root =
        nlohmann::json::parse(testsup::slurp(f.screen_out.path / "screening.json"));
    CHECK(root.at("threshold").get<double>() == 0.3);
    REQUIRE(root.at("records").size() == 6);
    for (const auto& row : root.at("records")) {
        CHECK(row.at("eligible").get<bool>());
        CHECK(row.at("max_vh").get<double>() < 0.3);
        CHECK(row.at("per_lead_vh").size() == 12);
    }

    SECTION("json row matches a direct screening run") {
        const EcgRecord rec = read_wfdb((f.raw.path / "n0.hea").string());
        const PreprocessedRecord pre = preprocess_record(rec, f.cfg);
        const VariabilityReport direct =
            screen_record("n0", pre.beats, f.cfg.screening_threshold);
        for (const auto& row : root.at("records")) {
            if (row.at("record_id") != "n0") continue;
            CHECK(row.at("max_vh").get<double>() == direct.max_vh);  // exact round trip
            CHECK(row.at("per_lead_vh").at("V5").get<double>() ==
                  direct.per_lead_vh[lead_index(LeadId::V5)]);
        }
    }
    SECTION("screening flags loader") {
        const auto flags = load_screening_flags(f.screening_override);
        CHECK(flags.size() == 6);
        CHECK_FALSE(flags.at("n2"));
        CHECK(flags.at("n0"));
        CHECK(code_of([&] {
                  load_screening_flags(f.screen_out.path / "absent.json");
              }) == ErrorCode::IoError);
        TempDir dir("flags");
        write_text(dir.path / "bad.json", "{}");
        CHECK(code_of([&] { load_screening_flags(dir.path / "bad.json"); }) ==
              ErrorCode::MalformedBundle);
    }
}

TEST_CASE("build stage", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();
    CHECK(f.build_rc == 0);
    CHECK(f.build_log.find("build record=u0 label=Unknown skipped=unlabeled") !=
          std::string::npos);
    CHECK(f.build_log.find("build record=n2 label=Normal skipped=ineligible") !=
          std::string::npos);
    CHECK(f.build_log.find("build candidates normal=2 lvh=2 seed=1") !=
          std::string::npos);
    CHECK(testsup::count_sub(f.build_log, "selected=true") == 4);

    const PrototypeLibrarySet set =
        load_library((f.lib_out.path / "library.json").string());
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH}) {
        for (LeadId lead : kAllLeads) {
            std::size_t occ = 0;
            const auto& lib = set.at(label, lead);
            CHECK(!lib.empty());
            for (const Prototype& p : lib) occ += p.occurrence;
            CHECK(occ == 2);  // conservation: two records per class went in
        }
    }
    // near-identical synthetic records should merge into one prototype
    CHECK(set.at(ClassLabel::Normal, LeadId::V5).size() == 1);
    CHECK(f.build_log.find("build class=Normal lead=V5 prototypes=1 "
                           "top_occurrence=2") != std::string::npos);

    SECTION("normal subsampling is seeded and logged") {
        TempDir out("build_sub");
        PipelineConfig small = f.cfg;
        small.normal_subsample = 1;
        std::ostringstream log;
        CHECK(cmd_build(f.bundles.path, out.path, small, log) == 0);
        CHECK(testsup::count_sub(log.str(), "skipped=subsample") == 2);
        CHECK(log.str().find("candidates normal=1 lvh=2") != std::string::npos);
    }
    SECTION("both classes are required") {
        TempDir only_normal("build_onesided"), out("build_onesided_out");
        for (const std::string& id : {"n0", "n1"})
            std::filesystem::copy_file(f.bundles.path / (id + ".beats.json"),
                                       only_normal.path / (id + ".beats.json"));
        std::ostringstream log;
        CHECK(code_of([&] {
                  cmd_build(only_normal.path, out.path, f.cfg, log);
              }) == ErrorCode::EmptyInput);
    }
    SECTION("empty bundle directory") {
        TempDir in("build_empty"), out("build_empty_out");
        std::ostringstream log;
        CHECK(cmd_build(in.path, out.path, f.cfg, log) == 2);
    }
    SECTION("unreadable bundles are logged and skipped") {
        TempDir in("build_badbundle"), out("build_badbundle_out");
        for (const std::string& id : {"n0", "l0"})
            std::filesystem::copy_file(f.bundles.path / (id + ".beats.json"),
                                       in.path / (id + ".beats.json"));
        write_text(in.path / "zz.beats.json", "{ nope");
        std::ostringstream log;
        CHECK(cmd_build(in.path, out.path, f.cfg, log) == 0);
        CHECK(log.str().find("build record=zz status=error code=MalformedBundle") !=
              std::string::npos);
    }
}

TEST_CASE("diagnose stage", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();
    CHECK(f.diagnose_rc == 0);
    CHECK(f.diagnose_log.find("diagnose done records=6 ok=6 failed=0") !=
          std::string::npos);

    // the synthetic classes are far apart: every decision must be right
    for (const std::string& id : {"n0", "n1", "n2"}) {
        const nlohmann::json r = nlohmann::json::parse(
            testsup::slurp(f.report_out.path / (id + ".report.json")));
        CHECK(r.at("bsw").at("decision") == "Normal");
        CHECK(r.at("sokolow_lyon").at("decision") == "Normal");
        CHECK(r.at("modified_cornell").at("decision") == "Normal");
        CHECK(r.at("label") == "Normal");
    }
    for (const std::string& id : {"l0", "l1"}) {
        const nlohmann::json r = nlohmann::json::parse(
            testsup::slurp(f.report_out.path / (id + ".report.json")));
        CHECK(r.at("bsw").at("decision") == "LVH");
        CHECK(r.at("bsw").at("total_normal").get<double>() >
              r.at("bsw").at("total_lvh").get<double>());
        CHECK(r.at("sokolow_lyon").at("index").get<double>() > 3.5);
        CHECK(r.at("label") == "LVH");
        CHECK(r.at("bsw").at("per_lead").contains("V1"));
        CHECK(r.at("bsw").at("per_lead").at("V1").at("normal").contains("distance"));
    }

    SECTION("missing library is unrecoverable") {
        std::ostringstream log;
        CHECK(code_of([&] {
                  cmd_diagnose(f.bundles.path, f.lib_out.path / "absent.json",
                               f.report_out.path, f.cfg, log);
              }) == ErrorCode::IoError);
    }
    SECTION("empty bundle directory") {
        TempDir in("diag_empty"), out("diag_empty_out");
        std::ostringstream log;
        CHECK(cmd_diagnose(in.path, f.lib_out.path / "library.json", out.path,
                           f.cfg, log) == 2);
    }
}

TEST_CASE("evaluate stage", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();
    CHECK(f.evaluate_rc == 0);
    CHECK(f.evaluate_log.find("evaluate record=u0 skipped=unlabeled") !=
          std::string::npos);
    CHECK(f.evaluate_log.find("evaluate done records=5") != std::string::npos);

    const nlohmann::json root =
        nlohmann::json::parse(testsup::slurp(f.eval_out.path / "evaluation.json"));
    CHECK(root.at("n_records") == 5);
    const auto& bsw = root.at("methods").at("bsw");
    CHECK(bsw.at("tp") == 2);
    CHECK(bsw.at("tn") == 3);
    CHECK(bsw.at("fp") == 0);
    CHECK(bsw.at("fn") == 0);
    CHECK(bsw.at("sensitivity") == 1.0);
    for (const char* method : {"bsw", "sokolow_lyon", "modified_cornell"}) {
        const auto& m = root.at("methods").at(method);
        CHECK(m.at("tp").get<int>() + m.at("fn").get<int>() == 2);
        CHECK(m.at("tn").get<int>() + m.at("fp").get<int>() == 3);
    }
    const std::string svg = testsup::slurp(f.eval_out.path / "confusion.svg");
    CHECK(svg.find("BSW") != std::string::npos);
    CHECK(svg.find("Sokolow-Lyon") != std::string::npos);
    CHECK(svg.find("Modified Cornell") != std::string::npos);

    SECTION("only unlabeled reports is an error") {
        TempDir in("eval_unlabeled"), out("eval_unlabeled_out");
        std::filesystem::copy_file(f.report_out.path / "u0.report.json",
                                   in.path / "u0.report.json");
        std::ostringstream log;
        CHECK(code_of([&] { cmd_evaluate(in.path, out.path, f.cfg, log); }) ==
              ErrorCode::EmptyInput);
    }
    SECTION("empty report directory") {
        TempDir in("eval_empty"), out("eval_empty_out");
        std::ostringstream log;
        CHECK(cmd_evaluate(in.path, out.path, f.cfg, log) == 2);
    }
    SECTION("corrupt reports are logged and skipped") {
        TempDir in("eval_bad"), out("eval_bad_out");
        std::filesystem::copy_file(f.report_out.path / "n0.report.json",
                                   in.path / "n0.report.json");
        write_text(in.path / "zz.report.json", "{ nope");
        std::ostringstream log;
        CHECK(cmd_evaluate(in.path, out.path, f.cfg, log) == 0);
        CHECK(log.str().find("evaluate record=zz status=error "
                             "code=MalformedBundle") != std::string::npos);
    }
}

TEST_CASE("plot stage", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();
    CHECK(f.plot_rc == 0);
    CHECK(f.plot_log.find("plot done files=24") != std::string::npos);
    for (ClassLabel label : {ClassLabel::Normal, ClassLabel::LVH})
        for (LeadId lead : kAllLeads)
            CHECK(std::filesystem::exists(
                f.plot_out.path / ("library_" + std::string(class_name(label)) +
                                   "_" + lead_name(lead) + ".svg")));
    const std::string one =
        testsup::slurp(f.plot_out.path / "library_Normal_V5.svg");
    CHECK(one.find("P1 (n=2)") != std::string::npos);
}

TEST_CASE("pipeline determinism", "[pipeline]") {
    const PipelineFixture& f = PipelineFixture::get();

    SECTION("same seed reproduces library and reports bit for bit") {
        TempDir lib2("det_lib"), rep2("det_rep");
        std::ostringstream log;
        REQUIRE(cmd_build(f.bundles.path, lib2.path, f.cfg, log,
                          f.screening_override) == 0);
        CHECK(testsup::slurp(lib2.path / "library.json") ==
              testsup::slurp(f.lib_out.path / "library.json"));
        REQUIRE(cmd_diagnose(f.bundles.path, lib2.path / "library.json", rep2.path,
                             f.cfg, log) == 0);
        for (const std::string& id : {"n0", "n1", "n2", "l0", "l1", "u0"})
            CHECK(testsup::slurp(rep2.path / (id + ".report.json")) ==
                  testsup::slurp(f.report_out.path / (id + ".report.json")));
    }
    SECTION("worker pool does not change outputs or logs") {
        TempDir lib4("par_lib"), rep4("par_rep");
        PipelineConfig parallel = f.cfg;
        parallel.workers = 4;
        std::ostringstream build_log;
        REQUIRE(cmd_build(f.bundles.path, lib4.path, parallel, build_log,
                          f.screening_override) == 0);
        CHECK(testsup::slurp(lib4.path / "library.json") ==
              testsup::slurp(f.lib_out.path / "library.json"));
        std::ostringstream diag_log;
        REQUIRE(cmd_diagnose(f.bundles.path, lib4.path / "library.json", rep4.path,
                             parallel, diag_log) == 0);
        CHECK(diag_log.str() == f.diagnose_log);  // ordered despite scheduling
        for (const std::string& id : {"n0", "l0", "u0"})
            CHECK(testsup::slurp(rep4.path / (id + ".report.json")) ==
                  testsup::slurp(f.report_out.path / (id + ".report.json")));
    }
    SECTION("a different seed changes the subsample") {
        TempDir out_a("seed_a"), out_b("seed_b");
        PipelineConfig a = f.cfg, b = f.cfg;
        a.normal_subsample = b.normal_subsample = 2;
        b.rng_seed = 7;
        std::ostringstream log_a, log_b;
        REQUIRE(cmd_build(f.bundles.path, out_a.path, a, log_a) == 0);
        REQUIRE(cmd_build(f.bundles.path, out_b.path, b, log_b) == 0);
        CHECK(log_a.str().find("seed=1") != std::string::npos);
        CHECK(log_b.str().find("seed=7") != std::string::npos);
        // 3 normals cut to 2: exactly one subsample skip each, seed-dependent
        CHECK(testsup::count_sub(log_a.str(), "skipped=subsample") == 1);
        CHECK(testsup::count_sub(log_b.str(), "skipped=subsample") == 1);
    }
}

TEST_CASE("cli binary", "[pipeline]") {
    const std::string cli = BSW_CLI_PATH;
    REQUIRE(std::filesystem::exists(cli));
    auto run = [&](const std::string& args) {
        const int status =
            std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        REQUIRE(status != -1);
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };

    CHECK(run("--help") == 0);
    CHECK(run("preprocess --help") == 0);
    CHECK(run("definitely-not-a-command") != 0);

    TempDir in("cli_empty"), out("cli_out");
    CHECK(run("preprocess " + in.path.string() + " --out " + out.path.string()) ==
          2);
    CHECK(run("diagnose " + in.path.string() + " --library /no/such/file --out " +
              out.path.string()) != 0);
    CHECK(run("plot /no/such/library.json --out " + out.path.string()) != 0);
}
