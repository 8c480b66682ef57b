// Command-line front end: each subcommand is a thin wrapper over the
// corresponding pipeline stage. Exit codes: 0 success (per-record failures
// are logged and skipped), 1 unrecoverable error, 2 no input records.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsw/pipeline.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    long long seed = -1;     // <0 = keep config value
    int workers = 0;         // <1 = keep config value
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "pipeline config file (INI)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "override rng_seed from the config");
    cmd->add_option("--workers", opts.workers, "override worker pool size");
}

bsw::PipelineConfig resolve_config(const CommonOpts& opts) {
    bsw::PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = bsw::load_config(opts.config_path);
    if (opts.seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.workers >= 1) cfg.workers = opts.workers;
    bsw::validate_config(cfg);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bilateral signal warping pipeline for explainable LVH diagnosis"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string input, output, library, screening;

    CLI::App* pre = app.add_subcommand(
        "preprocess", "filter records and extract per-record mean-beat bundles");
    pre->add_option("input", input, "directory of .hea/.csv records")->required();
    pre->add_option("--out", output, "output directory for bundles")->required();
    add_common(pre, opts);

    CLI::App* scr = app.add_subcommand(
        "screen", "rate records by heartbeat variability for prototype donation");
    scr->add_option("input", input, "directory of .hea/.csv records")->required();
    scr->add_option("--out", output, "output directory for screening.json")->required();
    add_common(scr, opts);

    CLI::App* bld = app.add_subcommand(
        "build-library", "merge mean beats into per-class, per-lead prototype libraries");
    bld->add_option("input", input, "directory of .beats.json bundles")->required();
    bld->add_option("--out", output, "output directory for library.json")->required();
    bld->add_option("--screening", screening,
                    "screening.json; ineligible records are excluded")
        ->check(CLI::ExistingFile);
    add_common(bld, opts);

    CLI::App* dia = app.add_subcommand(
        "diagnose", "classify records against a prototype library");
    dia->add_option("input", input, "directory of .beats.json bundles")->required();
    dia->add_option("--library", library, "library.json to classify against")
        ->required()
        ->check(CLI::ExistingFile);
    dia->add_option("--out", output, "output directory for reports")->required();
    add_common(dia, opts);

    CLI::App* eva = app.add_subcommand(
        "evaluate", "confusion matrices for BSW and the voltage criteria");
    eva->add_option("input", input, "directory of .report.json files")->required();
    eva->add_option("--out", output, "output directory for evaluation artifacts")
        ->required();
    add_common(eva, opts);

    CLI::App* plt = app.add_subcommand(
        "plot", "render one SVG per (class, lead) from a library");
    plt->add_option("library", library, "library.json to render")
        ->required()
        ->check(CLI::ExistingFile);
    plt->add_option("--out", output, "output directory for SVG files")->required();
    add_common(plt, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        const bsw::PipelineConfig cfg = resolve_config(opts);
        if (pre->parsed()) return bsw::cmd_preprocess(input, output, cfg, std::cout);
        if (scr->parsed()) return bsw::cmd_screen(input, output, cfg, std::cout);
        if (bld->parsed())
            return bsw::cmd_build(input, output, cfg, std::cout, screening);
        if (dia->parsed())
            return bsw::cmd_diagnose(input, library, output, cfg, std::cout);
        if (eva->parsed()) return bsw::cmd_evaluate(input, output, cfg, std::cout);
        if (plt->parsed()) return bsw::cmd_plot(library, output, cfg, std::cout);
    } catch (const bsw::Error& e) {
        std::cerr << "error: [" << bsw::error_code_name(e.code()) << "] " << e.what()
                  << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;  // unreachable: require_subcommand(1)
}
