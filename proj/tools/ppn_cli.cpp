// Benchmark CLI over the C API: run one scene, sweep scenes x variants, or
// summarize previously written aggregate CSVs.
#include <ppn/ppn.h>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitBadInput = 2;

int exit_code_for(int status) {
    switch (status) {
        case PPN_OK: return kExitOk;
        case PPN_ERR_PARSE:
        case PPN_ERR_VALIDATION:
        case PPN_ERR_INVALID_ARGUMENT:
        case PPN_ERR_IO:
        case PPN_ERR_MISSING_BASELINE:
        case PPN_ERR_MISSING_DATA: return kExitBadInput;
        default: return kExitRunFailure;
    }
}

[[nodiscard]] int report_error(int status) {
    std::fprintf(stderr, "error: %s\n", ppn_last_error());
    return exit_code_for(status);
}

struct SceneDeleter {
    void operator()(ppn_scene* s) const { ppn_scene_free(s); }
};
struct RecordsDeleter {
    void operator()(ppn_records* r) const { ppn_records_free(r); }
};
using ScenePtr = std::unique_ptr<ppn_scene, SceneDeleter>;
using RecordsPtr = std::unique_ptr<ppn_records, RecordsDeleter>;

std::string take_string(char* s) {
    std::string out = s ? s : "";
    ppn_string_free(s);
    return out;
}

struct CommonFlags {
    std::string variant = "ppn";
    std::string filter = "clamp";
    std::string solver = "llt";
    double alpha = 0.0, beta = 0.0;
    double dt = 0.0, tol = 0.0, duration = 0.0;
    long long seed = -1;
    std::string out;

    CLI::Option* dt_opt = nullptr;
    CLI::Option* tol_opt = nullptr;
    CLI::Option* dur_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    void add_overrides(CLI::App* cmd) {
        dt_opt = cmd->add_option("--dt", dt, "Override the scene time step (s)");
        tol_opt = cmd->add_option("--tol", tol, "Override the convergence tolerance");
        dur_opt = cmd->add_option("--duration", duration, "Override the scene duration (s)");
        seed_opt = cmd->add_option("--seed", seed, "Override the perturbation seed");
    }
    void add_solver(CLI::App* cmd) {
        cmd->add_option("--filter", filter, "Eigenvalue filter: clamp or mirror")
            ->check(CLI::IsMember({"clamp", "mirror"}));
        cmd->add_option("--alpha", alpha, "PPN delta tightening factor (0,1)");
        cmd->add_option("--beta", beta, "PPN delta release factor (>= 1)");
        cmd->add_option("--solver", solver, "Linear solver: llt or pcg")
            ->check(CLI::IsMember({"llt", "pcg"}));
    }

    int apply_overrides(ppn_scene* scene) const {
        if (dt_opt && *dt_opt)
            if (int rc = ppn_scene_set(scene, "dt", dt)) return rc;
        if (tol_opt && *tol_opt)
            if (int rc = ppn_scene_set(scene, "tol", tol)) return rc;
        if (dur_opt && *dur_opt)
            if (int rc = ppn_scene_set(scene, "duration", duration)) return rc;
        if (seed_opt && *seed_opt)
            if (int rc = ppn_scene_set(scene, "seed", static_cast<double>(seed))) return rc;
        return PPN_OK;
    }
    ppn_run_options options() const {
        ppn_run_options o;
        ppn_run_options_init(&o);
        o.variant = variant.c_str();
        o.filter = filter.c_str();
        o.alpha = alpha;
        o.beta = beta;
        o.solver = solver.c_str();
        return o;
    }
};

void print_record(const ppn_records* recs, size_t i) {
    auto stat = [&](const char* f) {
        double v = 0.0;
        ppn_record_stat(recs, i, f, &v);
        return v;
    };
    std::printf("scene %s  variant %s\n", ppn_record_scene(recs, i), ppn_record_variant(recs, i));
    std::printf("  steps              %d\n", static_cast<int>(stat("steps")));
    std::printf("  newton iterations  %lld\n", static_cast<long long>(stat("newton_iterations")));
    std::printf("  projections        %lld  (ph_per_iter %.2f%%, ph_per_step %.2f%%)\n",
                static_cast<long long>(stat("projection_attempts")), stat("ph_per_iter"),
                stat("ph_per_step"));
    std::printf("  eigendecomps       %lld  (modified %lld)\n",
                static_cast<long long>(stat("eigendecompositions")),
                static_cast<long long>(stat("modified")));
    std::printf("  solve failures     %lld\n", static_cast<long long>(stat("solve_failures")));
    std::printf("  gamma min          %.4g\n", stat("gamma_min"));
    std::printf("  time (s)           total %.3f = assemble %.3f + project %.3f + solve %.3f + "
                "linesearch %.3f + other %.3f\n",
                stat("t_total"), stat("t_assemble"), stat("t_project"), stat("t_solve"),
                stat("t_linesearch"), stat("t_other"));
    if (ppn_record_failed(recs, i))
        std::printf("  FAILED: %s\n", ppn_record_failure(recs, i));
}

int cmd_run(const std::string& scene_path, const CommonFlags& flags, int max_steps, bool json) {
    ppn_scene* raw = nullptr;
    if (int rc = ppn_scene_load(scene_path.c_str(), &raw)) return report_error(rc);
    ScenePtr scene(raw);
    if (int rc = flags.apply_overrides(scene.get())) return report_error(rc);

    ppn_run_options opts = flags.options();
    opts.max_steps = max_steps;
    ppn_records* rraw = nullptr;
    if (int rc = ppn_run_scene(scene.get(), &opts, &rraw)) return report_error(rc);
    RecordsPtr recs(rraw);

    if (json) {
        char* s = nullptr;
        if (int rc = ppn_records_json(recs.get(), &s)) return report_error(rc);
        std::printf("%s", take_string(s).c_str());
    } else {
        print_record(recs.get(), 0);
    }
    if (!flags.out.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(flags.out, ec);
        char* agg = nullptr;
        if (int rc = ppn_records_aggregate_csv(recs.get(), &agg)) return report_error(rc);
        std::ofstream fa(flags.out + "/aggregate.csv", std::ios::binary | std::ios::trunc);
        fa << take_string(agg);
        char* steps = nullptr;
        if (int rc = ppn_records_steps_csv(recs.get(), 0, &steps)) return report_error(rc);
        std::ofstream fs(flags.out + "/" + std::string(ppn_record_scene(recs.get(), 0)) + "_" +
                             ppn_record_variant(recs.get(), 0) + "_steps.csv",
                         std::ios::binary | std::ios::trunc);
        fs << take_string(steps);
        if (!fa || !fs) {
            std::fprintf(stderr, "error: cannot write CSVs under '%s'\n", flags.out.c_str());
            return kExitBadInput;
        }
    }
    return ppn_record_failed(recs.get(), 0) ? kExitRunFailure : kExitOk;
}

int cmd_sweep(const std::vector<std::string>& scene_paths, std::vector<std::string> variants,
              const CommonFlags& flags, int jobs, bool json) {
    if (variants.empty()) variants = {"plain", "pn", "pdn", "ppn"};

    std::vector<ScenePtr> scenes;
    std::vector<const ppn_scene*> scene_ptrs;
    for (const auto& path : scene_paths) {
        ppn_scene* raw = nullptr;
        if (int rc = ppn_scene_load(path.c_str(), &raw)) return report_error(rc);
        scenes.emplace_back(raw);
        if (int rc = flags.apply_overrides(raw)) return report_error(rc);
        scene_ptrs.push_back(raw);
    }
    std::vector<const char*> vnames;
    for (const auto& v : variants) vnames.push_back(v.c_str());

    const ppn_run_options base = flags.options();
    ppn_records* rraw = nullptr;
    if (int rc = ppn_sweep(scene_ptrs.data(), scene_ptrs.size(), vnames.data(), vnames.size(),
                           &base, flags.out.empty() ? nullptr : flags.out.c_str(), jobs, &rraw))
        return report_error(rc);
    RecordsPtr recs(rraw);

    bool any_failed = false;
    for (size_t i = 0; i < ppn_records_count(recs.get()); ++i)
        if (ppn_record_failed(recs.get(), i)) {
            any_failed = true;
            std::fprintf(stderr, "run failed: %s/%s: %s\n", ppn_record_scene(recs.get(), i),
                         ppn_record_variant(recs.get(), i), ppn_record_failure(recs.get(), i));
        }

    if (json) {
        char* s = nullptr;
        if (int rc = ppn_records_json(recs.get(), &s)) return report_error(rc);
        std::printf("%s", take_string(s).c_str());
    } else {
        char* text = nullptr;
        const int rc = ppn_records_summary(recs.get(), &text, nullptr);
        if (rc == PPN_OK) {
            std::printf("%s", take_string(text).c_str());
        } else if (rc == PPN_ERR_MISSING_BASELINE || rc == PPN_ERR_MISSING_DATA) {
            // no PN baseline (or a failed run produced no steps): print raw records
            for (size_t i = 0; i < ppn_records_count(recs.get()); ++i) print_record(recs.get(), i);
        } else {
            return report_error(rc);
        }
    }
    return any_failed ? kExitRunFailure : kExitOk;
}

int cmd_report(const std::vector<std::string>& csv_paths, const std::string& csv_out) {
    RecordsPtr merged;
    for (const auto& path : csv_paths) {
        std::ifstream f(path, std::ios::binary);
        if (!f) {
            std::fprintf(stderr, "error: cannot open '%s'\n", path.c_str());
            return kExitBadInput;
        }
        std::ostringstream ss;
        ss << f.rdbuf();
        ppn_records* raw = nullptr;
        if (int rc = ppn_records_parse_csv(ss.str().c_str(), &raw)) return report_error(rc);
        if (!merged) {
            merged.reset(raw);
        } else {
            RecordsPtr part(raw);
            if (int rc = ppn_records_merge(merged.get(), part.get())) return report_error(rc);
        }
    }
    char* text = nullptr;
    char* csv = nullptr;
    if (int rc = ppn_records_summary(merged.get(), &text, &csv)) return report_error(rc);
    std::printf("%s", take_string(text).c_str());
    const std::string csv_str = take_string(csv);
    if (!csv_out.empty()) {
        std::ofstream f(csv_out, std::ios::binary | std::ios::trunc);
        f << csv_str;
        if (!f) {
            std::fprintf(stderr, "error: cannot write '%s'\n", csv_out.c_str());
            return kExitBadInput;
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Progressively projected Newton benchmark driver"};
    app.require_subcommand(1);

    CommonFlags run_flags, sweep_flags;
    std::string run_scene;
    int run_steps = -1;
    bool run_json = false;

    CLI::App* run = app.add_subcommand("run", "Simulate one scene under one solver variant");
    run->add_option("--scene", run_scene, "Scene file")->required()->check(CLI::ExistingFile);
    run->add_option("--variant", run_flags.variant, "Solver variant: plain, pn, pdn, ppn")
        ->check(CLI::IsMember({"plain", "pn", "pdn", "ppn"}));
    run_flags.add_overrides(run);
    run_flags.add_solver(run);
    run->add_option("--steps", run_steps, "Cap the number of time steps");
    run->add_option("--out", run_flags.out, "Directory for step/aggregate CSVs");
    run->add_flag("--json", run_json, "Print the aggregate record as JSON");

    std::vector<std::string> sweep_scenes, sweep_variants;
    int sweep_jobs = 0;
    bool sweep_json = false;
    CLI::App* sweep = app.add_subcommand("sweep", "Run a scenes x variants matrix");
    sweep->add_option("--scene", sweep_scenes, "Scene files")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--variant", sweep_variants, "Variants (default: all four)")
        ->check(CLI::IsMember({"plain", "pn", "pdn", "ppn"}));
    sweep_flags.add_overrides(sweep);
    sweep_flags.add_solver(sweep);
    sweep->add_option("--jobs", sweep_jobs, "Worker threads (0 = hardware default)");
    sweep->add_option("--out", sweep_flags.out, "Directory for CSV output");
    sweep->add_flag("--json", sweep_json, "Print aggregate records as JSON");

    std::vector<std::string> report_csvs;
    std::string report_csv_out;
    CLI::App* report = app.add_subcommand("report", "Summarize aggregate CSVs against PN");
    report->add_option("csv", report_csvs, "aggregate.csv files")
        ->required()
        ->check(CLI::ExistingFile);
    report->add_option("--csv-out", report_csv_out, "Write the summary table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadInput;
    }

    if (run->parsed()) return cmd_run(run_scene, run_flags, run_steps, run_json);
    if (sweep->parsed()) return cmd_sweep(sweep_scenes, sweep_variants, sweep_flags, sweep_jobs, sweep_json);
    return cmd_report(report_csvs, report_csv_out);
}
