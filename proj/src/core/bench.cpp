#include "core/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace ppn {

double RunRecord::ph_per_iter() const {
    return candidate_iterations > 0 ? 100.0 * static_cast<double>(projection_attempts) / static_cast<double>(candidate_iterations) : 0.0;
}

double RunRecord::ph_per_step() const {
    return candidate_steps > 0 ? 100.0 * static_cast<double>(projection_attempts) / static_cast<double>(candidate_steps) : 0.0;
}

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string num_str(double v) { return fmt("%.17g", v); }
std::string num_str(long long v) { return std::to_string(v); }
std::string num_str(int v) { return std::to_string(v); }

} // namespace

RunRecord run_scene(const SceneSpec& spec, const RunOptions& options) {
    options.variant.check();
    const BuiltScene scene = build_scene(spec);
    SimState state = scene.initial;
    const StepConfig cfg = step_config(scene);

    RunRecord rec;
    rec.scene = spec.name.empty() ? spec.mesh.generator : spec.name;
    rec.variant = variant_name(options.variant.kind);

    const int n_steps = options.max_steps >= 0
                            ? options.max_steps
                            : std::max(1, static_cast<int>(std::llround(spec.duration / spec.dt)));
    MinimizeOptions mo;
    mo.solver = options.solver;

    // Normalized plane table for the post-step admissibility check.
    const int d = scene.dim();
    struct Plane { std::array<double, 3> n; double off; };
    std::vector<Plane> planes;
    for (const auto& pl : scene.spec.planes) {
        Plane p{pl.normal, pl.offset};
        double n2 = 0.0;
        for (int c = 0; c < d; ++c) n2 += p.n[static_cast<std::size_t>(c)] * p.n[static_cast<std::size_t>(c)];
        const double inv = 1.0 / std::sqrt(n2);
        for (int c = 0; c < d; ++c) p.n[static_cast<std::size_t>(c)] *= inv;
        planes.push_back(p);
    }

    for (int s = 1; s <= n_steps && !rec.failed; ++s) {
        const double t_next = state.t + cfg.dt;
        StepOutcome out;
        if (cfg.mode == SimMode::Dynamic) {
            const std::vector<double> xt = predict(state, cfg);
            const ElementSystem sys = build_step_elements(scene, state, cfg, xt, t_next);
            out = step(state, sys, cfg, options.variant, mo);
        } else {
            const ElementSystem sys = build_step_elements(scene, state, cfg, state.x, t_next);
            out = quasistatic_solve(state, sys, cfg, options.variant, mo);
        }
        const StepReport& rep = out.report;

        StepRow row;
        row.step = s;
        row.status = solve_result_name(rep.status);
        row.converged = rep.converged ? 1 : 0;
        row.newton_iterations = rep.newton_iterations;
        row.candidate_elements = rep.candidate_elements;
        row.projection_attempts = rep.ledger.projection_attempts;
        row.eigendecompositions = rep.ledger.eigendecompositions;
        row.modified = rep.ledger.modified;
        row.solve_failures = rep.ledger.solve_failures;
        row.gamma_min = 1.0;
        for (const auto& ir : rep.records)
            if (ir.accepted) row.gamma_min = std::min(row.gamma_min, ir.gamma);
        row.kinetic = out.kinetic;
        row.elastic = out.elastic;
        row.t_assemble = rep.t_assemble;
        row.t_project = rep.t_project;
        row.t_solve = rep.t_solve;
        row.t_linesearch = rep.t_linesearch;
        row.t_other = rep.t_other;
        row.t_total = rep.t_total;

        rec.steps += 1;
        rec.newton_iterations += rep.newton_iterations;
        rec.projection_attempts += row.projection_attempts;
        rec.eigendecompositions += row.eigendecompositions;
        rec.modified += row.modified;
        rec.solve_failures += row.solve_failures;
        rec.candidate_iterations += row.candidate_elements * static_cast<long long>(rep.records.size());
        rec.candidate_steps += row.candidate_elements;
        rec.gamma_min = std::min(rec.gamma_min, row.gamma_min);
        rec.t_assemble += row.t_assemble;
        rec.t_project += row.t_project;
        rec.t_solve += row.t_solve;
        rec.t_linesearch += row.t_linesearch;
        rec.t_other += row.t_other;
        rec.t_total += row.t_total;
        if (options.keep_series) rec.series.push_back(row);

        if (!rep.converged) {
            rec.failed = true;
            rec.failure = "step " + std::to_string(s) + ": " + solve_result_name(rep.status);
            break;
        }
        for (std::size_t pi = 0; pi < planes.size(); ++pi) {
            for (int v = 0; v < state.n_nodes(); ++v) {
                double dist = -planes[pi].off;
                for (int c = 0; c < d; ++c)
                    dist += planes[pi].n[static_cast<std::size_t>(c)] * state.x[static_cast<std::size_t>(v * d + c)];
                if (!(dist > 0.0)) {
                    rec.failed = true;
                    rec.failure = "step " + std::to_string(s) + ": vertex " + std::to_string(v) +
                                  " penetrates plane " + std::to_string(pi) + " (d=" + fmt("%.3g", dist) + ")";
                    break;
                }
            }
            if (rec.failed) break;
        }
    }
    return rec;
}

namespace {

bool needs_quotes(const std::string& s) {
    return s.find_first_of(",\"\r\n") != std::string::npos;
}

std::string csv_field(const std::string& s) {
    if (!needs_quotes(s)) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false, field_started = false;
    std::size_t i = 0;
    const std::size_t n = text.size();
    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
        field_started = false;
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };
    while (i < n) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < n && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    in_quotes = false;
                    ++i;
                }
            } else {
                field += c;
                ++i;
            }
            continue;
        }
        if (c == '"' && !field_started && field.empty()) {
            in_quotes = true;
            field_started = true;
            ++i;
        } else if (c == ',') {
            end_field();
            ++i;
        } else if (c == '\r' && i + 1 < n && text[i + 1] == '\n') {
            end_row();
            i += 2;
        } else if (c == '\n') {
            end_row();
            ++i;
        } else {
            field += c;
            field_started = true;
            ++i;
        }
    }
    if (in_quotes) fail(ErrorCode::ParseError, "csv: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

const char* kAggregateHeader =
    "scene,variant,steps,newton_iterations,projection_attempts,eigendecompositions,modified,"
    "solve_failures,candidate_iterations,candidate_steps,gamma_min,t_assemble,t_project,t_solve,"
    "t_linesearch,t_other,t_total,failed,failure";

double to_num(const std::string& s) {
    const char* b = s.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (s.empty() || e != b + s.size()) fail(ErrorCode::ParseError, "csv: bad number '" + s + "'");
    return v;
}

long long to_ll(const std::string& s) {
    const double v = to_num(s);
    return static_cast<long long>(v);
}

} // namespace

std::string emit_aggregate_csv(const std::vector<RunRecord>& records) {
    std::string out = kAggregateHeader;
    out += "\n";
    for (const auto& r : records) {
        out += csv_field(r.scene) + "," + csv_field(r.variant) + "," + num_str(r.steps) + "," +
               num_str(r.newton_iterations) + "," + num_str(r.projection_attempts) + "," +
               num_str(r.eigendecompositions) + "," + num_str(r.modified) + "," +
               num_str(r.solve_failures) + "," + num_str(r.candidate_iterations) + "," +
               num_str(r.candidate_steps) + "," + num_str(r.gamma_min) + "," +
               num_str(r.t_assemble) + "," + num_str(r.t_project) + "," + num_str(r.t_solve) + "," +
               num_str(r.t_linesearch) + "," + num_str(r.t_other) + "," + num_str(r.t_total) + "," +
               num_str(r.failed ? 1 : 0) + "," + csv_field(r.failure) + "\n";
    }
    return out;
}

std::vector<RunRecord> parse_aggregate_csv(const std::string& text) {
    const auto rows = parse_csv(text);
    if (rows.empty()) fail(ErrorCode::ParseError, "csv: empty input");
    {
        std::string hdr;
        for (std::size_t i = 0; i < rows[0].size(); ++i) hdr += (i ? "," : "") + rows[0][i];
        if (hdr != kAggregateHeader) fail(ErrorCode::ParseError, "csv: unexpected header '" + hdr + "'");
    }
    std::vector<RunRecord> out;
    for (std::size_t ri = 1; ri < rows.size(); ++ri) {
        const auto& f = rows[ri];
        if (f.size() != 19)
            fail(ErrorCode::ParseError, "csv: row " + std::to_string(ri + 1) + " has " +
                                            std::to_string(f.size()) + " fields, expected 19");
        RunRecord r;
        r.scene = f[0];
        r.variant = f[1];
        r.steps = static_cast<int>(to_ll(f[2]));
        r.newton_iterations = to_ll(f[3]);
        r.projection_attempts = to_ll(f[4]);
        r.eigendecompositions = to_ll(f[5]);
        r.modified = to_ll(f[6]);
        r.solve_failures = to_ll(f[7]);
        r.candidate_iterations = to_ll(f[8]);
        r.candidate_steps = to_ll(f[9]);
        r.gamma_min = to_num(f[10]);
        r.t_assemble = to_num(f[11]);
        r.t_project = to_num(f[12]);
        r.t_solve = to_num(f[13]);
        r.t_linesearch = to_num(f[14]);
        r.t_other = to_num(f[15]);
        r.t_total = to_num(f[16]);
        r.failed = to_ll(f[17]) != 0;
        r.failure = f[18];
        out.push_back(std::move(r));
    }
    return out;
}

std::string emit_steps_csv(const RunRecord& record) {
    std::string out =
        "step,status,converged,newton_iterations,candidate_elements,projection_attempts,"
        "eigendecompositions,modified,solve_failures,gamma_min,kinetic,elastic,t_assemble,"
        "t_project,t_solve,t_linesearch,t_other,t_total\n";
    for (const auto& r : record.series) {
        out += num_str(r.step) + "," + csv_field(r.status) + "," + num_str(r.converged) + "," +
               num_str(r.newton_iterations) + "," + num_str(r.candidate_elements) + "," +
               num_str(r.projection_attempts) + "," + num_str(r.eigendecompositions) + "," +
               num_str(r.modified) + "," + num_str(r.solve_failures) + "," + num_str(r.gamma_min) +
               "," + num_str(r.kinetic) + "," + num_str(r.elastic) + "," + num_str(r.t_assemble) +
               "," + num_str(r.t_project) + "," + num_str(r.t_solve) + "," +
               num_str(r.t_linesearch) + "," + num_str(r.t_other) + "," + num_str(r.t_total) + "\n";
    }
    return out;
}

std::string emit_aggregate_json(const std::vector<RunRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        arr.push_back({{"scene", r.scene},
                       {"variant", r.variant},
                       {"steps", r.steps},
                       {"newton_iterations", r.newton_iterations},
                       {"projection_attempts", r.projection_attempts},
                       {"eigendecompositions", r.eigendecompositions},
                       {"modified", r.modified},
                       {"solve_failures", r.solve_failures},
                       {"candidate_iterations", r.candidate_iterations},
                       {"candidate_steps", r.candidate_steps},
                       {"ph_per_iter", r.ph_per_iter()},
                       {"ph_per_step", r.ph_per_step()},
                       {"gamma_min", r.gamma_min},
                       {"t_assemble", r.t_assemble},
                       {"t_project", r.t_project},
                       {"t_solve", r.t_solve},
                       {"t_linesearch", r.t_linesearch},
                       {"t_other", r.t_other},
                       {"t_total", r.t_total},
                       {"failed", r.failed},
                       {"failure", r.failure}});
    }
    return arr.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) fail(ErrorCode::IoError, "cannot open '" + tmp.string() + "' for writing");
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) fail(ErrorCode::IoError, "short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) fail(ErrorCode::IoError, "rename to '" + path + "' failed: " + ec.message());
}

std::vector<RunRecord> run_benchmark(const std::vector<SceneSpec>& specs,
                                     const std::vector<SolverVariant>& variants,
                                     const std::string& out_dir, int jobs,
                                     LinearSolverKind solver) {
    struct Job {
        const SceneSpec* spec;
        SolverVariant var;
    };
    std::vector<Job> all;
    for (const auto& s : specs)
        for (const auto& v : variants) all.push_back({&s, v});

    std::vector<RunRecord> records(all.size());
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(all.size())));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= all.size()) return;
            const Job& job = all[i];
            RunOptions opt;
            opt.variant = job.var;
            opt.solver = solver;
            try {
                records[i] = run_scene(*job.spec, opt);
            } catch (const std::exception& e) {
                records[i].scene = job.spec->name;
                records[i].variant = variant_name(job.var.kind);
                records[i].failed = true;
                records[i].failure = e.what();
            }
            if (!out_dir.empty() && !records[i].series.empty())
                write_file_atomic(out_dir + "/" + records[i].scene + "_" + records[i].variant +
                                      "_steps.csv",
                                  emit_steps_csv(records[i]));
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!out_dir.empty()) write_file_atomic(out_dir + "/aggregate.csv", emit_aggregate_csv(records));
    return records;
}

Summary summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) fail(ErrorCode::MissingData, "no records to summarize");
    for (const auto& r : records)
        if (r.steps == 0)
            fail(ErrorCode::MissingData, r.scene + "/" + r.variant + ": record has zero steps");

    std::vector<std::string> scenes;
    for (const auto& r : records)
        if (std::find(scenes.begin(), scenes.end(), r.scene) == scenes.end())
            scenes.push_back(r.scene);

    Summary out;
    out.csv =
        "scene,variant,steps,iters_per_step,ph_per_iter,ph_per_step,eigendecompositions,"
        "solve_failures,t_total,ratio_ph_iter,ratio_eig,ratio_iters\n";
    char line[512];
    std::snprintf(line, sizeof line, "%-14s %-6s %6s %9s %11s %11s %9s %7s %9s %9s %9s %11s\n",
                  "scene", "variant", "steps", "iters/step", "ph_iter%", "ph_step%", "eig", "fails",
                  "t_total", "ph/PN", "eig/PN", "iters/PN");
    out.text += line;

    for (const auto& scene : scenes) {
        const RunRecord* pn = nullptr;
        for (const auto& r : records)
            if (r.scene == scene && r.variant == variant_name(VariantKind::PN)) pn = &r;
        if (!pn) fail(ErrorCode::MissingBaseline, "scene '" + scene + "': no PN baseline record");

        auto ratio = [](double v, double base, bool self) {
            if (self) return 1.0;  // baseline row is exact by definition
            if (base > 0.0) return v / base;
            return v > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
        };
        for (const auto& r : records) {
            if (r.scene != scene) continue;
            const bool self = &r == pn;
            const double ips = static_cast<double>(r.newton_iterations) / r.steps;
            const double pn_ips = static_cast<double>(pn->newton_iterations) / pn->steps;
            const double r_ph = ratio(r.ph_per_iter(), pn->ph_per_iter(), self);
            const double r_eig = ratio(static_cast<double>(r.eigendecompositions),
                                       static_cast<double>(pn->eigendecompositions), self);
            const double r_it = ratio(ips, pn_ips, self);
            std::snprintf(line, sizeof line,
                          "%-14s %-6s %6d %9.2f %11.2f %11.2f %9lld %7lld %9.3f %9.3f %9.3f %11.3f\n",
                          r.scene.c_str(), r.variant.c_str(), r.steps, ips, r.ph_per_iter(),
                          r.ph_per_step(), r.eigendecompositions, r.solve_failures, r.t_total, r_ph,
                          r_eig, r_it);
            out.text += line;
            out.csv += csv_field(r.scene) + "," + csv_field(r.variant) + "," + num_str(r.steps) +
                       "," + num_str(ips) + "," + num_str(r.ph_per_iter()) + "," +
                       num_str(r.ph_per_step()) + "," + num_str(r.eigendecompositions) + "," +
                       num_str(r.solve_failures) + "," + num_str(r.t_total) + "," + num_str(r_ph) +
                       "," + num_str(r_eig) + "," + num_str(r_it) + "\n";
        }
    }
    return out;
}

} // namespace ppn
