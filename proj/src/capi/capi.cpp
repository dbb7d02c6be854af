#include "ppn/ppn.h"

#include "core/bench.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

using namespace ppn;

struct ppn_scene {
    SceneSpec spec;
};

struct ppn_records {
    std::vector<RunRecord> records;
};

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

int code_of(const Error& e) {
    switch (e.code()) {
        case ErrorCode::NonFinite: return PPN_ERR_NONFINITE;
        case ErrorCode::Inadmissible: return PPN_ERR_INADMISSIBLE;
        case ErrorCode::IndexOutOfRange: return PPN_ERR_INDEX_OUT_OF_RANGE;
        case ErrorCode::StructuralMiss: return PPN_ERR_STRUCTURAL_MISS;
        case ErrorCode::ParseError: return PPN_ERR_PARSE;
        case ErrorCode::ValidationError: return PPN_ERR_VALIDATION;
        case ErrorCode::MissingBaseline: return PPN_ERR_MISSING_BASELINE;
        case ErrorCode::MissingData: return PPN_ERR_MISSING_DATA;
        case ErrorCode::IoError: return PPN_ERR_IO;
        case ErrorCode::InvalidArgument: return PPN_ERR_INVALID_ARGUMENT;
        case ErrorCode::LineSearchFailure: return PPN_ERR_LINE_SEARCH;
        case ErrorCode::IterationLimit: return PPN_ERR_ITERATION_LIMIT;
        case ErrorCode::SolveFailure: return PPN_ERR_SOLVE;
    }
    return PPN_ERR_RUNTIME;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return PPN_OK;
    } catch (const Error& e) {
        return set_error(code_of(e), e.what());
    } catch (const std::exception& e) {
        return set_error(PPN_ERR_RUNTIME, e.what());
    } catch (...) {
        return set_error(PPN_ERR_RUNTIME, "unknown error");
    }
}

int require(bool ok, const char* what) {
    return ok ? PPN_OK : set_error(PPN_ERR_INVALID_ARGUMENT, what);
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

SolverVariant variant_from_options(const ppn_run_options& o) {
    SolverVariant v;
    v.kind = variant_from_name(o.variant ? o.variant : "ppn");
    if (o.filter) {
        const std::string f = o.filter;
        if (f == "clamp")
            v.filter.kind = FilterKind::Clamp;
        else if (f == "mirror")
            v.filter.kind = FilterKind::Mirror;
        else
            fail(ErrorCode::InvalidArgument, "unknown filter: " + f);
    }
    if (o.alpha > 0.0) v.ppn_alpha = o.alpha;
    if (o.beta > 0.0) v.ppn_beta = o.beta;
    v.check();
    return v;
}

LinearSolverKind solver_from_options(const ppn_run_options& o) {
    const std::string s = o.solver ? o.solver : "llt";
    if (s == "llt") return LinearSolverKind::LLT;
    if (s == "pcg") return LinearSolverKind::PCG;
    fail(ErrorCode::InvalidArgument, "unknown linear solver: " + s);
}

} // namespace

extern "C" {

const char* ppn_version(void) { return "1.0.0"; }

const char* ppn_last_error(void) { return g_last_error.c_str(); }

void ppn_string_free(char* s) { std::free(s); }

int ppn_scene_parse(const char* text, ppn_scene** out) {
    if (int rc = require(text && out, "ppn_scene_parse: null argument")) return rc;
    return guarded([&] {
        auto sc = std::make_unique<ppn_scene>();
        sc->spec = parse_scene(text);
        *out = sc.release();
    });
}

int ppn_scene_load(const char* path, ppn_scene** out) {
    if (int rc = require(path && out, "ppn_scene_load: null argument")) return rc;
    return guarded([&] {
        std::ifstream f(path, std::ios::binary);
        if (!f) fail(ErrorCode::IoError, std::string("cannot open scene file '") + path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        auto sc = std::make_unique<ppn_scene>();
        sc->spec = parse_scene(ss.str());
        *out = sc.release();
    });
}

void ppn_scene_free(ppn_scene* scene) { delete scene; }

const char* ppn_scene_name(const ppn_scene* scene) {
    return scene ? scene->spec.name.c_str() : "";
}

int ppn_scene_dim(const ppn_scene* scene) { return scene ? scene->spec.dim() : 0; }

int ppn_scene_set(ppn_scene* scene, const char* field, double value) {
    if (int rc = require(scene && field, "ppn_scene_set: null argument")) return rc;
    return guarded([&] {
        SceneSpec spec = scene->spec;
        const std::string f = field;
        if (f == "dt")
            spec.dt = value;
        else if (f == "tol")
            spec.tol = value;
        else if (f == "duration")
            spec.duration = value;
        else if (f == "seed")
            spec.seed = static_cast<unsigned long>(value);
        else if (f == "perturb")
            spec.perturb = value;
        else
            fail(ErrorCode::InvalidArgument, "ppn_scene_set: unknown field '" + f + "'");
        spec.validate();
        scene->spec = std::move(spec);
    });
}

void ppn_run_options_init(ppn_run_options* opts) {
    if (!opts) return;
    opts->variant = "ppn";
    opts->filter = "clamp";
    opts->alpha = 0.0;
    opts->beta = 0.0;
    opts->solver = "llt";
    opts->max_steps = -1;
}

int ppn_run_scene(const ppn_scene* scene, const ppn_run_options* opts, ppn_records** out) {
    if (int rc = require(scene && opts && out, "ppn_run_scene: null argument")) return rc;
    return guarded([&] {
        RunOptions ro;
        ro.variant = variant_from_options(*opts);
        ro.solver = solver_from_options(*opts);
        ro.max_steps = opts->max_steps;
        auto recs = std::make_unique<ppn_records>();
        recs->records.push_back(run_scene(scene->spec, ro));
        *out = recs.release();
    });
}

int ppn_sweep(const ppn_scene* const* scenes, size_t n_scenes, const char* const* variant_names,
              size_t n_variants, const ppn_run_options* base, const char* out_dir, int jobs,
              ppn_records** out) {
    if (int rc = require(scenes && variant_names && base && out, "ppn_sweep: null argument"))
        return rc;
    return guarded([&] {
        std::vector<SceneSpec> specs;
        for (size_t i = 0; i < n_scenes; ++i) {
            if (!scenes[i]) fail(ErrorCode::InvalidArgument, "ppn_sweep: null scene");
            specs.push_back(scenes[i]->spec);
        }
        std::vector<SolverVariant> variants;
        if (n_variants == 0)
            for (const char* const* p = variant_names; *p; ++p) ++n_variants;
        for (size_t i = 0; i < n_variants; ++i) {
            ppn_run_options o = *base;
            o.variant = variant_names[i];
            variants.push_back(variant_from_options(o));
        }
        auto recs = std::make_unique<ppn_records>();
        recs->records = run_benchmark(specs, variants, out_dir ? out_dir : "", jobs,
                                      solver_from_options(*base));
        *out = recs.release();
    });
}

void ppn_records_free(ppn_records* recs) { delete recs; }

size_t ppn_records_count(const ppn_records* recs) { return recs ? recs->records.size() : 0; }

const char* ppn_record_scene(const ppn_records* recs, size_t index) {
    return recs && index < recs->records.size() ? recs->records[index].scene.c_str() : "";
}

const char* ppn_record_variant(const ppn_records* recs, size_t index) {
    return recs && index < recs->records.size() ? recs->records[index].variant.c_str() : "";
}

int ppn_record_failed(const ppn_records* recs, size_t index) {
    return recs && index < recs->records.size() && recs->records[index].failed ? 1 : 0;
}

const char* ppn_record_failure(const ppn_records* recs, size_t index) {
    return recs && index < recs->records.size() ? recs->records[index].failure.c_str() : "";
}

int ppn_record_stat(const ppn_records* recs, size_t index, const char* field, double* out) {
    if (int rc = require(recs && field && out, "ppn_record_stat: null argument")) return rc;
    return guarded([&] {
        if (index >= recs->records.size())
            fail(ErrorCode::IndexOutOfRange, "ppn_record_stat: index out of range");
        const RunRecord& r = recs->records[index];
        const std::string f = field;
        double v = 0.0;
        if (f == "steps") v = r.steps;
        else if (f == "newton_iterations") v = static_cast<double>(r.newton_iterations);
        else if (f == "projection_attempts") v = static_cast<double>(r.projection_attempts);
        else if (f == "eigendecompositions") v = static_cast<double>(r.eigendecompositions);
        else if (f == "modified") v = static_cast<double>(r.modified);
        else if (f == "solve_failures") v = static_cast<double>(r.solve_failures);
        else if (f == "candidate_iterations") v = static_cast<double>(r.candidate_iterations);
        else if (f == "candidate_steps") v = static_cast<double>(r.candidate_steps);
        else if (f == "ph_per_iter") v = r.ph_per_iter();
        else if (f == "ph_per_step") v = r.ph_per_step();
        else if (f == "gamma_min") v = r.gamma_min;
        else if (f == "t_assemble") v = r.t_assemble;
        else if (f == "t_project") v = r.t_project;
        else if (f == "t_solve") v = r.t_solve;
        else if (f == "t_linesearch") v = r.t_linesearch;
        else if (f == "t_other") v = r.t_other;
        else if (f == "t_total") v = r.t_total;
        else fail(ErrorCode::InvalidArgument, "ppn_record_stat: unknown field '" + f + "'");
        *out = v;
    });
}

int ppn_records_aggregate_csv(const ppn_records* recs, char** out) {
    if (int rc = require(recs && out, "ppn_records_aggregate_csv: null argument")) return rc;
    return guarded([&] { *out = dup_string(emit_aggregate_csv(recs->records)); });
}

int ppn_records_steps_csv(const ppn_records* recs, size_t index, char** out) {
    if (int rc = require(recs && out, "ppn_records_steps_csv: null argument")) return rc;
    return guarded([&] {
        if (index >= recs->records.size())
            fail(ErrorCode::IndexOutOfRange, "ppn_records_steps_csv: index out of range");
        *out = dup_string(emit_steps_csv(recs->records[index]));
    });
}

int ppn_records_json(const ppn_records* recs, char** out) {
    if (int rc = require(recs && out, "ppn_records_json: null argument")) return rc;
    return guarded([&] { *out = dup_string(emit_aggregate_json(recs->records)); });
}

int ppn_records_parse_csv(const char* text, ppn_records** out) {
    if (int rc = require(text && out, "ppn_records_parse_csv: null argument")) return rc;
    return guarded([&] {
        auto recs = std::make_unique<ppn_records>();
        recs->records = parse_aggregate_csv(text);
        *out = recs.release();
    });
}

int ppn_records_merge(ppn_records* dst, const ppn_records* src) {
    if (int rc = require(dst && src, "ppn_records_merge: null argument")) return rc;
    return guarded([&] {
        dst->records.insert(dst->records.end(), src->records.begin(), src->records.end());
    });
}

int ppn_records_summary(const ppn_records* recs, char** text, char** csv) {
    if (int rc = require(recs != nullptr, "ppn_records_summary: null argument")) return rc;
    return guarded([&] {
        const Summary s = summarize(recs->records);
        if (text) *text = dup_string(s.text);
        if (csv) *csv = dup_string(s.csv);
    });
}

} // extern "C"
