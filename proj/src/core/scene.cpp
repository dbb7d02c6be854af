#include "core/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

namespace ppn {

std::array<double, 3> DirichletScript::offset_at(double t) const {
    if (keyframes.empty()) return {};
    if (t <= keyframes.front().time) return keyframes.front().offset;
    if (t >= keyframes.back().time) return keyframes.back().offset;
    for (std::size_t k = 0; k + 1 < keyframes.size(); ++k) {
        const Keyframe& a = keyframes[k];
        const Keyframe& b = keyframes[k + 1];
        if (t <= b.time) {
            const double s = (t - a.time) / (b.time - a.time);
            std::array<double, 3> out{};
            for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(c)] = (1.0 - s) * a.offset[static_cast<std::size_t>(c)] + s * b.offset[static_cast<std::size_t>(c)];
            return out;
        }
    }
    return keyframes.back().offset;
}

int SceneSpec::dim() const {
    if (mesh.generator == "block2d" || mesh.generator == "chain2d") return 2;
    if (mesh.generator == "block3d") return 3;
    fail(ErrorCode::ValidationError, "mesh.generator: unknown generator '" + mesh.generator + "'");
}

void SceneSpec::validate() const {
    if (schema_version != 1) fail(ErrorCode::ValidationError, "schema_version: expected 1");
    if (!(dt > 0.0)) fail(ErrorCode::ValidationError, "dt: must be > 0");
    if (!(duration > 0.0)) fail(ErrorCode::ValidationError, "duration: must be > 0");
    if (!(tol > 0.0)) fail(ErrorCode::ValidationError, "tol: must be > 0");
    if (!(perturb >= 0.0)) fail(ErrorCode::ValidationError, "perturb: must be >= 0");
    material.check();
    for (int c = 0; c < dim(); ++c)
        if (!(initial_scale[static_cast<std::size_t>(c)] > 0.0))
            fail(ErrorCode::ValidationError, "initial_scale: factors must be > 0");

    if (mesh.nx < 1 || mesh.ny < 1 || mesh.nz < 1) fail(ErrorCode::ValidationError, "mesh: cell counts must be >= 1");
    if (!(mesh.size_x > 0.0 && mesh.size_y > 0.0 && mesh.size_z > 0.0))
        fail(ErrorCode::ValidationError, "mesh: sizes must be > 0");
    if (!(mesh.density > 0.0)) fail(ErrorCode::ValidationError, "mesh.density: must be > 0");
    if (mesh.generator == "block2d" && !(mesh.thickness > 0.0))
        fail(ErrorCode::ValidationError, "mesh.thickness: must be > 0");
    if (mesh.generator == "chain2d") {
        if (!(mesh.spring_stiffness > 0.0)) fail(ErrorCode::ValidationError, "mesh.spring_stiffness: must be > 0");
        if (!(mesh.node_mass > 0.0)) fail(ErrorCode::ValidationError, "mesh.node_mass: must be > 0");
    }

    for (const auto& sel : selects) {
        for (int c = 0; c < dim(); ++c)
            if (!(sel.lo[static_cast<std::size_t>(c)] <= sel.hi[static_cast<std::size_t>(c)]))
                fail(ErrorCode::ValidationError, "select '" + sel.name + "': box lo must not exceed hi");
    }
    for (const auto& ds : dirichlet) {
        if (!(ds.stiffness > 0.0)) fail(ErrorCode::ValidationError, "dirichlet '" + ds.set + "': stiffness must be > 0");
        if (ds.keyframes.empty()) fail(ErrorCode::ValidationError, "dirichlet '" + ds.set + "': needs at least one keyframe");
        for (std::size_t k = 0; k + 1 < ds.keyframes.size(); ++k)
            if (!(ds.keyframes[k].time < ds.keyframes[k + 1].time))
                fail(ErrorCode::ValidationError, "dirichlet '" + ds.set + "': keyframe times must strictly increase");
        const bool known = std::any_of(selects.begin(), selects.end(),
                                       [&](const SelectBox& s) { return s.name == ds.set; });
        if (!known) fail(ErrorCode::ValidationError, "dirichlet: unknown vertex set '" + ds.set + "'");
    }
    for (const auto& pl : planes) {
        double n2 = 0.0;
        for (int c = 0; c < dim(); ++c) n2 += pl.normal[static_cast<std::size_t>(c)] * pl.normal[static_cast<std::size_t>(c)];
        if (!(n2 > 0.0)) fail(ErrorCode::ValidationError, "plane.normal: must be nonzero");
        if (!(pl.dhat > 0.0)) fail(ErrorCode::ValidationError, "plane.dhat: must be > 0");
        if (!(pl.kappa > 0.0)) fail(ErrorCode::ValidationError, "plane.kappa: must be > 0");
    }
    if (mode == SimMode::Quasistatic && dirichlet.empty())
        fail(ErrorCode::ValidationError, "mode: quasistatic scenes need a dirichlet anchor");
}

namespace {

struct Tok {
    std::string s;
    int line = 0;
    int col = 0;
};

[[noreturn]] void parse_fail(int line, int col, const std::string& msg) {
    fail(ErrorCode::ParseError,
         "line " + std::to_string(line) + ", col " + std::to_string(col) + ": " + msg);
}

std::vector<std::vector<Tok>> tokenize(const std::string& text) {
    std::vector<std::vector<Tok>> lines;
    std::vector<Tok> cur;
    int line = 1, col = 1;
    std::string word;
    int word_col = 0;
    bool comment = false;
    auto flush_word = [&]() {
        if (!word.empty()) {
            cur.push_back({word, line, word_col});
            word.clear();
        }
    };
    auto flush_line = [&]() {
        flush_word();
        if (!cur.empty()) lines.push_back(std::move(cur));
        cur.clear();
    };
    for (char ch : text) {
        if (ch == '\n') {
            flush_line();
            ++line;
            col = 1;
            comment = false;
            continue;
        }
        if (!comment) {
            if (ch == '#') {
                comment = true;
            } else if (ch == ' ' || ch == '\t' || ch == '\r') {
                flush_word();
            } else {
                if (word.empty()) word_col = col;
                word.push_back(ch);
            }
        }
        ++col;
    }
    flush_line();
    return lines;
}

double num(const Tok& t) {
    const char* b = t.s.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (t.s.empty() || e != b + t.s.size())
        parse_fail(t.line, t.col, "expected a number, got '" + t.s + "'");
    return v;
}

long integer(const Tok& t) {
    const double v = num(t);
    const long iv = static_cast<long>(v);
    if (static_cast<double>(iv) != v) parse_fail(t.line, t.col, "expected an integer, got '" + t.s + "'");
    return iv;
}

// Deferred component-count check: vector fields are validated against the
// scene dimension once the mesh generator is known.
struct VecUse {
    std::string field;
    int line, col, count, expected_factor;  // expected = factor * dim; -1 = angular (1 in 2D, 3 in 3D)
};

int read_vec(const std::vector<Tok>& toks, std::array<double, 3>& out) {
    const int count = static_cast<int>(toks.size()) - 1;
    if (count < 1 || count > 3) parse_fail(toks[0].line, toks[0].col, "expected 1-3 components");
    out = {};
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = num(toks[static_cast<std::size_t>(i) + 1]);
    return count;
}

void expect_count(const std::vector<Tok>& toks, int n) {
    if (static_cast<int>(toks.size()) != n + 1)
        parse_fail(toks[0].line, toks[0].col,
                   "'" + toks[0].s + "' expects " + std::to_string(n) + " value(s)");
}

} // namespace

SceneSpec parse_scene(const std::string& text) {
    SceneSpec spec;
    spec.gravity = {0.0, -9.81, 0.0};

    enum class Ctx { Top, Mesh, Material, Dirichlet, Plane, Select };
    Ctx ctx = Ctx::Top;
    DirichletScript cur_d;
    ContactPlane cur_p;
    SelectBox cur_s;
    std::vector<VecUse> vec_uses;

    auto open_block = [&](const std::vector<Tok>& toks, bool named, Ctx next) {
        const std::size_t want = named ? 3 : 2;
        if (toks.size() != want || toks.back().s != "{")
            parse_fail(toks[0].line, toks[0].col, "expected '" + toks[0].s + (named ? " <name> {'" : " {'"));
        ctx = next;
    };

    for (const auto& toks : tokenize(text)) {
        const Tok& head = toks[0];
        const std::string& key = head.s;

        if (ctx == Ctx::Top) {
            if (key == "schema_version") {
                expect_count(toks, 1);
                spec.schema_version = static_cast<int>(integer(toks[1]));
            } else if (key == "name") {
                expect_count(toks, 1);
                spec.name = toks[1].s;
            } else if (key == "mode") {
                expect_count(toks, 1);
                if (toks[1].s == "dynamic")
                    spec.mode = SimMode::Dynamic;
                else if (toks[1].s == "quasistatic")
                    spec.mode = SimMode::Quasistatic;
                else
                    parse_fail(toks[1].line, toks[1].col, "mode must be 'dynamic' or 'quasistatic'");
            } else if (key == "dt") {
                expect_count(toks, 1);
                spec.dt = num(toks[1]);
            } else if (key == "duration") {
                expect_count(toks, 1);
                spec.duration = num(toks[1]);
            } else if (key == "tol") {
                expect_count(toks, 1);
                spec.tol = num(toks[1]);
            } else if (key == "seed") {
                expect_count(toks, 1);
                spec.seed = static_cast<unsigned long>(integer(toks[1]));
            } else if (key == "perturb") {
                expect_count(toks, 1);
                spec.perturb = num(toks[1]);
            } else if (key == "gravity") {
                const int c = read_vec(toks, spec.gravity);
                vec_uses.push_back({"gravity", head.line, head.col, c, 1});
            } else if (key == "initial_velocity") {
                const int c = read_vec(toks, spec.initial_velocity);
                vec_uses.push_back({"initial_velocity", head.line, head.col, c, 1});
            } else if (key == "initial_angular_velocity") {
                const int c = read_vec(toks, spec.initial_angular_velocity);
                vec_uses.push_back({"initial_angular_velocity", head.line, head.col, c, -1});
            } else if (key == "initial_scale") {
                const int c = read_vec(toks, spec.initial_scale);
                vec_uses.push_back({"initial_scale", head.line, head.col, c, 1});
            } else if (key == "mesh") {
                open_block(toks, false, Ctx::Mesh);
            } else if (key == "material") {
                open_block(toks, false, Ctx::Material);
            } else if (key == "plane") {
                cur_p = {};
                open_block(toks, false, Ctx::Plane);
            } else if (key == "dirichlet") {
                cur_d = {};
                open_block(toks, true, Ctx::Dirichlet);
                cur_d.set = toks[1].s;
            } else if (key == "select") {
                cur_s = {};
                open_block(toks, true, Ctx::Select);
                cur_s.name = toks[1].s;
            } else {
                parse_fail(head.line, head.col, "unknown key '" + key + "'");
            }
            continue;
        }

        if (key == "}") {
            if (toks.size() != 1) parse_fail(head.line, head.col, "'}' must stand alone");
            if (ctx == Ctx::Dirichlet) spec.dirichlet.push_back(cur_d);
            if (ctx == Ctx::Plane) spec.planes.push_back(cur_p);
            if (ctx == Ctx::Select) spec.selects.push_back(cur_s);
            ctx = Ctx::Top;
            continue;
        }

        switch (ctx) {
            case Ctx::Mesh:
                if (key == "generator") {
                    expect_count(toks, 1);
                    spec.mesh.generator = toks[1].s;
                } else if (key == "nx") {
                    expect_count(toks, 1);
                    spec.mesh.nx = static_cast<int>(integer(toks[1]));
                } else if (key == "ny") {
                    expect_count(toks, 1);
                    spec.mesh.ny = static_cast<int>(integer(toks[1]));
                } else if (key == "nz") {
                    expect_count(toks, 1);
                    spec.mesh.nz = static_cast<int>(integer(toks[1]));
                } else if (key == "size_x") {
                    expect_count(toks, 1);
                    spec.mesh.size_x = num(toks[1]);
                } else if (key == "size_y") {
                    expect_count(toks, 1);
                    spec.mesh.size_y = num(toks[1]);
                } else if (key == "size_z") {
                    expect_count(toks, 1);
                    spec.mesh.size_z = num(toks[1]);
                } else if (key == "origin") {
                    const int c = read_vec(toks, spec.mesh.origin);
                    vec_uses.push_back({"mesh.origin", head.line, head.col, c, 1});
                } else if (key == "thickness") {
                    expect_count(toks, 1);
                    spec.mesh.thickness = num(toks[1]);
                } else if (key == "density") {
                    expect_count(toks, 1);
                    spec.mesh.density = num(toks[1]);
                } else if (key == "spring_stiffness") {
                    expect_count(toks, 1);
                    spec.mesh.spring_stiffness = num(toks[1]);
                } else if (key == "node_mass") {
                    expect_count(toks, 1);
                    spec.mesh.node_mass = num(toks[1]);
                } else {
                    parse_fail(head.line, head.col, "unknown key '" + key + "' in mesh");
                }
                break;
            case Ctx::Material:
                if (key == "youngs_modulus") {
                    expect_count(toks, 1);
                    spec.material.youngs_modulus = num(toks[1]);
                } else if (key == "poisson_ratio") {
                    expect_count(toks, 1);
                    spec.material.poisson_ratio = num(toks[1]);
                } else {
                    parse_fail(head.line, head.col, "unknown key '" + key + "' in material");
                }
                break;
            case Ctx::Dirichlet:
                if (key == "stiffness") {
                    expect_count(toks, 1);
                    cur_d.stiffness = num(toks[1]);
                } else if (key == "until") {
                    expect_count(toks, 1);
                    cur_d.until = num(toks[1]);
                } else if (key == "keyframe") {
                    if (toks.size() < 3) parse_fail(head.line, head.col, "keyframe expects a time and offsets");
                    Keyframe kf;
                    kf.time = num(toks[1]);
                    const int c = static_cast<int>(toks.size()) - 2;
                    if (c > 3) parse_fail(head.line, head.col, "keyframe has too many components");
                    for (int i = 0; i < c; ++i) kf.offset[static_cast<std::size_t>(i)] = num(toks[static_cast<std::size_t>(i) + 2]);
                    vec_uses.push_back({"dirichlet.keyframe", head.line, head.col, c, 1});
                    cur_d.keyframes.push_back(kf);
                } else {
                    parse_fail(head.line, head.col, "unknown key '" + key + "' in dirichlet");
                }
                break;
            case Ctx::Plane:
                if (key == "normal") {
                    const int c = read_vec(toks, cur_p.normal);
                    vec_uses.push_back({"plane.normal", head.line, head.col, c, 1});
                } else if (key == "offset") {
                    expect_count(toks, 1);
                    cur_p.offset = num(toks[1]);
                } else if (key == "dhat") {
                    expect_count(toks, 1);
                    cur_p.dhat = num(toks[1]);
                } else if (key == "kappa") {
                    expect_count(toks, 1);
                    cur_p.kappa = num(toks[1]);
                } else {
                    parse_fail(head.line, head.col, "unknown key '" + key + "' in plane");
                }
                break;
            case Ctx::Select: {
                if (key == "box") {
                    const int c = static_cast<int>(toks.size()) - 1;
                    if (c != 4 && c != 6) parse_fail(head.line, head.col, "box expects lo and hi corners");
                    const int d = c / 2;
                    for (int i = 0; i < d; ++i) {
                        cur_s.lo[static_cast<std::size_t>(i)] = num(toks[static_cast<std::size_t>(i) + 1]);
                        cur_s.hi[static_cast<std::size_t>(i)] = num(toks[static_cast<std::size_t>(i + d) + 1]);
                    }
                    vec_uses.push_back({"select.box", head.line, head.col, d, 1});
                } else {
                    parse_fail(head.line, head.col, "unknown key '" + key + "' in select");
                }
                break;
            }
            case Ctx::Top:
                break;
        }
    }
    if (ctx != Ctx::Top) fail(ErrorCode::ParseError, "unexpected end of input: unclosed block");

    const int d = spec.dim();  // throws ValidationError on unknown generator
    for (const auto& u : vec_uses) {
        const int want = u.expected_factor < 0 ? (d == 2 ? 1 : 3) : u.expected_factor * d;
        if (u.count != want)
            parse_fail(u.line, u.col,
                       u.field + " expects " + std::to_string(want) + " components for this mesh");
    }

    spec.validate();
    return spec;
}

namespace {

void generate_block2d(const MeshSpec& m, std::vector<double>& rest,
                      std::vector<std::array<int, 3>>& tris, std::vector<double>& mass) {
    const int vx = m.nx + 1, vy = m.ny + 1;
    rest.resize(static_cast<std::size_t>(vx * vy) * 2);
    mass.assign(static_cast<std::size_t>(vx * vy), 0.0);
    auto id = [&](int i, int j) { return j * vx + i; };
    for (int j = 0; j < vy; ++j)
        for (int i = 0; i < vx; ++i) {
            rest[static_cast<std::size_t>(2 * id(i, j))] = m.origin[0] + m.size_x * i / m.nx;
            rest[static_cast<std::size_t>(2 * id(i, j) + 1)] = m.origin[1] + m.size_y * j / m.ny;
        }
    const double cell_area = (m.size_x / m.nx) * (m.size_y / m.ny);
    const double tri_mass = m.density * m.thickness * cell_area / 2.0;
    for (int j = 0; j < m.ny; ++j)
        for (int i = 0; i < m.nx; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            // alternate the diagonal per cell to keep the mesh mirror-friendly
            if ((i + j) % 2 == 0) {
                tris.push_back({v00, v10, v11});
                tris.push_back({v00, v11, v01});
            } else {
                tris.push_back({v00, v10, v01});
                tris.push_back({v10, v11, v01});
            }
            for (int t = 0; t < 2; ++t)
                for (int k = 0; k < 3; ++k)
                    mass[static_cast<std::size_t>(tris[tris.size() - 1 - static_cast<std::size_t>(t)][static_cast<std::size_t>(k)])] += tri_mass / 3.0;
        }
}

void generate_block3d(const MeshSpec& m, std::vector<double>& rest,
                      std::vector<std::array<int, 4>>& tets, std::vector<double>& mass) {
    const int vx = m.nx + 1, vy = m.ny + 1, vz = m.nz + 1;
    const int nv = vx * vy * vz;
    rest.resize(static_cast<std::size_t>(nv) * 3);
    mass.assign(static_cast<std::size_t>(nv), 0.0);
    auto id = [&](int i, int j, int k) { return (k * vy + j) * vx + i; };
    for (int k = 0; k < vz; ++k)
        for (int j = 0; j < vy; ++j)
            for (int i = 0; i < vx; ++i) {
                const std::size_t b = static_cast<std::size_t>(3 * id(i, j, k));
                rest[b] = m.origin[0] + m.size_x * i / m.nx;
                rest[b + 1] = m.origin[1] + m.size_y * j / m.ny;
                rest[b + 2] = m.origin[2] + m.size_z * k / m.nz;
            }
    // Kuhn subdivision: six tets per cube along the main diagonal.
    const int paths[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    auto orient = [&](std::array<int, 4>& t) {
        Eigen::Matrix3d dm;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r)
                dm(r, c) = rest[static_cast<std::size_t>(3 * t[static_cast<std::size_t>(c + 1)] + r)] - rest[static_cast<std::size_t>(3 * t[0] + r)];
        if (dm.determinant() < 0.0) std::swap(t[1], t[2]);
    };
    for (int k = 0; k < m.nz; ++k)
        for (int j = 0; j < m.ny; ++j)
            for (int i = 0; i < m.nx; ++i)
                for (const auto& p : paths) {
                    int ci = i, cj = j, ck = k;
                    std::array<int, 4> t{};
                    t[0] = id(ci, cj, ck);
                    for (int s = 0; s < 3; ++s) {
                        if (p[s] == 0) ++ci;
                        if (p[s] == 1) ++cj;
                        if (p[s] == 2) ++ck;
                        t[static_cast<std::size_t>(s + 1)] = id(ci, cj, ck);
                    }
                    orient(t);
                    tets.push_back(t);
                }
    const double cell_vol = (m.size_x / m.nx) * (m.size_y / m.ny) * (m.size_z / m.nz);
    const double tet_mass = m.density * cell_vol / 6.0;
    for (const auto& t : tets)
        for (int vtx : t) mass[static_cast<std::size_t>(vtx)] += tet_mass / 4.0;
}

void generate_chain2d(const MeshSpec& m, std::vector<double>& rest,
                      std::vector<std::array<int, 2>>& springs, std::vector<double>& mass) {
    const int nv = m.nx + 1;
    rest.resize(static_cast<std::size_t>(nv) * 2);
    mass.assign(static_cast<std::size_t>(nv), m.node_mass);
    for (int i = 0; i < nv; ++i) {
        rest[static_cast<std::size_t>(2 * i)] = m.origin[0] + m.size_x * i / m.nx;
        rest[static_cast<std::size_t>(2 * i + 1)] = m.origin[1];
    }
    for (int i = 0; i < m.nx; ++i) springs.push_back({i, i + 1});
}

} // namespace

BuiltScene build_scene(const SceneSpec& spec) {
    spec.validate();
    BuiltScene sc;
    sc.spec = spec;
    const int d = spec.dim();

    std::vector<double> mass;
    if (spec.mesh.generator == "block2d")
        generate_block2d(spec.mesh, sc.rest, sc.tris, mass);
    else if (spec.mesh.generator == "block3d")
        generate_block3d(spec.mesh, sc.rest, sc.tets, mass);
    else
        generate_chain2d(spec.mesh, sc.rest, sc.springs, mass);

    const int nv = static_cast<int>(mass.size());
    std::array<double, 3> lo{}, hi{};
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (int i = 0; i < nv; ++i)
        for (int c = 0; c < d; ++c) {
            const double p = sc.rest[static_cast<std::size_t>(i * d + c)];
            lo[static_cast<std::size_t>(c)] = std::min(lo[static_cast<std::size_t>(c)], p);
            hi[static_cast<std::size_t>(c)] = std::max(hi[static_cast<std::size_t>(c)], p);
        }
    double diag2 = 0.0;
    for (int c = 0; c < d; ++c) {
        const double e = hi[static_cast<std::size_t>(c)] - lo[static_cast<std::size_t>(c)];
        diag2 += e * e;
    }
    sc.domain_size = std::sqrt(diag2);
    if (!(sc.domain_size > 0.0)) sc.domain_size = 1.0;

    for (const auto& sel : spec.selects) {
        std::vector<int> ids;
        for (int i = 0; i < nv; ++i) {
            bool inside = true;
            for (int c = 0; c < d; ++c) {
                const double p = sc.rest[static_cast<std::size_t>(i * d + c)];
                inside = inside && p >= sel.lo[static_cast<std::size_t>(c)] && p <= sel.hi[static_cast<std::size_t>(c)];
            }
            if (inside) ids.push_back(i);
        }
        if (ids.empty()) fail(ErrorCode::ValidationError, "select '" + sel.name + "': matches no vertices");
        sc.sets.emplace(sel.name, std::move(ids));
    }

    sc.initial.dim = d;
    sc.initial.mass = std::move(mass);
    sc.initial.x = sc.rest;
    for (int i = 0; i < nv; ++i)
        for (int c = 0; c < d; ++c) {
            double& p = sc.initial.x[static_cast<std::size_t>(i * d + c)];
            const double o = spec.mesh.origin[static_cast<std::size_t>(c)];
            p = o + (p - o) * spec.initial_scale[static_cast<std::size_t>(c)];
        }
    if (spec.perturb > 0.0) {
        std::mt19937_64 rng(spec.seed);
        std::uniform_real_distribution<double> u(-spec.perturb, spec.perturb);
        for (auto& p : sc.initial.x) p += u(rng);
    }
    sc.initial.v.assign(sc.initial.x.size(), 0.0);
    for (int i = 0; i < nv; ++i)
        for (int c = 0; c < d; ++c)
            sc.initial.v[static_cast<std::size_t>(i * d + c)] = spec.initial_velocity[static_cast<std::size_t>(c)];
    const auto& w = spec.initial_angular_velocity;
    if (w[0] != 0.0 || w[1] != 0.0 || w[2] != 0.0) {
        std::array<double, 3> com{};
        double m_total = 0.0;
        for (int i = 0; i < nv; ++i) {
            const double m = sc.initial.mass[static_cast<std::size_t>(i)];
            m_total += m;
            for (int c = 0; c < d; ++c) com[static_cast<std::size_t>(c)] += m * sc.initial.x[static_cast<std::size_t>(i * d + c)];
        }
        for (int c = 0; c < d; ++c) com[static_cast<std::size_t>(c)] /= m_total;
        for (int i = 0; i < nv; ++i) {
            std::array<double, 3> r{};
            for (int c = 0; c < d; ++c)
                r[static_cast<std::size_t>(c)] = sc.initial.x[static_cast<std::size_t>(i * d + c)] - com[static_cast<std::size_t>(c)];
            if (d == 2) {
                sc.initial.v[static_cast<std::size_t>(i * 2 + 0)] += -w[0] * r[1];
                sc.initial.v[static_cast<std::size_t>(i * 2 + 1)] += w[0] * r[0];
            } else {
                sc.initial.v[static_cast<std::size_t>(i * 3 + 0)] += w[1] * r[2] - w[2] * r[1];
                sc.initial.v[static_cast<std::size_t>(i * 3 + 1)] += w[2] * r[0] - w[0] * r[2];
                sc.initial.v[static_cast<std::size_t>(i * 3 + 2)] += w[0] * r[1] - w[1] * r[0];
            }
        }
    }
    sc.initial.t = 0.0;
    return sc;
}

StepConfig step_config(const BuiltScene& scene) {
    StepConfig cfg;
    cfg.dt = scene.spec.dt;
    cfg.mode = scene.spec.mode;
    cfg.tol_v = scene.spec.tol;
    cfg.gravity = scene.spec.gravity;
    cfg.domain_size = scene.domain_size;
    return cfg;
}

ElementSystem build_step_elements(const BuiltScene& scene, const SimState& state,
                                  const StepConfig& config, std::span<const double> xtilde,
                                  double t_next) {
    const int d = scene.dim();
    ElementSystem sys;
    sys.dim = d;
    sys.n_nodes = state.n_nodes();

    for (const auto& t : scene.tris) {
        Eigen::Matrix<double, 2, 3> rp;
        for (int k = 0; k < 3; ++k)
            for (int c = 0; c < 2; ++c) rp(c, k) = scene.rest[static_cast<std::size_t>(t[static_cast<std::size_t>(k)] * 2 + c)];
        sys.add(std::make_unique<NeoHookeanTriElement>(t, rp, scene.spec.mesh.thickness, scene.spec.material));
    }
    for (const auto& t : scene.tets) {
        Eigen::Matrix<double, 3, 4> rp;
        for (int k = 0; k < 4; ++k)
            for (int c = 0; c < 3; ++c) rp(c, k) = scene.rest[static_cast<std::size_t>(t[static_cast<std::size_t>(k)] * 3 + c)];
        sys.add(std::make_unique<StableNeoHookeanTetElement>(t, rp, scene.spec.material));
    }
    for (const auto& s : scene.springs) {
        double l2 = 0.0;
        for (int c = 0; c < d; ++c) {
            const double e = scene.rest[static_cast<std::size_t>(s[0] * d + c)] - scene.rest[static_cast<std::size_t>(s[1] * d + c)];
            l2 += e * e;
        }
        sys.add(std::make_unique<SpringElement>(s[0], s[1], d, std::sqrt(l2), scene.spec.mesh.spring_stiffness));
    }

    for (const auto& ds : scene.spec.dirichlet) {
        if (t_next > ds.until) continue;
        const std::array<double, 3> off = ds.offset_at(t_next);
        for (int v : scene.sets.at(ds.set)) {
            std::array<double, 3> target{};
            for (int c = 0; c < d; ++c)
                target[static_cast<std::size_t>(c)] = scene.rest[static_cast<std::size_t>(v * d + c)] + off[static_cast<std::size_t>(c)];
            sys.add(std::make_unique<DirichletElement>(v, d, std::span<const double>(target.data(), static_cast<std::size_t>(d)), ds.stiffness));
        }
    }

    if (!scene.spec.planes.empty()) {
        double travel = 0.0;
        if (config.mode == SimMode::Dynamic) {
            for (std::size_t i = 0; i < state.x.size(); ++i)
                travel = std::max(travel, std::abs(xtilde[i] - state.x[i]));
        } else {
            travel = 1e-2 * config.domain_size;
        }
        for (const auto& pl : scene.spec.planes) {
            std::array<double, 3> n = pl.normal;
            double n2 = 0.0;
            for (int c = 0; c < d; ++c) n2 += n[static_cast<std::size_t>(c)] * n[static_cast<std::size_t>(c)];
            const double inv = 1.0 / std::sqrt(n2);
            for (int c = 0; c < d; ++c) n[static_cast<std::size_t>(c)] *= inv;

            const double margin = pl.dhat + 4.0 * travel;
            BarrierParams bp{pl.dhat, pl.kappa};
            for (int v = 0; v < sys.n_nodes; ++v) {
                double dist = -pl.offset;
                for (int c = 0; c < d; ++c) dist += n[static_cast<std::size_t>(c)] * state.x[static_cast<std::size_t>(v * d + c)];
                if (dist < margin)
                    sys.add(std::make_unique<HalfspaceBarrierElement>(
                        v, d, std::span<const double>(n.data(), static_cast<std::size_t>(d)), pl.offset, bp));
            }
        }
    }

    if (config.mode == SimMode::Dynamic) {
        for (int v = 0; v < sys.n_nodes; ++v)
            sys.add(std::make_unique<InertiaElement>(
                v, d, state.mass[static_cast<std::size_t>(v)], config.dt,
                xtilde.subspan(static_cast<std::size_t>(v * d), static_cast<std::size_t>(d))));
    }
    return sys;
}

} // namespace ppn
