#include "doctest.h"

#include <fstream>
#include <sstream>

#include "core/scene.hpp"
#include "test_support.hpp"

using namespace ppn;

namespace {

template <class F>
void check_error(F&& f, ErrorCode code, const std::string& msg) {
    try {
        f();
        FAIL_CHECK("expected an Error: " << msg);
    } catch (const Error& e) {
        CHECK(e.code() == code);
        CHECK(std::string(e.what()) == msg);
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_named(const ElementSystem& sys, const char* name) {
    int n = 0;
    for (const auto& el : sys.elements)
        if (std::string(el->name()) == name) ++n;
    return n;
}

} // namespace

TEST_CASE("an empty scene parses to the documented defaults") {
    const SceneSpec spec = parse_scene("");
    CHECK(spec.schema_version == 1);
    CHECK(spec.mode == SimMode::Dynamic);
    CHECK(spec.dt == 1.0 / 30.0);
    CHECK(spec.duration == 1.0);
    CHECK(spec.tol == 1e-3);
    CHECK(spec.gravity == std::array<double, 3>{0.0, -9.81, 0.0});
    CHECK(spec.mesh.generator == "block2d");
    CHECK(spec.material.youngs_modulus == 1e5);
    CHECK(spec.dim() == 2);
}

TEST_CASE("a full scene round-trips every field") {
    const std::string text = R"(# header comment
schema_version 1
name demo   # trailing comment
mode quasistatic
dt 0.05
duration 0.4
tol 2e-3
gravity 0.5 -3
seed 42
perturb 1e-4
initial_velocity 0.1 0.2
initial_angular_velocity -2.5
initial_scale 1.5 0.75

mesh {
  generator block2d
  nx 3
  ny 2
  size_x 0.3
  size_y 0.2
  origin 0.1 -0.05
  thickness 0.02
  density 1250
}

material {
  youngs_modulus 2e6
  poisson_ratio 0.3
}

select left {
  box 0.09 -0.06 0.11 0.16
}

dirichlet left {
  stiffness 5e7
  until 0.35
  keyframe 0.25 1 2
  keyframe 0.75 3 -2
}

plane {
  normal 0 2
  offset -0.1
  dhat 1e-3
  kappa 2e4
}
)";
    const SceneSpec spec = parse_scene(text);
    CHECK(spec.name == "demo");
    CHECK(spec.mode == SimMode::Quasistatic);
    CHECK(spec.dt == 0.05);
    CHECK(spec.duration == 0.4);
    CHECK(spec.tol == 2e-3);
    CHECK(spec.gravity == std::array<double, 3>{0.5, -3.0, 0.0});
    CHECK(spec.seed == 42);
    CHECK(spec.perturb == 1e-4);
    CHECK(spec.initial_velocity == std::array<double, 3>{0.1, 0.2, 0.0});
    CHECK(spec.initial_angular_velocity == std::array<double, 3>{-2.5, 0.0, 0.0});
    CHECK(spec.initial_scale == std::array<double, 3>{1.5, 0.75, 0.0});
    CHECK(spec.mesh.nx == 3);
    CHECK(spec.mesh.ny == 2);
    CHECK(spec.mesh.size_x == 0.3);
    CHECK(spec.mesh.origin == std::array<double, 3>{0.1, -0.05, 0.0});
    CHECK(spec.mesh.thickness == 0.02);
    CHECK(spec.mesh.density == 1250.0);
    CHECK(spec.material.youngs_modulus == 2e6);
    CHECK(spec.material.poisson_ratio == 0.3);
    REQUIRE(spec.selects.size() == 1);
    CHECK(spec.selects[0].name == "left");
    CHECK(spec.selects[0].lo == std::array<double, 3>{0.09, -0.06, 0.0});
    CHECK(spec.selects[0].hi == std::array<double, 3>{0.11, 0.16, 0.0});
    REQUIRE(spec.dirichlet.size() == 1);
    CHECK(spec.dirichlet[0].set == "left");
    CHECK(spec.dirichlet[0].stiffness == 5e7);
    CHECK(spec.dirichlet[0].until == 0.35);
    REQUIRE(spec.dirichlet[0].keyframes.size() == 2);
    CHECK(spec.dirichlet[0].keyframes[0].time == 0.25);
    CHECK(spec.dirichlet[0].keyframes[1].offset == std::array<double, 3>{3.0, -2.0, 0.0});
    REQUIRE(spec.planes.size() == 1);
    CHECK(spec.planes[0].normal == std::array<double, 3>{0.0, 2.0, 0.0});
    CHECK(spec.planes[0].offset == -0.1);
    CHECK(spec.planes[0].dhat == 1e-3);
    CHECK(spec.planes[0].kappa == 2e4);
}

TEST_CASE("parse errors carry line and column") {
    check_error([] { parse_scene("schema_version 1\nbogus 3\n"); }, ErrorCode::ParseError,
                "line 2, col 1: unknown key 'bogus'");
    check_error([] { parse_scene("dt abc\n"); }, ErrorCode::ParseError,
                "line 1, col 4: expected a number, got 'abc'");
    check_error([] { parse_scene("mesh {\nnx 2.5\n}\n"); }, ErrorCode::ParseError,
                "line 2, col 4: expected an integer, got '2.5'");
    check_error([] { parse_scene("mode static\n"); }, ErrorCode::ParseError,
                "line 1, col 6: mode must be 'dynamic' or 'quasistatic'");
    check_error([] { parse_scene("mesh {\nfoo 1\n}\n"); }, ErrorCode::ParseError,
                "line 2, col 1: unknown key 'foo' in mesh");
    check_error([] { parse_scene("dt 0.1 0.2\n"); }, ErrorCode::ParseError,
                "line 1, col 1: 'dt' expects 1 value(s)");
    check_error([] { parse_scene("mesh { nx 2 }\n"); }, ErrorCode::ParseError,
                "line 1, col 1: expected 'mesh {'");
    check_error([] { parse_scene("select left\nbox 0 0 1 1\n"); }, ErrorCode::ParseError,
                "line 1, col 1: expected 'select <name> {'");
    check_error([] { parse_scene("mesh {\n} trailing\n"); }, ErrorCode::ParseError,
                "line 2, col 1: '}' must stand alone");
    check_error([] { parse_scene("mesh {\nnx 2\n"); }, ErrorCode::ParseError,
                "unexpected end of input: unclosed block");
    check_error(
        [] { parse_scene("select s {\nbox 0 0 1\n}\n"); }, ErrorCode::ParseError,
        "line 2, col 1: box expects lo and hi corners");
    check_error(
        [] {
            parse_scene("select s {\nbox 0 0 1 1\n}\ndirichlet s {\nkeyframe 0.5\n}\n");
        },
        ErrorCode::ParseError, "line 5, col 1: keyframe expects a time and offsets");
}

TEST_CASE("vector arity is checked against the mesh dimension") {
    check_error([] { parse_scene("gravity 1 2 3\n"); }, ErrorCode::ParseError,
                "line 1, col 1: gravity expects 2 components for this mesh");
    check_error([] { parse_scene("mesh {\ngenerator block3d\n}\ngravity 1 2\n"); },
                ErrorCode::ParseError, "line 4, col 1: gravity expects 3 components for this mesh");
    // angular velocity is a scalar in 2D and an axis vector in 3D
    check_error([] { parse_scene("initial_angular_velocity 1 2\n"); }, ErrorCode::ParseError,
                "line 1, col 1: initial_angular_velocity expects 1 components for this mesh");
    CHECK(parse_scene("initial_angular_velocity 3\n").initial_angular_velocity[0] == 3.0);
    const SceneSpec spec3 =
        parse_scene("mesh {\ngenerator block3d\n}\ninitial_angular_velocity 1 0 2\n");
    CHECK(spec3.initial_angular_velocity == std::array<double, 3>{1.0, 0.0, 2.0});
    check_error(
        [] { parse_scene("mesh {\ngenerator block3d\n}\ninitial_angular_velocity 5\n"); },
        ErrorCode::ParseError,
        "line 4, col 1: initial_angular_velocity expects 3 components for this mesh");
}

TEST_CASE("validation rejects bad scenes with named fields") {
    check_error([] { parse_scene("dt 0\n"); }, ErrorCode::ValidationError, "dt: must be > 0");
    check_error([] { parse_scene("schema_version 2\n"); }, ErrorCode::ValidationError,
                "schema_version: expected 1");
    check_error([] { parse_scene("mode quasistatic\n"); }, ErrorCode::ValidationError,
                "mode: quasistatic scenes need a dirichlet anchor");
    check_error([] { parse_scene("mesh {\ngenerator tri6\n}\n"); }, ErrorCode::ValidationError,
                "mesh.generator: unknown generator 'tri6'");
    check_error([] { parse_scene("select s {\nbox 1 0 0 1\n}\n"); }, ErrorCode::ValidationError,
                "select 's': box lo must not exceed hi");
    check_error(
        [] { parse_scene("select s {\nbox 0 0 1 1\n}\ndirichlet s {\nstiffness 1e7\nkeyframe 0.5 0 0\nkeyframe 0.5 1 0\n}\n"); },
        ErrorCode::ValidationError, "dirichlet 's': keyframe times must strictly increase");
    check_error(
        [] { parse_scene("dirichlet ghost {\nkeyframe 0 0 0\n}\n"); }, ErrorCode::ValidationError,
        "dirichlet: unknown vertex set 'ghost'");
    check_error([] { parse_scene("initial_scale 0 1\n"); }, ErrorCode::ValidationError,
                "initial_scale: factors must be > 0");
    CHECK_THROWS_AS(parse_scene("material {\npoisson_ratio 0.5\n}\n"), Error);
}

TEST_CASE("keyframe offsets interpolate linearly and clamp at the ends") {
    DirichletScript ds;
    ds.keyframes = {{0.25, {1.0, 2.0, 0.0}}, {0.75, {3.0, -2.0, 0.0}}};
    CHECK(ds.offset_at(0.0) == std::array<double, 3>{1.0, 2.0, 0.0});
    CHECK(ds.offset_at(0.25) == std::array<double, 3>{1.0, 2.0, 0.0});
    CHECK(ds.offset_at(0.5) == std::array<double, 3>{2.0, 0.0, 0.0});  // dyadic midpoint, exact
    CHECK(ds.offset_at(0.75) == std::array<double, 3>{3.0, -2.0, 0.0});
    CHECK(ds.offset_at(9.0) == std::array<double, 3>{3.0, -2.0, 0.0});
}

TEST_CASE("block2d generator: grid, triangle orientation and lumped mass") {
    SceneSpec spec = parse_scene(R"(
mesh {
  generator block2d
  nx 3
  ny 2
  size_x 0.3
  size_y 0.2
  origin 0.1 -0.05
  thickness 0.02
  density 1250
}
)");
    const BuiltScene sc = build_scene(spec);
    CHECK(sc.dim() == 2);
    CHECK(sc.initial.n_nodes() == 4 * 3);
    CHECK(sc.tris.size() == 2u * 3u * 2u);
    CHECK(sc.tets.empty());
    CHECK(sc.springs.empty());

    // vertex (i, j) sits at origin + size * (i/nx, j/ny)
    for (int j = 0; j <= 2; ++j)
        for (int i = 0; i <= 3; ++i) {
            const int v = j * 4 + i;
            CHECK(sc.rest[static_cast<std::size_t>(2 * v)] == 0.1 + 0.3 * i / 3);
            CHECK(sc.rest[static_cast<std::size_t>(2 * v + 1)] == -0.05 + 0.2 * j / 2);
        }

    // all triangles wind counter-clockwise in rest coordinates
    for (const auto& t : sc.tris) {
        const double ax = sc.rest[static_cast<std::size_t>(2 * t[1])] - sc.rest[static_cast<std::size_t>(2 * t[0])];
        const double ay = sc.rest[static_cast<std::size_t>(2 * t[1] + 1)] - sc.rest[static_cast<std::size_t>(2 * t[0] + 1)];
        const double bx = sc.rest[static_cast<std::size_t>(2 * t[2])] - sc.rest[static_cast<std::size_t>(2 * t[0])];
        const double by = sc.rest[static_cast<std::size_t>(2 * t[2] + 1)] - sc.rest[static_cast<std::size_t>(2 * t[0] + 1)];
        CHECK(ax * by - ay * bx > 0.0);
    }

    double m = 0.0;
    for (double v : sc.initial.mass) m += v;
    CHECK(m == doctest::Approx(1250.0 * 0.02 * 0.3 * 0.2).epsilon(1e-12));

    CHECK(sc.domain_size == doctest::Approx(std::sqrt(0.3 * 0.3 + 0.2 * 0.2)).epsilon(1e-15));
}

TEST_CASE("block3d generator: positively oriented tets and exact volume mass") {
    SceneSpec spec = parse_scene(R"(
mesh {
  generator block3d
  nx 2
  ny 2
  nz 2
  size_x 0.2
  size_y 0.2
  size_z 0.2
  density 1000
}
)");
    const BuiltScene sc = build_scene(spec);
    CHECK(sc.dim() == 3);
    CHECK(sc.initial.n_nodes() == 27);
    CHECK(sc.tets.size() == 6u * 8u);
    for (const auto& t : sc.tets) {
        Eigen::Matrix3d dm;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r)
                dm(r, c) = sc.rest[static_cast<std::size_t>(3 * t[static_cast<std::size_t>(c + 1)] + r)] -
                           sc.rest[static_cast<std::size_t>(3 * t[0] + r)];
        CHECK(dm.determinant() > 0.0);
    }
    double m = 0.0;
    for (double v : sc.initial.mass) m += v;
    CHECK(m == doctest::Approx(1000.0 * 0.008).epsilon(1e-12));
}

TEST_CASE("chain2d generator: a line of point masses joined by springs") {
    SceneSpec spec = parse_scene(R"(
mesh {
  generator chain2d
  nx 5
  size_x 1.0
  origin 0 0.4
  node_mass 0.2
  spring_stiffness 80
}
)");
    const BuiltScene sc = build_scene(spec);
    CHECK(sc.initial.n_nodes() == 6);
    REQUIRE(sc.springs.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(sc.springs[static_cast<std::size_t>(i)] == std::array<int, 2>{i, i + 1});
    for (int i = 0; i < 6; ++i) {
        CHECK(sc.rest[static_cast<std::size_t>(2 * i)] == 1.0 * i / 5);
        CHECK(sc.rest[static_cast<std::size_t>(2 * i + 1)] == 0.4);
        CHECK(sc.initial.mass[static_cast<std::size_t>(i)] == 0.2);
    }
}

TEST_CASE("selects are inclusive boxes over rest positions; empty fails") {
    const std::string base = R"(
mesh {
  generator block2d
  nx 2
  ny 1
  size_x 0.2
  size_y 0.1
  origin 0 0
}
)";
    const BuiltScene sc = build_scene(parse_scene(base + "select left {\nbox -0.01 -0.01 0 0.1\n}\n"));
    // the box's hi edge passes exactly through the x = 0 column: inclusive
    REQUIRE(sc.sets.count("left") == 1);
    CHECK(sc.sets.at("left") == std::vector<int>{0, 3});

    CHECK_THROWS_AS(build_scene(parse_scene(base + "select void {\nbox 5 5 6 6\n}\n")), Error);
    check_error([&] { build_scene(parse_scene(base + "select void {\nbox 5 5 6 6\n}\n")); },
                ErrorCode::ValidationError, "select 'void': matches no vertices");
}

TEST_CASE("initial_scale stretches the start positions about the mesh origin") {
    SceneSpec spec = parse_scene(R"(
initial_scale 2 0.5
mesh {
  generator block2d
  nx 1
  ny 1
  size_x 0.1
  size_y 0.1
  origin 0.1 -0.05
}
)");
    const BuiltScene sc = build_scene(spec);
    for (int v = 0; v < sc.initial.n_nodes(); ++v) {
        const double rx = sc.rest[static_cast<std::size_t>(2 * v)];
        const double ry = sc.rest[static_cast<std::size_t>(2 * v + 1)];
        CHECK(sc.initial.x[static_cast<std::size_t>(2 * v)] == 0.1 + (rx - 0.1) * 2.0);
        CHECK(sc.initial.x[static_cast<std::size_t>(2 * v + 1)] == -0.05 + (ry - -0.05) * 0.5);
    }
    // rest positions and the domain size are untouched by the scaling
    CHECK(sc.rest[0] == 0.1);
    CHECK(sc.domain_size == doctest::Approx(std::sqrt(0.02)).epsilon(1e-15));
}

TEST_CASE("perturbation is seeded, bounded and deterministic") {
    const std::string base = R"(
perturb 1e-3
mesh {
  generator block2d
  nx 2
  ny 2
  size_x 0.1
  size_y 0.1
}
)";
    const BuiltScene a = build_scene(parse_scene("seed 7\n" + base));
    const BuiltScene b = build_scene(parse_scene("seed 7\n" + base));
    CHECK(a.initial.x == b.initial.x);

    bool moved = false;
    for (std::size_t i = 0; i < a.initial.x.size(); ++i) {
        const double d = std::abs(a.initial.x[i] - a.rest[i]);
        CHECK(d <= 1e-3);
        moved = moved || d > 0.0;
    }
    CHECK(moved);

    const BuiltScene c = build_scene(parse_scene("seed 8\n" + base));
    CHECK(a.initial.x != c.initial.x);
}

TEST_CASE("initial velocities: uniform part plus rigid spin about the centroid") {
    SceneSpec spec = parse_scene(R"(
initial_velocity 0.3 -0.1
initial_angular_velocity 4
mesh {
  generator chain2d
  nx 4
  size_x 1.0
  origin 0 0
  node_mass 0.2
}
)");
    const BuiltScene sc = build_scene(spec);
    const int nv = sc.initial.n_nodes();

    // mirror of the documented construction: mass-weighted centroid of the
    // initial positions, then v += w x r
    std::array<double, 2> com{};
    double m_total = 0.0;
    for (int i = 0; i < nv; ++i) {
        const double m = sc.initial.mass[static_cast<std::size_t>(i)];
        m_total += m;
        for (int c = 0; c < 2; ++c) com[static_cast<std::size_t>(c)] += m * sc.initial.x[static_cast<std::size_t>(i * 2 + c)];
    }
    for (int c = 0; c < 2; ++c) com[static_cast<std::size_t>(c)] /= m_total;
    for (int i = 0; i < nv; ++i) {
        const double rx = sc.initial.x[static_cast<std::size_t>(2 * i)] - com[0];
        const double ry = sc.initial.x[static_cast<std::size_t>(2 * i + 1)] - com[1];
        CHECK(sc.initial.v[static_cast<std::size_t>(2 * i)] == 0.3 + -4.0 * ry);
        CHECK(sc.initial.v[static_cast<std::size_t>(2 * i + 1)] == -0.1 + 4.0 * rx);
    }

    // the spin adds no net momentum
    double px = 0.0, py = 0.0;
    for (int i = 0; i < nv; ++i) {
        px += sc.initial.mass[static_cast<std::size_t>(i)] * sc.initial.v[static_cast<std::size_t>(2 * i)];
        py += sc.initial.mass[static_cast<std::size_t>(i)] * sc.initial.v[static_cast<std::size_t>(2 * i + 1)];
    }
    CHECK(px == doctest::Approx(m_total * 0.3).epsilon(1e-12));
    CHECK(py == doctest::Approx(m_total * -0.1).epsilon(1e-12));
}

TEST_CASE("step_config carries the scene solve settings") {
    SceneSpec spec = parse_scene("dt 0.02\ntol 5e-4\ngravity 1 -2\n");
    const BuiltScene sc = build_scene(spec);
    const StepConfig cfg = step_config(sc);
    CHECK(cfg.dt == 0.02);
    CHECK(cfg.mode == SimMode::Dynamic);
    CHECK(cfg.tol_v == 5e-4);
    CHECK(cfg.gravity == std::array<double, 3>{1.0, -2.0, 0.0});
    CHECK(cfg.domain_size == sc.domain_size);
}

TEST_CASE("build_step_elements assembles the documented element mix") {
    SceneSpec spec = parse_scene(R"(
dt 0.01
mesh {
  generator block2d
  nx 1
  ny 1
  size_x 0.1
  size_y 0.1
  origin 0 0
}
select left {
  box -0.01 -0.01 0.01 0.11
}
dirichlet left {
  stiffness 1e7
  until 0.5
  keyframe 0.0 0 0
  keyframe 1.0 0.5 0
}
plane {
  normal 0 3
  offset 0
  dhat 1e-3
  kappa 1e4
}
)");
    const BuiltScene sc = build_scene(spec);
    const StepConfig cfg = step_config(sc);
    const int nv = sc.initial.n_nodes();
    REQUIRE(nv == 4);

    SUBCASE("dynamic composition, resting state") {
        const std::vector<double> xt = sc.initial.x;  // zero travel
        const ElementSystem sys = build_step_elements(sc, sc.initial, cfg, xt, 0.01);
        CHECK(count_named(sys, "neohookean_tri") == 2);
        CHECK(count_named(sys, "dirichlet") == 2);
        // margin = dhat: only the two floor-level vertices are near the plane
        CHECK(count_named(sys, "halfspace_barrier") == 2);
        CHECK(count_named(sys, "inertia") == nv);
        CHECK(std::string(sys.elements.back()->name()) == "inertia");
    }

    SUBCASE("trajectory travel widens the barrier margin") {
        std::vector<double> xt = sc.initial.x;
        xt[1] += 0.03;  // max |xtilde - x| = 0.03 -> margin 0.121 spans the block
        const ElementSystem sys = build_step_elements(sc, sc.initial, cfg, xt, 0.01);
        CHECK(count_named(sys, "halfspace_barrier") == nv);
    }

    SUBCASE("dirichlet scripts expire after 'until'") {
        const std::vector<double> xt = sc.initial.x;
        const ElementSystem sys = build_step_elements(sc, sc.initial, cfg, xt, 0.6);
        CHECK(count_named(sys, "dirichlet") == 0);
    }

    SUBCASE("dirichlet targets follow the keyframe offsets") {
        const std::vector<double> xt = sc.initial.x;
        const ElementSystem sys = build_step_elements(sc, sc.initial, cfg, xt, 0.25);
        // at t = 0.25 the scripted offset is (0.125, 0): placing the anchored
        // vertices there zeroes the penalty energy
        std::vector<double> x = sc.initial.x;
        for (int v : sc.sets.at("left")) x[static_cast<std::size_t>(2 * v)] += 0.125;
        ElementEval ev;
        for (const auto& el : sys.elements)
            if (std::string(el->name()) == "dirichlet") {
                REQUIRE(el->eval(x, EvalMode::EnergyOnly, ev));
                CHECK(ev.energy == 0.0);
            }
    }

    SUBCASE("quasistatic mode: no inertia, domain-scaled barrier margin") {
        StepConfig qs = cfg;
        qs.mode = SimMode::Quasistatic;
        const std::vector<double> xt = sc.initial.x;
        const ElementSystem sys = build_step_elements(sc, sc.initial, qs, xt, 0.01);
        CHECK(count_named(sys, "inertia") == 0);
        // travel = 1% of the domain diagonal: margin ~ 6.7mm, still only the
        // floor row within reach
        CHECK(count_named(sys, "halfspace_barrier") == 2);
    }
}

TEST_CASE("the shipped scene corpus parses and builds") {
    const std::vector<std::string> names = {"slingshot2d", "press2d",  "stretch2d", "roll2d",
                                            "beamflick2d", "drop3d",   "buckle2d",  "convex2d"};
    for (const auto& n : names) {
        CAPTURE(n);
        const SceneSpec spec = parse_scene(slurp(test::scenes_dir() + "/" + n + ".scene"));
        CHECK(spec.name == n);
        const BuiltScene sc = build_scene(spec);
        CHECK(sc.initial.n_nodes() > 0);
        CHECK_NOTHROW(sc.initial.check());
        const StepConfig cfg = step_config(sc);
        const std::vector<double> xt = predict(sc.initial, cfg);
        const ElementSystem sys = build_step_elements(sc, sc.initial, cfg, xt, spec.dt);
        CHECK(!sys.elements.empty());
    }

    const SceneSpec press = parse_scene(slurp(test::scenes_dir() + "/press2d.scene"));
    CHECK(press.dirichlet.size() == 2);
    CHECK(press.planes.size() == 1);
    const SceneSpec drop = parse_scene(slurp(test::scenes_dir() + "/drop3d.scene"));
    CHECK(drop.dim() == 3);
    const SceneSpec stretch = parse_scene(slurp(test::scenes_dir() + "/stretch2d.scene"));
    CHECK(stretch.mode == SimMode::Quasistatic);
    CHECK(stretch.material.poisson_ratio == 0.49);
}
