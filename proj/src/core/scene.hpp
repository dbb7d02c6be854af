#pragma once

#include <map>
#include <string>

#include "core/energies.hpp"
#include "core/integrator.hpp"

namespace ppn {

struct Keyframe {
    double time = 0.0;
    std::array<double, 3> offset{};  // displacement from rest, piecewise-linear in time
};

struct DirichletScript {
    std::string set;
    double stiffness = 1e8;
    std::vector<Keyframe> keyframes;
    double until = std::numeric_limits<double>::infinity();  // element dropped after this time

    std::array<double, 3> offset_at(double t) const;
};

struct ContactPlane {
    std::array<double, 3> normal{0.0, 1.0, 0.0};
    double offset = 0.0;  // plane is n.x = offset, admissible side n.x > offset
    double dhat = 5e-4;
    double kappa = 1e4;
};

struct SelectBox {
    std::string name;
    std::array<double, 3> lo{}, hi{};  // axis-aligned box in rest coordinates
};

struct MeshSpec {
    std::string generator = "block2d";  // block2d | block3d | chain2d
    int nx = 4, ny = 2, nz = 2;         // cells per axis
    double size_x = 0.4, size_y = 0.2, size_z = 0.2;
    std::array<double, 3> origin{};
    double thickness = 0.01;  // block2d
    double density = 1000.0;
    double spring_stiffness = 100.0;  // chain2d
    double node_mass = 0.1;           // chain2d
};

struct SceneSpec {
    int schema_version = 1;
    std::string name;
    SimMode mode = SimMode::Dynamic;
    double dt = 1.0 / 30.0;
    double duration = 1.0;
    double tol = 1e-3;  // m/s (dynamic); quasistatic uses the domain criterion
    std::array<double, 3> gravity{};
    unsigned long seed = 0;
    double perturb = 0.0;  // uniform jitter amplitude on initial positions
    std::array<double, 3> initial_velocity{};
    // Rigid spin about the mass centroid added to the initial velocities:
    // one scalar (rad/s about z) in 2D, a full axis vector in 3D.
    std::array<double, 3> initial_angular_velocity{};
    // Scale factors applied to the initial positions about the mesh origin
    // (rest positions stay untouched): a large initial deformation for
    // quasistatic experiments.
    std::array<double, 3> initial_scale = {1.0, 1.0, 1.0};
    MeshSpec mesh;
    MaterialParams material;
    std::vector<SelectBox> selects;
    std::vector<DirichletScript> dirichlet;
    std::vector<ContactPlane> planes;

    int dim() const;
    void validate() const;
};

// Parses the documented key-value schema. ParseError carries line/column;
// ValidationError names the offending field. Unknown keys are errors.
SceneSpec parse_scene(const std::string& text);

struct BuiltScene {
    SceneSpec spec;
    SimState initial;
    std::vector<double> rest;
    double domain_size = 1.0;  // rest bounding-box diagonal
    std::vector<std::array<int, 3>> tris;
    std::vector<std::array<int, 4>> tets;
    std::vector<std::array<int, 2>> springs;
    std::map<std::string, std::vector<int>> sets;

    int dim() const { return initial.dim; }
};

BuiltScene build_scene(const SceneSpec& spec);

StepConfig step_config(const BuiltScene& scene);

// Element set for one solve at script time t_next: elastic elements, active
// Dirichlet penalties, proximity-culled contact barriers, and (dynamic mode)
// per-vertex inertia targeted at xtilde.
ElementSystem build_step_elements(const BuiltScene& scene, const SimState& state,
                                  const StepConfig& config, std::span<const double> xtilde,
                                  double t_next);

} // namespace ppn
