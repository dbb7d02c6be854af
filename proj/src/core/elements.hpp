#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "core/smalldense.hpp"

namespace ppn {

struct LocalVec {
    int n = 0;
    std::array<double, kMaxLocalDim> v{};

    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    void set_zero(int n_) {
        n = n_;
        v.fill(0.0);
    }
};

// Global node indices touched by one element; local DOFs are laid out
// node-major ([node0.x, node0.y, ..., node1.x, ...]).
struct ElementStencil {
    int element_id = 0;
    std::vector<int> nodes;  // sorted, unique
};

struct ElementEval {
    double energy = 0.0;
    LocalVec grad;
    SymMatrix hess;
};

enum class EvalMode { EnergyOnly, Full };

class Element {
public:
    virtual ~Element() = default;

    const ElementStencil& stencil() const { return stencil_; }
    void set_element_id(int id) { stencil_.element_id = id; }

    // Inertia and Dirichlet penalties have constant SPD Hessians and are
    // never projection candidates.
    virtual bool provably_spd() const { return false; }

    virtual const char* name() const = 0;

    // Returns false when the state is inadmissible (energy +inf); grad and
    // hess are only written in Full mode on admissible states.
    virtual bool eval(std::span<const double> x, EvalMode mode, ElementEval& out) const = 0;

protected:
    ElementStencil stencil_;
};

// Element-assembled system: a fixed list of elements over n_nodes nodes with
// `dim` coordinates each. Element ids equal their position in the list.
struct ElementSystem {
    int dim = 2;
    int n_nodes = 0;
    std::vector<std::unique_ptr<Element>> elements;

    int n_dof() const { return dim * n_nodes; }

    int add(std::unique_ptr<Element> e);
};

} // namespace ppn
