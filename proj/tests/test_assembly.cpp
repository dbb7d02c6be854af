#include "doctest.h"

#include <random>

#include "core/block_sparse.hpp"
#include "core/energies.hpp"
#include "core/linsolve.hpp"
#include "test_support.hpp"

using namespace ppn;

namespace {

SymMatrix random_local(std::mt19937& rng, int n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, u(rng));
    return m;
}

// Random quadratic system over n_nodes; returns it with the element count.
ElementSystem random_quadratic_system(std::mt19937& rng, int n_nodes, int dim, int n_elem) {
    ElementSystem sys;
    sys.dim = dim;
    sys.n_nodes = n_nodes;
    std::uniform_int_distribution<int> pick_node(0, n_nodes - 1);
    std::uniform_int_distribution<int> pick_sz(1, std::min(3, n_nodes));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int e = 0; e < n_elem; ++e) {
        const int sz = pick_sz(rng);
        std::vector<int> nodes;
        while (static_cast<int>(nodes.size()) < sz) {
            const int v = pick_node(rng);
            if (std::find(nodes.begin(), nodes.end(), v) == nodes.end()) nodes.push_back(v);
        }
        std::sort(nodes.begin(), nodes.end());
        const int nloc = sz * dim;
        std::vector<double> x0(static_cast<std::size_t>(nloc));
        for (auto& v : x0) v = u(rng);
        sys.add(std::make_unique<test::ConstHessElement>(nodes, dim, random_local(rng, nloc, 2.0), x0));
    }
    return sys;
}

} // namespace

TEST_CASE("build_sparsity covers exactly the stencil cross products") {
    std::vector<ElementStencil> st(2);
    st[0].nodes = {0, 2};
    st[1].nodes = {2, 3};
    const BlockSparseMatrix h = build_sparsity(st, 5, 2);
    CHECK(h.n_nodes() == 5);
    CHECK(h.block_dim() == 2);
    CHECK(h.n_dof() == 10);

    CHECK(h.find_block(0, 0) >= 0);
    CHECK(h.find_block(0, 2) >= 0);
    CHECK(h.find_block(2, 0) >= 0);
    CHECK(h.find_block(2, 3) >= 0);
    CHECK(h.find_block(3, 3) >= 0);
    CHECK(h.find_block(0, 3) == -1);  // no element couples 0 and 3
    CHECK(h.find_block(1, 1) == -1);  // node 1 is untouched
    CHECK(h.find_block(4, 0) == -1);

    // row_ptr/col_idx form a valid CSR with sorted columns
    const auto& rp = h.row_ptr();
    const auto& ci = h.col_idx();
    REQUIRE(static_cast<int>(rp.size()) == 6);
    CHECK(rp.back() == h.n_blocks());
    for (int r = 0; r < 5; ++r)
        for (int k = rp[static_cast<std::size_t>(r)] + 1; k < rp[static_cast<std::size_t>(r) + 1]; ++k)
            CHECK(ci[static_cast<std::size_t>(k - 1)] < ci[static_cast<std::size_t>(k)]);
}

TEST_CASE("add_local matches a dense scatter oracle") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 1 + trial % 3;
        const int n_nodes = 4 + trial % 4;
        ElementSystem sys = random_quadratic_system(rng, n_nodes, dim, 6);

        std::vector<ElementStencil> st;
        for (const auto& el : sys.elements) st.push_back(el->stencil());
        BlockSparseMatrix h = build_sparsity(st, n_nodes, dim);
        h.set_zero();

        const int n = h.n_dof();
        std::vector<double> dense(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> x(static_cast<std::size_t>(n), 0.25);

        for (const auto& el : sys.elements) {
            ElementEval ev;
            REQUIRE(el->eval(x, EvalMode::Full, ev));
            h.add_local(el->stencil().nodes, ev.hess);
            const auto& nodes = el->stencil().nodes;
            const int nn = static_cast<int>(nodes.size());
            for (int a = 0; a < nn; ++a)
                for (int b = 0; b < nn; ++b)
                    for (int p = 0; p < dim; ++p)
                        for (int q = 0; q < dim; ++q)
                            dense[static_cast<std::size_t>(nodes[static_cast<std::size_t>(a)] * dim + p) * n +
                                  nodes[static_cast<std::size_t>(b)] * dim + q] +=
                                ev.hess(a * dim + p, b * dim + q);
        }

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                CHECK(h.value(i, j) == dense[static_cast<std::size_t>(i) * n + j]);
        CHECK(h.max_abs_asymmetry() == 0.0);
    }
}

TEST_CASE("add_local outside the pattern throws StructuralMiss") {
    std::vector<ElementStencil> st(1);
    st[0].nodes = {0, 1};
    BlockSparseMatrix h = build_sparsity(st, 3, 2);
    SymMatrix local(4);
    local.set(0, 0, 1.0);
    CHECK_NOTHROW(h.add_local({0, 1}, local));
    try {
        h.add_local({1, 2}, local);
        FAIL("expected StructuralMiss");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StructuralMiss);
    }
}

TEST_CASE("multiply agrees with the dense product") {
    std::mt19937 rng(9);
    ElementSystem sys = random_quadratic_system(rng, 6, 2, 8);
    std::vector<ElementStencil> st;
    for (const auto& el : sys.elements) st.push_back(el->stencil());
    BlockSparseMatrix h = build_sparsity(st, 6, 2);

    std::vector<double> g;
    AssemblyCache cache;
    std::vector<double> x(static_cast<std::size_t>(h.n_dof()));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : x) v = u(rng);
    assemble(sys, x, h, g, cache);

    const std::vector<double> dense = test::densify(h);
    std::vector<double> p(x.size()), y(x.size());
    for (auto& v : p) v = u(rng);
    h.multiply(p, y);
    const int n = h.n_dof();
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += dense[static_cast<std::size_t>(i) * n + j] * p[static_cast<std::size_t>(j)];
        CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("assemble sums gradients and Hessians in element order") {
    std::mt19937 rng(13);
    ElementSystem sys = random_quadratic_system(rng, 5, 2, 7);
    std::vector<ElementStencil> st;
    for (const auto& el : sys.elements) st.push_back(el->stencil());
    BlockSparseMatrix h = build_sparsity(st, 5, 2);

    std::vector<double> x(static_cast<std::size_t>(h.n_dof()));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : x) v = u(rng);

    std::vector<double> g;
    AssemblyCache cache;
    assemble(sys, x, h, g, cache);
    REQUIRE(cache.evals.size() == sys.elements.size());

    std::vector<double> g_ref(x.size(), 0.0);
    double e_ref = 0.0;
    for (std::size_t e = 0; e < sys.elements.size(); ++e) {
        ElementEval ev;
        REQUIRE(sys.elements[e]->eval(x, EvalMode::Full, ev));
        CHECK(cache.evals[e].energy == ev.energy);
        e_ref += ev.energy;
        const auto& nodes = sys.elements[e]->stencil().nodes;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            for (int c = 0; c < 2; ++c)
                g_ref[static_cast<std::size_t>(nodes[k] * 2 + c)] += ev.grad[static_cast<int>(k) * 2 + c];
    }
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == g_ref[i]);
    CHECK(total_energy(sys, x) == e_ref);
}

TEST_CASE("element_residual_inf picks the element slice") {
    std::vector<double> g = {1.0, -2.0, 0.5, 0.0, 7.0, -3.0, 0.1, 9.0};
    ElementStencil st;
    st.nodes = {0, 3};
    CHECK(element_residual_inf(g, st, 2) == 9.0);
    st.nodes = {1};
    CHECK(element_residual_inf(g, st, 2) == 0.5);
    st.nodes = {1, 2};
    CHECK(element_residual_inf(g, st, 2) == 7.0);
}

TEST_CASE("scatter_delta adds in place on the element blocks only") {
    std::vector<ElementStencil> st(2);
    st[0].nodes = {0, 1};
    st[1].nodes = {1, 2};
    BlockSparseMatrix h = build_sparsity(st, 3, 2);
    h.set_zero();

    SymMatrix d0(4);
    d0.set(0, 0, 1.0);
    d0.set(0, 3, 2.0);
    scatter_delta(h, st[0], d0);
    CHECK(h.value(0, 0) == 1.0);
    CHECK(h.value(0, 3) == 2.0);
    CHECK(h.value(3, 0) == 2.0);
    CHECK(h.value(4, 4) == 0.0);  // block (2,2) untouched

    scatter_delta(h, st[0], d0);  // in place: accumulates
    CHECK(h.value(0, 0) == 2.0);
    CHECK(h.max_abs_asymmetry() == 0.0);
}

TEST_CASE("didactic two-then-three element assembly") {
    // Two 2x2 element Hessians on one shared node: A alone is indefinite,
    // A + B is SPD; adding C makes the assembled matrix indefinite again, and
    // projecting only C restores definiteness.
    const double da[] = {-1.0, 2.0};
    const double db[] = {2.0, 2.0};
    const double dc[] = {-10.0, 1.0};
    const SymMatrix A = SymMatrix::diagonal(da);
    const SymMatrix B = SymMatrix::diagonal(db);
    const SymMatrix C = SymMatrix::diagonal(dc);

    const EigenPair ea = eig_sym(A);
    CHECK(std::abs(ea.eigenvalues[0] - -1.0) <= 1e-10);
    CHECK(std::abs(ea.eigenvalues[1] - 2.0) <= 1e-10);
    const EigenPair eb = eig_sym(B);
    CHECK(std::abs(eb.eigenvalues[0] - 2.0) <= 1e-10);
    CHECK(std::abs(eb.eigenvalues[1] - 2.0) <= 1e-10);

    std::vector<ElementStencil> st(1);
    st[0].nodes = {0};
    BlockSparseMatrix h = build_sparsity(st, 1, 2);
    h.set_zero();
    h.add_local({0}, A);
    h.add_local({0}, B);

    const EigenPair ep = eig_sym(SymMatrix::diagonal(std::array{h.value(0, 0), h.value(1, 1)}));
    CHECK(std::abs(ep.eigenvalues[0] - 1.0) <= 1e-10);
    CHECK(std::abs(ep.eigenvalues[1] - 4.0) <= 1e-10);

    std::vector<double> b = {1.0, 1.0};
    CHECK(llt_solve(h, b).status == SolveStatus::Solved);

    h.add_local({0}, C);
    const EigenPair eq = eig_sym(SymMatrix::diagonal(std::array{h.value(0, 0), h.value(1, 1)}));
    CHECK(std::abs(eq.eigenvalues[0] - -9.0) <= 1e-10);
    CHECK(std::abs(eq.eigenvalues[1] - 5.0) <= 1e-10);
    CHECK(llt_solve(h, b).status == SolveStatus::Indefinite);

    // project only C: scatter the filtered-minus-raw delta
    const ProjectResult pc = project_spd(C, {});
    CHECK(pc.decomposed);
    CHECK(pc.modified);
    scatter_delta(h, st[0], pc.matrix - C);
    CHECK(llt_solve(h, b).status == SolveStatus::Solved);
}
