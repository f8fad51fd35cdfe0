#include <doctest.h>

#include <cmath>
#include <random>

#include "stochgrid/errors.hpp"
#include "stochgrid/lp.hpp"
#include "support/test_helpers.hpp"

using namespace stochgrid;
namespace st = stochgrid::testing;

namespace {

LpProblem simple(const Vector& c, const std::vector<Vector>& rows, const Vector& rhs) {
    LpProblem p;
    p.objective = c;
    p.rows = Matrix::from_rows(rows);
    p.rhs = rhs;
    return p;
}

// dual objective for bounded LPs: yᵀb + Σ nonbasic reduced costs at their bound
double dual_objective(const LpProblem& p, const LpSolution& s) {
    double v = dot(s.dual, p.rhs);
    Vector lower = p.lower.empty() ? Vector(p.objective.size(), 0.0) : p.lower;
    Vector upper = p.upper.empty() ? Vector(p.objective.size(), kInf) : p.upper;
    for (size_t j = 0; j < p.objective.size(); ++j) {
        if (s.basis.status[j] == VarStatus::AtLower)
            v += s.reduced_costs[j] * lower[j];
        else if (s.basis.status[j] == VarStatus::AtUpper)
            v += s.reduced_costs[j] * upper[j];
    }
    return v;
}

}  // namespace

TEST_CASE("single-row LP reaches the binding face") {
    // min −x1−x2 s.t. x1+x2+s = 1
    LpProblem p = simple({-1, -1, 0}, {{1, 1, 1}}, {1});
    LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(s.primal[0] + s.primal[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("one-variable infeasibility yields the hand Farkas certificate") {
    // min 0 s.t. x = −1, x ≥ 0
    LpProblem p = simple({0}, {{1}}, {-1});
    LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Infeasible);
    REQUIRE(s.farkas.size() == 1);
    CHECK(s.farkas[0] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(s.farkas[0] * -1.0 > 0);       // πᵀrhs > 0
    CHECK(s.farkas[0] * 1.0 <= 1e-9);    // Wᵀπ ≤ 0
}

TEST_CASE("free ray gives Unbounded") {
    LpProblem p;
    p.objective = {-1};
    LpSolution s = solve(p);
    CHECK(s.status == LpStatus::Unbounded);
}

TEST_CASE("bounded variables and upper bounds") {
    // min −x over 0 ≤ x ≤ 2.5, no rows
    LpProblem p;
    p.objective = {-1};
    p.upper = {2.5};
    LpSolution s = solve(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.primal[0] == doctest::Approx(2.5));
    CHECK(s.objective == doctest::Approx(-2.5));
}

TEST_CASE("duality gap and feasibility on randomized dense LPs") {
    std::mt19937_64 rng(7001);
    int optimal_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        int n = st::uniform_int(rng, 1, 20);
        int m = st::uniform_int(rng, 0, std::min(n, 10));
        LpProblem p;
        p.objective.resize(n);
        for (double& v : p.objective) v = st::uniform(rng, -2.0, 2.0);
        p.upper.assign(n, kInf);
        p.lower.assign(n, 0.0);
        // keep the LP bounded: box a few variables
        for (int j = 0; j < n; ++j)
            if (p.objective[j] < 0) p.upper[j] = st::uniform(rng, 0.5, 4.0);
        if (m > 0) {
            p.rows = Matrix(m, n);
            Vector x_star(n);  // feasible by construction, inside the box
            for (int j = 0; j < n; ++j)
                x_star[j] = st::uniform(rng, 0.0, std::min(1.5, p.upper[j]));
            p.rhs.assign(m, 0.0);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) p.rows(i, j) = st::uniform(rng, -1.0, 1.0);
                for (int j = 0; j < n; ++j) p.rhs[i] += p.rows(i, j) * x_star[j];
            }
        }
        LpSolution s = solve(p);
        REQUIRE(s.status == LpStatus::Optimal);  // feasible by construction
        ++optimal_seen;
        // primal residual
        if (m > 0) {
            Vector ax = p.rows.mul(s.primal);
            for (int i = 0; i < m; ++i)
                CHECK(std::abs(ax[i] - p.rhs[i]) <= 1e-7 * (1.0 + inf_norm(p.rhs)));
        }
        double gap = std::abs(s.objective - dual_objective(p, s));
        CHECK(gap <= 1e-7 * (1.0 + std::abs(s.objective)));
    }
    CHECK(optimal_seen == 60);
}

TEST_CASE("Farkas certificates on randomized infeasible standard-form LPs") {
    std::mt19937_64 rng(7002);
    int infeasible_seen = 0;
    for (int trial = 0; trial < 40; ++trial) {
        int n = st::uniform_int(rng, 1, 8);
        int m = st::uniform_int(rng, 1, 4);
        LpProblem p;
        p.objective.assign(n, 0.0);
        p.rows = Matrix(m, n);
        p.rhs.assign(m, 0.0);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) p.rows(i, j) = st::uniform(rng, 0.0, 1.0);
        // nonnegative rows with a negative rhs row force infeasibility
        p.rhs[st::uniform_int(rng, 0, m - 1)] = st::uniform(rng, -3.0, -0.5);
        LpSolution s = solve(p);
        if (s.status != LpStatus::Infeasible) continue;
        ++infeasible_seen;
        REQUIRE(s.farkas.size() == static_cast<size_t>(m));
        Vector wt_pi = p.rows.mul_transpose(s.farkas);
        for (double v : wt_pi) CHECK(v <= 1e-9 * (1.0 + inf_norm(s.farkas)));
        CHECK(dot(s.farkas, p.rhs) > 0);
    }
    CHECK(infeasible_seen >= 30);
}

TEST_CASE("identical inputs give identical pivot sequences and outputs") {
    std::mt19937_64 rng(7003);
    LpProblem p;
    int n = 12, m = 6;
    p.objective.resize(n);
    for (double& v : p.objective) v = st::uniform(rng, -1.0, 1.0);
    p.upper.assign(n, 3.0);
    p.rows = Matrix(m, n);
    p.rhs.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) p.rows(i, j) = st::uniform(rng, -1.0, 1.0);
        p.rhs[i] = st::uniform(rng, -1.0, 1.0);
    }
    LpSolution a = solve(p);
    LpSolution b = solve(p);
    CHECK(a.status == b.status);
    CHECK(a.pivots == b.pivots);
    CHECK(a.primal == b.primal);
    CHECK(a.dual == b.dual);
    CHECK(a.objective == b.objective);
}

TEST_CASE("warm start with own optimal basis re-solves in zero pivots") {
    LpProblem p = simple({-1, -1, 0}, {{1, 2, 1}}, {2});
    LpSolution cold = solve(p);
    REQUIRE(cold.status == LpStatus::Optimal);
    LpSolution warm = solve_with_warm_start(p, cold.basis);
    REQUIRE(warm.status == LpStatus::Optimal);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-12));
    CHECK(warm.pivots == 0);
}

TEST_CASE("incompatible warm-start hint is silently ignored") {
    LpProblem p = simple({-1, -1, 0}, {{1, 2, 1}}, {2});
    Basis bogus;
    bogus.status = {VarStatus::Basic, VarStatus::Basic, VarStatus::Basic};  // 3 ≠ m
    LpSolution cold = solve(p);
    LpSolution warm = solve_with_warm_start(p, bogus);
    REQUIRE(warm.status == LpStatus::Optimal);
    CHECK(warm.objective == doctest::Approx(cold.objective).epsilon(1e-12));
}

TEST_CASE("bound validation rejects crossed bounds") {
    LpProblem p;
    p.objective = {1};
    p.lower = {2.0};
    p.upper = {1.0};
    CHECK_THROWS_AS(solve(p), ValidationError);
}

TEST_CASE("MPS dump carries objective, rows, rhs, bounds") {
    LpProblem p = simple({1.5, 0}, {{1, 1}}, {2});
    p.upper = {kInf, 4.0};
    p.name = "dumpcheck";
    std::string text = to_mps(p);
    CHECK(text.find("NAME          dumpcheck") != std::string::npos);
    CHECK(text.find("COST") != std::string::npos);
    CHECK(text.find("R0") != std::string::npos);
    CHECK(text.find("UP BND") != std::string::npos);
    CHECK(text.find("ENDATA") != std::string::npos);
}
