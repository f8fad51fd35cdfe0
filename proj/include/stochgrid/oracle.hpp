#pragma once

#include "stochgrid/lp.hpp"
#include "stochgrid/problem.hpp"

namespace stochgrid {

// One LP over (x, y(ω₁), …, y(ω_N)): objective cᵀx + Σ pᵢqᵢᵀyᵢ, constraints
// Ax=b and Tᵢx + Wyᵢ = hᵢ, all variables ≥ 0.
LpProblem build_deterministic_equivalent(const TwoStageProblem& problem);

struct OracleSolution {
    double objective = 0.0;
    Vector x;
};

// Solves the deterministic equivalent; the ground truth for all tests.
OracleSolution solve_deterministic_equivalent(const TwoStageProblem& problem);

struct QEvaluation {
    double value = 0.0;  // cᵀx + Σ pᵢ Qᵢ(x)
    Vector subgradient;  // c − Σ pᵢ Tᵢᵀπᵢ
};

// Exact evaluation of the recourse objective at x ≥ 0 (complete recourse:
// Ax=b is not required). Throws CompleteRecourseViolation on an infeasible
// scenario.
QEvaluation evaluate_Q(const TwoStageProblem& problem, const Vector& x);

}  // namespace stochgrid
