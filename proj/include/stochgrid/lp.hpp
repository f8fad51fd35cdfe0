#pragma once

#include <string>
#include <vector>

#include "stochgrid/linalg.hpp"

namespace stochgrid {

// LP in equality form: min cᵀx s.t. Ex = rhs, lower ≤ x ≤ upper.
// Callers express inequalities by adding explicit slack columns.
struct LpProblem {
    Vector objective;
    Matrix rows;   // E, may have zero rows
    Vector rhs;
    Vector lower;  // defaults to 0 when left empty
    Vector upper;  // defaults to +inf when left empty
    std::string name = "lp";

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(rhs.size()); }

    // Fills defaults and checks dimensional consistency; throws ValidationError.
    void validate_and_default();
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(LpStatus s);

enum class VarStatus : unsigned char { AtLower, AtUpper, Basic, FreeZero };

// Simplex basis over the structural variables; usable as a warm-start hint.
struct Basis {
    std::vector<VarStatus> status;
    bool empty() const { return status.empty(); }
};

struct LpSolution {
    LpStatus status = LpStatus::NumericalFailure;
    Vector primal;
    Vector dual;           // one multiplier per equality row
    Vector reduced_costs;  // c − Eᵀdual
    double objective = 0.0;
    Vector farkas;         // infeasibility certificate, present iff Infeasible
    long pivots = 0;
    Basis basis;
};

// Dense bounded-variable two-phase simplex. Deterministic: Dantzig pricing
// with lowest-index tie-breaks, switching to Bland's rule after 1000
// consecutive degenerate pivots. Single-use; construct one per solve.
class SimplexSolver {
public:
    explicit SimplexSolver(const LpProblem& problem);

    LpSolution solve();
    LpSolution solve(const Basis& warm_start);

private:
    struct Impl;
    const LpProblem& problem_;
};

LpSolution solve(const LpProblem& problem);
LpSolution solve_with_warm_start(const LpProblem& problem, const Basis& hint);

// Fixed-point MPS rendering of the equality-form problem, for cross-checking
// against external solvers.
std::string to_mps(const LpProblem& problem);

}  // namespace stochgrid
