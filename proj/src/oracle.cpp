#include "stochgrid/oracle.hpp"

#include <string>

#include "stochgrid/errors.hpp"
#include "stochgrid/recourse.hpp"

namespace stochgrid {

LpProblem build_deterministic_equivalent(const TwoStageProblem& problem) {
    problem.validate();
    const int n = problem.num_first_vars();
    const int n2 = problem.num_second_vars();
    const int m2 = problem.num_second_rows();
    const int ma = problem.first.num_rows();
    const int N = problem.num_scenarios();

    LpProblem lp;
    lp.name = "detequiv";
    const int total_vars = n + N * n2;
    const int total_rows = ma + N * m2;
    lp.objective.assign(total_vars, 0.0);
    for (int j = 0; j < n; ++j) lp.objective[j] = problem.first.c[j];
    for (int i = 0; i < N; ++i) {
        const ScenarioData& s = problem.scenarios[i];
        for (int j = 0; j < n2; ++j) lp.objective[n + i * n2 + j] = s.p * s.q[j];
    }
    lp.rows = Matrix(total_rows, total_vars);
    lp.rhs.assign(total_rows, 0.0);
    for (int r = 0; r < ma; ++r) {
        for (int j = 0; j < n; ++j) lp.rows(r, j) = problem.first.A(r, j);
        lp.rhs[r] = problem.first.b[r];
    }
    for (int i = 0; i < N; ++i) {
        const ScenarioData& s = problem.scenarios[i];
        for (int r = 0; r < m2; ++r) {
            int row = ma + i * m2 + r;
            for (int j = 0; j < n; ++j) lp.rows(row, j) = s.T(r, j);
            for (int j = 0; j < n2; ++j) lp.rows(row, n + i * n2 + j) = problem.W(r, j);
            lp.rhs[row] = s.h[r];
        }
    }
    return lp;
}

OracleSolution solve_deterministic_equivalent(const TwoStageProblem& problem) {
    LpProblem lp = build_deterministic_equivalent(problem);
    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::Optimal)
        throw NumericalFailure(std::string("deterministic equivalent solve: ") +
                               to_string(sol.status));
    OracleSolution out;
    out.objective = sol.objective;
    out.x.assign(sol.primal.begin(), sol.primal.begin() + problem.num_first_vars());
    return out;
}

QEvaluation evaluate_Q(const TwoStageProblem& problem, const Vector& x) {
    if (static_cast<int>(x.size()) != problem.num_first_vars())
        throw ValidationError("evaluate_Q: point length does not match first stage");
    for (size_t j = 0; j < x.size(); ++j)
        if (x[j] < -1e-12)
            throw ValidationError("evaluate_Q: point has negative component " +
                                  std::to_string(j));
    QEvaluation out;
    out.value = dot(problem.first.c, x);
    out.subgradient = problem.first.c;
    for (int i = 0; i < problem.num_scenarios(); ++i) {
        const ScenarioData& s = problem.scenarios[i];
        ScenarioSolution sol = solve_scenario(problem, i, x);
        out.value += s.p * sol.value;
        Vector tt_pi = s.T.mul_transpose(sol.dual);
        for (size_t j = 0; j < x.size(); ++j) out.subgradient[j] -= s.p * tt_pi[j];
    }
    return out;
}

}  // namespace stochgrid
