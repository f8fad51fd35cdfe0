#include "stochgrid/recourse.hpp"

#include <cmath>
#include <string>

#include "stochgrid/errors.hpp"

namespace stochgrid {

ScenarioSolution solve_scenario(const TwoStageProblem& problem, int scenario,
                                const Vector& x) {
    if (scenario < 0 || scenario >= problem.num_scenarios())
        throw ValidationError("scenario index out of range: " + std::to_string(scenario));
    const ScenarioData& s = problem.scenarios[scenario];

    LpProblem lp;
    lp.name = "scenario" + std::to_string(scenario);
    lp.objective = s.q;
    lp.rows = problem.W;
    lp.rhs = s.h;
    Vector tx = s.T.mul(x);
    for (int i = 0; i < problem.num_second_rows(); ++i) lp.rhs[i] -= tx[i];

    LpSolution sol = solve(lp);
    if (sol.status == LpStatus::Infeasible)
        throw CompleteRecourseViolation(
            scenario, sol.farkas,
            "second-stage LP infeasible for scenario " + std::to_string(scenario));
    if (sol.status == LpStatus::Unbounded)
        throw NumericalFailure("second-stage LP unbounded for scenario " +
                               std::to_string(scenario));
    if (sol.status != LpStatus::Optimal)
        throw NumericalFailure("second-stage LP solve failed for scenario " +
                               std::to_string(scenario));
    ScenarioSolution out;
    out.value = sol.objective;
    out.dual = sol.dual;
    out.pivots = sol.pivots;
    return out;
}

ClusterResult evaluate_cluster(const TwoStageProblem& problem,
                               const ClusterPartition& partition, int cluster,
                               const Vector& x, long* pivots_out) {
    if (cluster < 0 || cluster >= partition.num_clusters())
        throw ValidationError("cluster index out of range: " + std::to_string(cluster));
    ClusterResult out;
    out.cluster = cluster;
    out.subgrad.assign(problem.num_first_vars(), 0.0);
    long pivots = 0;
    for (int i : partition.clusters[cluster]) {
        const ScenarioData& s = problem.scenarios[i];
        try {
            ScenarioSolution sol = solve_scenario(problem, i, x);
            pivots += sol.pivots;
            out.value += s.p * sol.value;
            Vector tt_pi = s.T.mul_transpose(sol.dual);
            for (int j = 0; j < problem.num_first_vars(); ++j)
                out.subgrad[j] -= s.p * tt_pi[j];
        } catch (const CompleteRecourseViolation& e) {
            // first infeasible scenario short-circuits the cluster
            out.feasible = false;
            out.value = 0.0;
            out.subgrad.clear();
            out.infeasible_scenario = e.scenario;
            out.farkas = e.farkas;
            break;
        }
    }
    if (pivots_out) *pivots_out += pivots;
    return out;
}

TaskResult execute_task(const TwoStageProblem& problem,
                        const ClusterPartition& partition, const TaskSpec& task) {
    if (task.cluster_ids.empty())
        throw ValidationError("task covers no clusters");
    TaskResult out;
    out.point_id = task.point_id;
    for (int j : task.cluster_ids)
        out.clusters.push_back(
            evaluate_cluster(problem, partition, j, task.x, &out.work_units));
    return out;
}

FeasibilityCutData make_feasibility_cut(const Vector& certificate,
                                        const TwoStageProblem& problem, int scenario) {
    if (scenario < 0 || scenario >= problem.num_scenarios())
        throw ValidationError("scenario index out of range: " + std::to_string(scenario));
    const ScenarioData& s = problem.scenarios[scenario];
    if (static_cast<int>(certificate.size()) != problem.num_second_rows())
        throw ValidationError("feasibility cut: certificate length does not match W rows");
    if (inf_norm(certificate) <= 1e-10)
        throw ValidationError("feasibility cut: zero certificate cannot witness infeasibility");
    // Wᵀπ ≤ 0 is the Farkas sign condition for {Wy = rhs, y ≥ 0}.
    Vector wt_pi = problem.W.mul_transpose(certificate);
    double scale = 1.0 + inf_norm(certificate);
    for (size_t j = 0; j < wt_pi.size(); ++j)
        if (wt_pi[j] > 1e-7 * scale)
            throw ValidationError("feasibility cut: certificate violates Wᵀπ ≤ 0 at column " +
                                  std::to_string(j));
    FeasibilityCutData cut;
    cut.g = s.T.mul_transpose(certificate);
    cut.f = dot(certificate, s.h);
    return cut;
}

}  // namespace stochgrid
