#pragma once

#include <vector>

#include "stochgrid/lp.hpp"
#include "stochgrid/problem.hpp"

namespace stochgrid {

// The worker-side unit of work: evaluate one chunk's clusters at a point.
struct TaskSpec {
    int point_id = 0;
    Vector x;
    std::vector<int> cluster_ids;
};

// Value/subgradient of one cluster's partial sum, or an infeasibility witness.
struct ClusterResult {
    int cluster = 0;
    bool feasible = true;
    double value = 0.0;  // Q_[j](x) = Σ_{i∈N_j} pᵢ Qᵢ(x)
    Vector subgrad;      // g_j = −Σ_{i∈N_j} pᵢ Tᵢᵀπᵢ
    int infeasible_scenario = -1;
    Vector farkas;
};

struct TaskResult {
    int point_id = 0;
    std::vector<ClusterResult> clusters;
    long work_units = 0;  // summed simplex pivots; the simulator's cost proxy
};

struct ScenarioSolution {
    double value = 0.0;
    Vector dual;
    long pivots = 0;
};

// Solves min qᵢᵀy s.t. Wy = hᵢ − Tᵢx, y ≥ 0 and returns value and duals.
// Throws CompleteRecourseViolation with the Farkas certificate if infeasible.
ScenarioSolution solve_scenario(const TwoStageProblem& problem, int scenario,
                                const Vector& x);

ClusterResult evaluate_cluster(const TwoStageProblem& problem,
                               const ClusterPartition& partition, int cluster,
                               const Vector& x, long* pivots_out = nullptr);

// Pure function of (problem, partition, task); per-cluster infeasibility is
// reported inside the result, not thrown.
TaskResult execute_task(const TwoStageProblem& problem,
                        const ClusterPartition& partition, const TaskSpec& task);

// A feasibility cut gᵀx ≥ f derived from a Farkas certificate π of an
// infeasible scenario system: g = Tᵢᵀπ, f = πᵀhᵢ.
struct FeasibilityCutData {
    Vector g;
    double f = 0.0;
};

FeasibilityCutData make_feasibility_cut(const Vector& certificate,
                                        const TwoStageProblem& problem, int scenario);

}  // namespace stochgrid
