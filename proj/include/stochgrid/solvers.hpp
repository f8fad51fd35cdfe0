#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stochgrid/cutmodel.hpp"
#include "stochgrid/executor.hpp"
#include "stochgrid/problem.hpp"
#include "stochgrid/stats.hpp"

namespace stochgrid {

struct SolverConfig {
    double epsilon_tol = 1e-5;
    double delta_hi = 1e3;
    double delta_0 = 1.0;
    double xi = 1e-4;    // acceptance fraction, in (0, 1/2)
    double eta = 0.0;    // cut-retention guard, in [0, 1)
    double sigma = 0.7;  // synchronicity threshold, in (0, 1]
    int basket_capacity = 1;  // K ≥ 1
    long inactivity_threshold = 100;
    double theta_floor = -1e9;
    long max_iterations = 10000;  // master-solve safeguard
    Vector x0;                    // empty → all zeros

    void validate() const;
};

// Per-point bookkeeping shared by all controllers.
struct PointRecord {
    int id = -1;
    Vector x;
    int clusters_done = 0;  // t_q
    bool speceval = false;
    int parent_incumbent = -1;                // I_q (−1 allowed)
    double parent_incumbent_value = kInf;     // Q^{I_q}
    double delta_at_generation = 0.0;         // Δ_q
    double model_value_at_generation = 0.0;   // m_q
    double value = 0.0;  // accumulates cᵀx + Σ_j Q_[j](x); equals Q(x) when completed
    bool completed = false;
};

// Incumbent-side state of the asynchronous trust-region controller.
struct IncumbentState {
    int incumbent = -1;  // I, −1 before the first completed evaluation
    double incumbent_value = kInf;
    double delta_curr = 1.0;
    int counter = 0;  // Reduce-Δ persistence counter
    std::set<int> basket;
};

struct TrustRegionState {
    double delta = 1.0;
    int counter = 0;
};

// Shrink rule shared by TR and (via the point's own Δ_q) ATR:
//   ρ = min(1,Δ)·(Q(candidate) − Q(center)) / (Q(center) − m(candidate)).
// Counter increments iff ρ>0; Δ divides by min(ρ,4) iff ρ>3 or
// (counter ≥ 3 and ρ ∈ (1,3]); counter resets on shrink.
double reduce_delta_tr(TrustRegionState& state, double center_value,
                       double candidate_value, double candidate_model_value);

// Applies the ATR variant to Δ_curr using the completed point's own Δ_q;
// no-op when the point has no parent incumbent.
void reduce_delta_atr(IncumbentState& state, const PointRecord& point);

enum class TerminationReason { Converged, IterationCap, OptimalAtStart, BasketDrained };

const char* to_string(TerminationReason r);

enum class TraceEventKind {
    PointGenerated,
    ClusterApplied,
    PointCompleted,
    StepAccepted,
    StepRejected,
    MasterSolved,
    Terminated
};

struct TraceEvent {
    TraceEventKind kind = TraceEventKind::MasterSolved;
    int point_id = -1;
    int clusters_done = 0;
    double q_value = 0.0;
    double m_value = 0.0;
    double delta = 0.0;
    int basket_size = 0;
    std::string to_line() const;
};

struct RunResult {
    Vector x;
    double objective = 0.0;
    TerminationReason reason = TerminationReason::IterationCap;
    long master_solves = 0;
    long points_evaluated = 0;  // master-generated points (excludes x⁰)
    std::vector<PointRecord> points;
    std::vector<TraceEvent> trace;
    int max_cuts = 0;
    long tasks_executed = 0;
    long total_work_units = 0;
    RunStats stats;
};

// Snapshot handed to an observer after every master solve; the model copy
// supports offline probing of the model function along the trajectory.
struct MasterObservation {
    long solve_counter = 0;
    Vector x;
    double model_value = 0.0;
    bool bound_active = false;
    std::optional<Vector> center;
    std::optional<double> delta;
    double center_value = 0.0;  // Q at the center (or Q_min); kInf if unknown
    int epoch = 0;  // TR major iteration / ATR incumbent id; 0 for LS/ALS
    ModelState model;
};
using MasterObserver = std::function<void(const MasterObservation&)>;

RunResult run_ls(const TwoStageProblem& problem, const ClusterPartition& partition,
                 const SolverConfig& config, TaskExecutor& executor,
                 const MasterObserver& observer = {});
RunResult run_tr(const TwoStageProblem& problem, const ClusterPartition& partition,
                 const SolverConfig& config, TaskExecutor& executor,
                 const MasterObserver& observer = {});
RunResult run_als(const TwoStageProblem& problem, const ClusterPartition& partition,
                  const SolverConfig& config, TaskExecutor& executor,
                  const MasterObserver& observer = {});
RunResult run_atr(const TwoStageProblem& problem, const ClusterPartition& partition,
                  const SolverConfig& config, TaskExecutor& executor,
                  const MasterObserver& observer = {});

using AlgorithmRunner = RunResult (*)(const TwoStageProblem&, const ClusterPartition&,
                                      const SolverConfig&, TaskExecutor&,
                                      const MasterObserver&);

// "ls" | "tr" | "als" | "atr" → runner; throws ValidationError otherwise.
AlgorithmRunner algorithm_by_name(const std::string& name);

}  // namespace stochgrid
