#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stochgrid/executor.hpp"
#include "stochgrid/solvers.hpp"
#include "stochgrid/stats.hpp"

namespace stochgrid {

// A simulated worker: relative slowness, presence window, and suspension
// schedule. benchmark_time is recorded when its benchmark task completes.
struct WorkerProfile {
    int id = 0;
    double speed = 1.0;  // ≥ 1; multiplier on task duration (1 = fastest)
    double arrival = 0.0;
    double departure = kInf;
    std::vector<std::pair<double, double>> suspensions;  // [suspend, resume)
    double benchmark_time = 0.0;
};

struct SimConfig {
    std::uint64_t seed = 0;
    int initial_workers = 4;
    double arrival_rate = 0.0;  // Poisson arrivals per simulated second
    double speed_spread_max = 7.0;
    double suspension_rate = 0.0;  // per worker, per owned second
    double suspension_mean_duration = 30.0;
    double departure_rate = 0.0;  // per worker, per owned second
    double unit_cost = 1e-3;      // seconds per work unit (simplex pivot)
    double task_latency = 0.05;   // fixed per-task overhead, seconds
    double benchmark_work_units = 50.0;
    double master_unit_cost = 5e-4;  // seconds per master pivot
    int max_workers_override = -1;   // < 0 → use the mid(·) formula
    double time_cap = 1e7;
    bool reschedule_on_suspend = false;
    std::vector<WorkerProfile> explicit_workers;  // nonempty → no generation
};

// Worker-count request: mid(25, 200, ⌊(K+1)C/2⌋) for the trust-region family
// (LS and TR use K=1); mid(25, 200, 2C) for ALS.
int max_workers(int basket_capacity, int num_chunks, const std::string& algorithm);

// Per-worker owned/busy accounting plus execution-conservation bookkeeping.
struct WorkerLedger {
    struct Entry {
        int worker_id = 0;
        double owned = 0.0;  // present and not suspended
        double busy = 0.0;   // executing benchmark or task work
    };
    std::vector<Entry> workers;
    double applied_duration = 0.0;
    double discarded_duration = 0.0;
    double benchmark_duration = 0.0;
    long applied_count = 0;
    long discarded_count = 0;

    double total_owned() const;
    double total_busy() const;
};

// Σ busy / Σ owned; zero owned time is reported as 0 with *defined = false.
double parallel_efficiency(const WorkerLedger& ledger, bool* defined = nullptr);

// Discrete-event executor over the simulated pool. Single-threaded and
// bit-deterministic per (seed, configs).
class SimExecutor : public TaskExecutor {
public:
    SimExecutor(const TwoStageProblem& problem, const ClusterPartition& partition,
                const SimConfig& config, int worker_cap);
    ~SimExecutor() override;

    void submit(const TaskSpec& task) override;
    std::optional<TaskResult> next_result() override;
    void note_master_solve(long pivots) override;

    double now() const;
    double master_time() const;
    const WorkerLedger& ledger();  // finalizes accounting up to now()
    double average_active_workers() const;
    // (time, active worker count) samples, one per change
    const std::vector<std::pair<double, int>>& worker_count_series() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Runs the named algorithm against a simulated pool and fills RunStats.
// worker_series_out, when given, receives the active-worker-count time series.
std::pair<RunResult, RunStats> simulate(
    const std::string& algorithm, const TwoStageProblem& problem,
    const ClusterPartition& partition, const SolverConfig& solver_config,
    const SimConfig& sim_config, const MasterObserver& observer = {},
    std::vector<std::pair<double, int>>* worker_series_out = nullptr);

// One CSV row per run, schema fixed:
// run,points_evaluated,sigma_or_K,tasks_C,clusters_T,max_procs,avg_procs,
// parallel_efficiency,max_cuts,master_time,wall_clock
std::string stats_csv_header();
std::string stats_csv_row(const std::string& run_name, const RunStats& stats,
                          double sigma_or_k, int num_chunks, int num_clusters);

}  // namespace stochgrid
