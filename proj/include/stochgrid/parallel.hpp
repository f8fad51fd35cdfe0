#pragma once

#include <memory>
#include <string>
#include <utility>

#include "stochgrid/executor.hpp"
#include "stochgrid/solvers.hpp"
#include "stochgrid/stats.hpp"

namespace stochgrid {

// Real in-process worker pool. Tasks run on worker threads; completion events
// are serialized to the single controller thread through next_result().
// A task that throws is retried once, then the run aborts with diagnostics.
class ThreadPoolExecutor : public TaskExecutor {
public:
    ThreadPoolExecutor(const TwoStageProblem& problem,
                       const ClusterPartition& partition, int thread_count);
    ~ThreadPoolExecutor() override;

    void submit(const TaskSpec& task) override;
    std::optional<TaskResult> next_result() override;

    double total_busy_seconds() const;
    int thread_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Runs the named algorithm with thread_count real workers.
std::pair<RunResult, RunStats> run_parallel(const std::string& algorithm,
                                            const TwoStageProblem& problem,
                                            const ClusterPartition& partition,
                                            const SolverConfig& solver_config,
                                            int thread_count,
                                            const MasterObserver& observer = {});

}  // namespace stochgrid
