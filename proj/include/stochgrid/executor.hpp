#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <random>

#include "stochgrid/recourse.hpp"

namespace stochgrid {

// Delivery contract: controllers submit tasks and consume completion events
// one at a time, in any order the executor chooses, never concurrently.
class TaskExecutor {
public:
    virtual ~TaskExecutor() = default;
    virtual void submit(const TaskSpec& task) = 0;
    // Next completed result, or nullopt when nothing is pending.
    virtual std::optional<TaskResult> next_result() = 0;
    // Timing hook: the simulator charges master-LP time through this.
    virtual void note_master_solve(long pivots) { (void)pivots; }
};

// Executes tasks immediately, FIFO. The reference executor for the
// synchronous algorithms and the degeneracy-identity tests.
class SerialExecutor : public TaskExecutor {
public:
    SerialExecutor(const TwoStageProblem& problem, const ClusterPartition& partition)
        : problem_(problem), partition_(partition) {}

    void submit(const TaskSpec& task) override { pending_.push_back(task); }

    std::optional<TaskResult> next_result() override {
        if (pending_.empty()) return std::nullopt;
        TaskSpec task = pending_.front();
        pending_.pop_front();
        return execute_task(problem_, partition_, task);
    }

private:
    const TwoStageProblem& problem_;
    const ClusterPartition& partition_;
    std::deque<TaskSpec> pending_;
};

// Delivers completed results in an arbitrary order chosen by a picker
// function (index into the pending queue). Used to exercise delivery-order
// robustness of the asynchronous controllers.
class ScriptedExecutor : public TaskExecutor {
public:
    using Picker = std::function<size_t(size_t pending_count)>;

    ScriptedExecutor(const TwoStageProblem& problem, const ClusterPartition& partition,
                     Picker picker)
        : problem_(problem), partition_(partition), pick_(std::move(picker)) {}

    // Convenience: uniformly random delivery order, deterministic per seed.
    static ScriptedExecutor random_order(const TwoStageProblem& problem,
                                         const ClusterPartition& partition,
                                         std::uint64_t seed) {
        auto rng = std::make_shared<std::mt19937_64>(seed);
        return ScriptedExecutor(problem, partition, [rng](size_t n) {
            return static_cast<size_t>((*rng)() % n);
        });
    }

    void submit(const TaskSpec& task) override { pending_.push_back(task); }

    std::optional<TaskResult> next_result() override {
        if (pending_.empty()) return std::nullopt;
        size_t i = pick_(pending_.size());
        if (i >= pending_.size()) i = pending_.size() - 1;
        TaskSpec task = pending_[i];
        pending_.erase(pending_.begin() + i);
        return execute_task(problem_, partition_, task);
    }

private:
    const TwoStageProblem& problem_;
    const ClusterPartition& partition_;
    Picker pick_;
    std::deque<TaskSpec> pending_;
};

}  // namespace stochgrid
