#include "stochgrid/parallel.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "stochgrid/errors.hpp"

namespace stochgrid {

struct ThreadPoolExecutor::Impl {
    const TwoStageProblem& problem;
    const ClusterPartition& partition;
    int threads_requested;

    std::mutex mu;
    std::condition_variable work_cv;
    std::condition_variable result_cv;
    std::deque<TaskSpec> work;
    std::deque<TaskResult> results;
    std::exception_ptr fatal;
    long outstanding = 0;  // submitted − delivered
    bool shutdown = false;
    std::atomic<long> busy_nanos{0};
    std::vector<std::thread> threads;

    Impl(const TwoStageProblem& p, const ClusterPartition& part, int n)
        : problem(p), partition(part), threads_requested(n) {
        if (n < 1) throw ValidationError("run_parallel: thread count must be >= 1");
        for (int i = 0; i < n; ++i)
            threads.emplace_back([this] { worker_loop(); });
    }

    ~Impl() {
        {
            std::lock_guard<std::mutex> lock(mu);
            shutdown = true;
        }
        work_cv.notify_all();
        for (auto& t : threads) t.join();
    }

    void worker_loop() {
        while (true) {
            TaskSpec task;
            {
                std::unique_lock<std::mutex> lock(mu);
                work_cv.wait(lock, [this] { return shutdown || !work.empty(); });
                if (shutdown && work.empty()) return;
                task = std::move(work.front());
                work.pop_front();
            }
            TaskResult result;
            bool ok = false;
            std::exception_ptr first_error;
            for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
                try {
                    auto t0 = std::chrono::steady_clock::now();
                    result = execute_task(problem, partition, task);
                    auto t1 = std::chrono::steady_clock::now();
                    busy_nanos += std::chrono::duration_cast<std::chrono::nanoseconds>(
                                      t1 - t0)
                                      .count();
                    ok = true;
                } catch (...) {
                    if (!first_error) first_error = std::current_exception();
                }
            }
            std::lock_guard<std::mutex> lock(mu);
            if (ok) {
                results.push_back(std::move(result));
            } else if (!fatal) {
                fatal = first_error;  // retried once already; give up
            }
            result_cv.notify_all();
        }
    }

    void submit(const TaskSpec& task) {
        {
            std::lock_guard<std::mutex> lock(mu);
            work.push_back(task);
            ++outstanding;
        }
        work_cv.notify_one();
    }

    std::optional<TaskResult> next_result() {
        std::unique_lock<std::mutex> lock(mu);
        if (outstanding == 0) return std::nullopt;
        result_cv.wait(lock, [this] { return !results.empty() || fatal; });
        if (fatal) {
            std::exception_ptr err = fatal;
            try {
                std::rethrow_exception(err);
            } catch (const std::exception& e) {
                throw NumericalFailure(
                    std::string("worker task failed twice, aborting run: ") +
                    e.what());
            }
        }
        TaskResult r = std::move(results.front());
        results.pop_front();
        --outstanding;
        return r;
    }
};

ThreadPoolExecutor::ThreadPoolExecutor(const TwoStageProblem& problem,
                                       const ClusterPartition& partition,
                                       int thread_count)
    : impl_(std::make_unique<Impl>(problem, partition, thread_count)) {}

ThreadPoolExecutor::~ThreadPoolExecutor() = default;

void ThreadPoolExecutor::submit(const TaskSpec& task) { impl_->submit(task); }

std::optional<TaskResult> ThreadPoolExecutor::next_result() {
    return impl_->next_result();
}

double ThreadPoolExecutor::total_busy_seconds() const {
    return impl_->busy_nanos.load() * 1e-9;
}

int ThreadPoolExecutor::thread_count() const { return impl_->threads_requested; }

std::pair<RunResult, RunStats> run_parallel(const std::string& algorithm,
                                            const TwoStageProblem& problem,
                                            const ClusterPartition& partition,
                                            const SolverConfig& solver_config,
                                            int thread_count,
                                            const MasterObserver& observer) {
    AlgorithmRunner runner = algorithm_by_name(algorithm);
    ThreadPoolExecutor exec(problem, partition, thread_count);
    auto t0 = std::chrono::steady_clock::now();
    RunResult result = runner(problem, partition, solver_config, exec, observer);
    auto t1 = std::chrono::steady_clock::now();
    double wall = std::chrono::duration<double>(t1 - t0).count();

    RunStats stats;
    stats.points_evaluated = result.points_evaluated;
    stats.max_cuts = result.max_cuts;
    stats.wall_clock = wall;
    stats.master_time = 0.0;  // measured master time is folded into wall clock
    stats.max_workers = thread_count;
    stats.avg_active_workers = thread_count;
    double busy = exec.total_busy_seconds();
    double owned = wall * thread_count;
    stats.parallel_efficiency = owned > 0 ? std::min(1.0, busy / owned) : 0.0;
    stats.efficiency_defined = owned > 0;
    stats.tasks_executed = result.tasks_executed;
    stats.total_worker_cpu = busy;
    result.stats = stats;
    return {result, stats};
}

}  // namespace stochgrid
