#include "stochgrid/gridsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <queue>
#include <random>
#include <set>

#include "stochgrid/errors.hpp"

namespace stochgrid {

int max_workers(int basket_capacity, int num_chunks, const std::string& algorithm) {
    if (basket_capacity < 1 || num_chunks < 1)
        throw ValidationError("max_workers: K and C must be >= 1");
    long v;
    if (algorithm == "als") {
        v = 2L * num_chunks;
    } else if (algorithm == "ls" || algorithm == "tr") {
        v = (1L + 1L) * num_chunks / 2;  // K = 1 in the trust-region formula
    } else if (algorithm == "atr") {
        v = (static_cast<long>(basket_capacity) + 1L) * num_chunks / 2;
    } else {
        throw ValidationError("max_workers: unknown algorithm " + algorithm);
    }
    long mid = std::min(std::max(v, 25L), 200L);  // median of {25, 200, v}
    return static_cast<int>(mid);
}

double WorkerLedger::total_owned() const {
    double s = 0.0;
    for (const auto& w : workers) s += w.owned;
    return s;
}

double WorkerLedger::total_busy() const {
    double s = 0.0;
    for (const auto& w : workers) s += w.busy;
    return s;
}

double parallel_efficiency(const WorkerLedger& ledger, bool* defined) {
    double owned = ledger.total_owned();
    if (owned <= 0.0) {
        if (defined) *defined = false;
        return 0.0;
    }
    if (defined) *defined = true;
    return ledger.total_busy() / owned;
}

// ---------------------------------------------------------------------------
// SimExecutor
// ---------------------------------------------------------------------------

namespace {

double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

double exponential(std::mt19937_64& rng, double mean) {
    double u = uniform01(rng);
    if (u >= 1.0) u = 1.0 - 1e-16;
    return -mean * std::log(1.0 - u);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

struct SimExecutor::Impl {
    enum class EventKind {
        Arrival,
        PoissonArrival,
        BenchmarkDone,
        ExecutionDone,
        ExecutionAbort,
        RequeueCopy,
        Suspend,  // presence-sampling trigger; execution walks own the timing
        Resume
    };
    struct Event {
        double time;
        long seq;
        EventKind kind;
        int worker = -1;
        long exec = -1;
        bool operator>(const Event& o) const {
            if (time != o.time) return time > o.time;
            return seq > o.seq;
        }
    };

    struct Worker {
        WorkerProfile profile;
        bool admitted = false;
        bool benchmarked = false;
        bool busy = false;
        double busy_accum = 0.0;  // active execution seconds
    };

    struct Execution {
        long id = 0;
        long task_seq = 0;
        int worker = -1;
        double start = 0.0;
        double finish = 0.0;   // wall time when it would complete
        double active = 0.0;   // active work seconds it represents
        bool benchmark = false;
        TaskSpec spec;
        TaskResult result;
        bool aborted = false;
    };

    struct PendingTask {
        long task_seq;
        TaskSpec spec;
    };

    const TwoStageProblem& problem;
    const ClusterPartition& partition;
    SimConfig cfg;
    int cap;

    double now_ = 0.0;
    long seq_ = 0;
    long next_exec_ = 0;
    long next_task_seq_ = 0;
    int next_worker_id_ = 0;
    double master_time_ = 0.0;
    bool assign_enabled_ = true;

    std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events;
    std::deque<PendingTask> pending;
    std::deque<TaskResult> deliveries;
    std::vector<Worker> workers;
    std::vector<Execution> executions;
    std::set<long> applied_tasks;
    std::set<long> requeued_tasks;  // task_seqs already rescheduled once
    long inflight_ = 0;

    WorkerLedger ledger_;
    bool ledger_final_ = false;

    std::mt19937_64 arrivals_rng;

    Impl(const TwoStageProblem& p, const ClusterPartition& part, const SimConfig& c,
         int worker_cap)
        : problem(p), partition(part), cfg(c), cap(worker_cap),
          arrivals_rng(mix_seed(c.seed, 0xa11)) {
        if (!cfg.explicit_workers.empty()) {
            for (const WorkerProfile& wp : cfg.explicit_workers) {
                push_event(wp.arrival, EventKind::Arrival, add_worker(wp));
            }
        } else {
            for (int i = 0; i < cfg.initial_workers; ++i)
                push_event(0.0, EventKind::Arrival, add_worker(generate_profile(0.0)));
            if (cfg.arrival_rate > 0)
                push_event(exponential(arrivals_rng, 1.0 / cfg.arrival_rate),
                           EventKind::PoissonArrival);
        }
    }

    void push_event(double time, EventKind kind, int worker = -1, long exec = -1) {
        events.push({time, seq_++, kind, worker, exec});
    }

    int add_worker(WorkerProfile profile) {
        profile.id = next_worker_id_++;
        Worker w;
        w.profile = std::move(profile);
        workers.push_back(std::move(w));
        return workers.back().profile.id;
    }

    WorkerProfile generate_profile(double arrival) {
        WorkerProfile wp;
        std::mt19937_64 rng(mix_seed(cfg.seed, 0xbeef00 + next_worker_id_));
        wp.arrival = arrival;
        wp.speed = 1.0 + uniform01(rng) * std::max(0.0, cfg.speed_spread_max - 1.0);
        wp.departure = cfg.departure_rate > 0
                           ? arrival + exponential(rng, 1.0 / cfg.departure_rate)
                           : kInf;
        if (cfg.suspension_rate > 0 && cfg.suspension_mean_duration > 0) {
            double horizon = std::min(wp.departure, cfg.time_cap);
            double t = arrival;
            while (static_cast<int>(wp.suspensions.size()) < 100000) {
                t += exponential(rng, 1.0 / cfg.suspension_rate);
                if (t >= horizon) break;
                double d = exponential(rng, cfg.suspension_mean_duration);
                wp.suspensions.emplace_back(t, std::min(t + d, horizon));
                t += d;
            }
        }
        return wp;
    }

    bool departed(const Worker& w, double t) const { return t >= w.profile.departure; }

    bool suspended(const Worker& w, double t) const {
        for (const auto& [s, r] : w.profile.suspensions)
            if (t >= s && t < r) return true;
        return false;
    }

    // Wall-clock time at which `active` seconds of work starting at `start`
    // finish, skipping suspension intervals.
    double finish_time(const Worker& w, double start, double active) const {
        double t = start;
        double remaining = active;
        for (const auto& [s, r] : w.profile.suspensions) {
            if (r <= t) continue;
            double begin = std::max(s, t);
            if (begin >= t + remaining) break;
            remaining -= std::max(0.0, begin - t);
            t = r;
        }
        return t + remaining;
    }

    // Active (non-suspended) seconds inside [a, b).
    double active_span(const WorkerProfile& wp, double a, double b) const {
        if (b <= a) return 0.0;
        double span = b - a;
        for (const auto& [s, r] : wp.suspensions) {
            double lo = std::max(a, s);
            double hi = std::min(b, r);
            if (hi > lo) span -= hi - lo;
        }
        return span;
    }

    int owned_now(double t) const {
        int n = 0;
        for (const auto& w : workers)
            if (w.admitted && w.profile.arrival <= t && !departed(w, t)) ++n;
        return n;
    }

    int active_now(double t) const {
        int n = 0;
        for (const auto& w : workers)
            if (w.admitted && w.profile.arrival <= t && !departed(w, t) &&
                !suspended(w, t))
                ++n;
        return n;
    }

    std::vector<std::pair<double, int>> worker_series;

    void sample_worker_count() {
        int n = active_now(now_);
        if (worker_series.empty() || worker_series.back().second != n)
            worker_series.emplace_back(now_, n);
    }

    void try_assign() {
        if (!assign_enabled_) return;
        while (!pending.empty()) {
            int pick = -1;
            for (const auto& w : workers) {
                if (!w.admitted || !w.benchmarked || w.busy) continue;
                if (departed(w, now_) || suspended(w, now_)) continue;
                if (pick < 0 ||
                    w.profile.benchmark_time <
                        workers[pick].profile.benchmark_time - 1e-15 ||
                    (std::abs(w.profile.benchmark_time -
                              workers[pick].profile.benchmark_time) <= 1e-15 &&
                     w.profile.id < pick))
                    pick = w.profile.id;
            }
            if (pick < 0) return;
            PendingTask task = pending.front();
            pending.pop_front();
            start_execution(pick, task);
        }
    }

    void start_execution(int worker_id, const PendingTask& task) {
        Worker& w = workers[worker_id];
        TaskResult result = execute_task(problem, partition, task.spec);
        double active = result.work_units * cfg.unit_cost * w.profile.speed +
                        cfg.task_latency;
        Execution ex;
        ex.id = next_exec_++;
        ex.task_seq = task.task_seq;
        ex.worker = worker_id;
        ex.start = now_;
        ex.active = active;
        ex.finish = finish_time(w, now_, active);
        ex.spec = task.spec;
        ex.result = std::move(result);
        w.busy = true;
        ++inflight_;
        if (ex.finish > w.profile.departure) {
            // the worker disappears mid-task: reschedule at departure
            push_event(w.profile.departure, EventKind::ExecutionAbort, worker_id,
                       ex.id);
        } else {
            push_event(ex.finish, EventKind::ExecutionDone, worker_id, ex.id);
        }
        if (cfg.reschedule_on_suspend) {
            for (const auto& [s, r] : w.profile.suspensions) {
                if (s > ex.start && s < ex.finish) {
                    push_event(s, EventKind::RequeueCopy, worker_id, ex.id);
                    break;
                }
            }
        }
        executions.push_back(std::move(ex));
    }

    void start_benchmark(int worker_id) {
        Worker& w = workers[worker_id];
        double active = cfg.benchmark_work_units * cfg.unit_cost * w.profile.speed +
                        cfg.task_latency;
        Execution ex;
        ex.id = next_exec_++;
        ex.worker = worker_id;
        ex.start = now_;
        ex.active = active;
        ex.finish = finish_time(w, now_, active);
        ex.benchmark = true;
        w.busy = true;
        if (ex.finish > w.profile.departure) {
            push_event(w.profile.departure, EventKind::ExecutionAbort, worker_id,
                       ex.id);
        } else {
            push_event(ex.finish, EventKind::BenchmarkDone, worker_id, ex.id);
        }
        executions.push_back(std::move(ex));
    }

    void handle(const Event& ev) {
        now_ = ev.time;
        switch (ev.kind) {
            case EventKind::Arrival: {
                Worker& w = workers[ev.worker];
                if (owned_now(now_) >= cap) break;  // pool full: turned away
                if (departed(w, now_)) break;
                w.admitted = true;
                for (const auto& [s, r] : w.profile.suspensions) {
                    if (s < w.profile.departure)
                        push_event(s, EventKind::Suspend, w.profile.id);
                    if (r < w.profile.departure)
                        push_event(r, EventKind::Resume, w.profile.id);
                }
                if (w.profile.departure < kInf)
                    push_event(w.profile.departure, EventKind::Suspend, w.profile.id);
                start_benchmark(w.profile.id);
                break;
            }
            case EventKind::PoissonArrival: {
                int id = add_worker(generate_profile(now_));
                push_event(now_, EventKind::Arrival, id);
                push_event(now_ + exponential(arrivals_rng, 1.0 / cfg.arrival_rate),
                           EventKind::PoissonArrival);
                break;
            }
            case EventKind::BenchmarkDone: {
                Worker& w = workers[ev.worker];
                Execution& ex = executions[ev.exec];
                w.busy = false;
                w.benchmarked = true;
                w.profile.benchmark_time = now_ - ex.start;
                w.busy_accum += ex.active;
                ledger_.benchmark_duration += ex.active;
                break;
            }
            case EventKind::ExecutionDone: {
                Worker& w = workers[ev.worker];
                Execution& ex = executions[ev.exec];
                w.busy = false;
                w.busy_accum += ex.active;
                --inflight_;
                if (applied_tasks.count(ex.task_seq)) {
                    // a rescheduled copy already delivered this task
                    ledger_.discarded_duration += ex.active;
                    ledger_.discarded_count += 1;
                } else {
                    applied_tasks.insert(ex.task_seq);
                    ledger_.applied_duration += ex.active;
                    ledger_.applied_count += 1;
                    deliveries.push_back(ex.result);
                }
                break;
            }
            case EventKind::ExecutionAbort: {
                Worker& w = workers[ev.worker];
                Execution& ex = executions[ev.exec];
                ex.aborted = true;
                w.busy = false;
                if (!ex.benchmark) --inflight_;
                double done = active_span(w.profile, ex.start, now_);
                w.busy_accum += done;
                ledger_.discarded_duration += done;
                ledger_.discarded_count += 1;
                if (!ex.benchmark && !applied_tasks.count(ex.task_seq)) {
                    // task returns to the head of the pool
                    PendingTask t;
                    t.task_seq = ex.task_seq;
                    t.spec = ex.spec;
                    pending.push_front(std::move(t));
                }
                break;
            }
            case EventKind::RequeueCopy: {
                Execution& ex = executions[ev.exec];
                if (ex.aborted || applied_tasks.count(ex.task_seq)) break;
                if (requeued_tasks.count(ex.task_seq)) break;
                requeued_tasks.insert(ex.task_seq);
                PendingTask t;
                t.task_seq = ex.task_seq;
                t.spec = ex.spec;
                pending.push_front(std::move(t));
                break;
            }
            case EventKind::Suspend:
            case EventKind::Resume:
                break;  // presence change only; assignment/sampling follows
        }
        sample_worker_count();
    }

    void submit(const TaskSpec& task) {
        PendingTask t;
        t.task_seq = next_task_seq_++;
        t.spec = task;
        pending.push_back(std::move(t));
        try_assign();
    }

    std::optional<TaskResult> next_result() {
        while (deliveries.empty()) {
            try_assign();
            if (events.empty()) {
                if (pending.empty() && inflight_ == 0) return std::nullopt;
                throw NumericalFailure(
                    "simulation deadlock: tasks pending but no worker will ever "
                    "become available");
            }
            Event ev = events.top();
            events.pop();
            if (ev.time > cfg.time_cap)
                throw NumericalFailure(
                    "simulated time cap exceeded; workers never finished the "
                    "pending tasks");
            handle(ev);
        }
        TaskResult r = deliveries.front();
        deliveries.pop_front();
        return r;
    }

    void note_master_solve(long pivots) {
        double cost = pivots * cfg.master_unit_cost;
        master_time_ += cost;
        double target = now_ + cost;
        assign_enabled_ = false;  // the master is blocking; workers idle
        while (!events.empty() && events.top().time <= target) {
            Event ev = events.top();
            events.pop();
            handle(ev);
        }
        now_ = target;
        assign_enabled_ = true;
        try_assign();
    }

    // Consistent snapshot: in-flight executions contribute their elapsed
    // active span to both the busy side and the discarded/benchmark side, so
    // Σ busy = applied + discarded + benchmark holds exactly at any time.
    const WorkerLedger& ledger() {
        snapshot_ = ledger_;
        snapshot_.workers.clear();
        for (const auto& w : workers) {
            if (!w.admitted) continue;
            WorkerLedger::Entry e;
            e.worker_id = w.profile.id;
            double end = std::min(now_, w.profile.departure);
            e.owned = active_span(w.profile, w.profile.arrival, end);
            double busy = w.busy_accum;
            if (w.busy) {
                for (const auto& ex : executions) {
                    if (ex.worker != w.profile.id || ex.aborted) continue;
                    if (ex.start > now_ || ex.finish <= now_) continue;
                    double partial = active_span(w.profile, ex.start, now_);
                    busy += partial;
                    if (ex.benchmark) {
                        snapshot_.benchmark_duration += partial;
                    } else {
                        snapshot_.discarded_duration += partial;
                        snapshot_.discarded_count += 1;
                    }
                }
            }
            e.busy = busy;
            snapshot_.workers.push_back(e);
        }
        return snapshot_;
    }
    WorkerLedger snapshot_;

    double average_active_workers() const {
        if (now_ <= 0) return 0.0;
        double total = 0.0;
        for (const auto& w : workers) {
            if (!w.admitted) continue;
            double end = std::min(now_, w.profile.departure);
            total += active_span(w.profile, w.profile.arrival, end);
        }
        return total / now_;
    }
};

SimExecutor::SimExecutor(const TwoStageProblem& problem,
                         const ClusterPartition& partition, const SimConfig& config,
                         int worker_cap)
    : impl_(std::make_unique<Impl>(problem, partition, config, worker_cap)) {}

SimExecutor::~SimExecutor() = default;

void SimExecutor::submit(const TaskSpec& task) { impl_->submit(task); }

std::optional<TaskResult> SimExecutor::next_result() { return impl_->next_result(); }

void SimExecutor::note_master_solve(long pivots) { impl_->note_master_solve(pivots); }

double SimExecutor::now() const { return impl_->now_; }

double SimExecutor::master_time() const { return impl_->master_time_; }

const WorkerLedger& SimExecutor::ledger() { return impl_->ledger(); }

double SimExecutor::average_active_workers() const {
    return impl_->average_active_workers();
}

const std::vector<std::pair<double, int>>& SimExecutor::worker_count_series() const {
    return impl_->worker_series;
}

std::pair<RunResult, RunStats> simulate(
    const std::string& algorithm, const TwoStageProblem& problem,
    const ClusterPartition& partition, const SolverConfig& solver_config,
    const SimConfig& sim_config, const MasterObserver& observer,
    std::vector<std::pair<double, int>>* worker_series_out) {
    AlgorithmRunner runner = algorithm_by_name(algorithm);
    int cap = sim_config.max_workers_override >= 0
                  ? sim_config.max_workers_override
                  : max_workers(solver_config.basket_capacity, partition.num_chunks(),
                                algorithm);
    SimExecutor exec(problem, partition, sim_config, cap);
    RunResult result = runner(problem, partition, solver_config, exec, observer);
    if (worker_series_out) *worker_series_out = exec.worker_count_series();

    RunStats stats;
    stats.points_evaluated = result.points_evaluated;
    stats.max_cuts = result.max_cuts;
    stats.master_time = exec.master_time();
    stats.wall_clock = exec.now();
    stats.avg_active_workers = exec.average_active_workers();
    stats.max_workers = cap;
    const WorkerLedger& ledger = exec.ledger();
    bool defined = true;
    stats.parallel_efficiency = parallel_efficiency(ledger, &defined);
    stats.efficiency_defined = defined;
    stats.tasks_executed = result.tasks_executed;
    stats.total_worker_cpu = ledger.total_busy();
    result.stats = stats;
    return {result, stats};
}

std::string stats_csv_header() {
    return "run,points_evaluated,sigma_or_K,tasks_C,clusters_T,max_procs,avg_procs,"
           "parallel_efficiency,max_cuts,master_time,wall_clock";
}

std::string stats_csv_row(const std::string& run_name, const RunStats& stats,
                          double sigma_or_k, int num_chunks, int num_clusters) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%ld,%.9g,%d,%d,%d,%.9g,%.9g,%d,%.9g,%.9g",
                  run_name.c_str(), stats.points_evaluated, sigma_or_k, num_chunks,
                  num_clusters, stats.max_workers, stats.avg_active_workers,
                  stats.parallel_efficiency, stats.max_cuts, stats.master_time,
                  stats.wall_clock);
    return buf;
}

}  // namespace stochgrid
