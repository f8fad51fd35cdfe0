#include "stochgrid/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "stochgrid/errors.hpp"

namespace stochgrid {

void SolverConfig::validate() const {
    if (!(epsilon_tol > 0)) throw ValidationError("config: epsilon_tol must be > 0");
    if (!(xi > 0 && xi < 0.5)) throw ValidationError("config: xi must lie in (0, 1/2)");
    if (!(eta >= 0 && eta < 1)) throw ValidationError("config: eta must lie in [0, 1)");
    if (!(sigma > 0 && sigma <= 1)) throw ValidationError("config: sigma must lie in (0, 1]");
    if (basket_capacity < 1) throw ValidationError("config: basket capacity K must be >= 1");
    if (!(delta_0 > 0 && delta_0 <= delta_hi))
        throw ValidationError("config: need 0 < delta_0 <= delta_hi");
    if (max_iterations < 1) throw ValidationError("config: iteration cap must be >= 1");
}

const char* to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::Converged: return "Converged";
        case TerminationReason::IterationCap: return "IterationCap";
        case TerminationReason::OptimalAtStart: return "OptimalAtStart";
        case TerminationReason::BasketDrained: return "BasketDrained";
    }
    return "?";
}

namespace {
const char* kind_name(TraceEventKind k) {
    switch (k) {
        case TraceEventKind::PointGenerated: return "generated";
        case TraceEventKind::ClusterApplied: return "cluster";
        case TraceEventKind::PointCompleted: return "completed";
        case TraceEventKind::StepAccepted: return "accepted";
        case TraceEventKind::StepRejected: return "rejected";
        case TraceEventKind::MasterSolved: return "master";
        case TraceEventKind::Terminated: return "terminated";
    }
    return "?";
}
}  // namespace

std::string TraceEvent::to_line() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "event=%s point=%d t=%d Q=%.17g m=%.17g delta=%.17g basket=%d",
                  kind_name(kind), point_id, clusters_done, q_value, m_value, delta,
                  basket_size);
    return buf;
}

double reduce_delta_tr(TrustRegionState& state, double center_value,
                       double candidate_value, double candidate_model_value) {
    double denom = center_value - candidate_model_value;
    if (!(denom > 0)) return state.delta;  // degenerate gap; caller converges
    double rho =
        std::min(1.0, state.delta) * (candidate_value - center_value) / denom;
    if (rho > 0) state.counter += 1;
    if (rho > 3 || (state.counter >= 3 && rho > 1 && rho <= 3)) {
        state.delta /= std::min(rho, 4.0);
        state.counter = 0;
    }
    return state.delta;
}

void reduce_delta_atr(IncumbentState& state, const PointRecord& point) {
    if (point.parent_incumbent == -1) return;
    double denom = point.parent_incumbent_value - point.model_value_at_generation;
    if (!(denom > 0)) return;
    double rho = std::min(1.0, point.delta_at_generation) *
                 (point.value - point.parent_incumbent_value) / denom;
    if (rho > 0) state.counter += 1;
    if (rho > 3 || (state.counter >= 3 && rho > 1 && rho <= 3)) {
        double delta_q_plus = point.delta_at_generation / std::min(rho, 4.0);
        state.delta_curr = std::min(state.delta_curr, delta_q_plus);
        state.counter = 0;
    }
}

namespace {

constexpr double kCutSkipTol = 1e-9;

// Shared controller plumbing: point table, task dispatch, cut application.
struct ControllerCore {
    const TwoStageProblem& problem;
    const ClusterPartition& partition;
    const SolverConfig& config;
    TaskExecutor& executor;
    const MasterObserver& observer;

    ModelState model;
    std::vector<PointRecord> points;
    std::vector<TraceEvent> trace;
    long tasks_executed = 0;
    long total_work_units = 0;
    long master_solves = 0;

    ControllerCore(const TwoStageProblem& p, const ClusterPartition& part,
                   const SolverConfig& cfg, TaskExecutor& exec,
                   const MasterObserver& obs)
        : problem(p), partition(part), config(cfg), executor(exec), observer(obs) {
        cfg.validate();
        p.validate();
        part.validate(p.num_scenarios());
        model = ModelState(part.num_clusters(), p.num_first_vars());
        model.theta_floor = cfg.theta_floor;
        model.inactivity_threshold = cfg.inactivity_threshold;
    }

    int num_clusters() const { return partition.num_clusters(); }

    Vector starting_point() const {
        Vector x0 = config.x0;
        if (x0.empty()) x0.assign(problem.num_first_vars(), 0.0);
        if (static_cast<int>(x0.size()) != problem.num_first_vars())
            throw ValidationError("config: x0 length does not match first stage");
        for (double& v : x0)
            if (v < 0) v = 0;  // projection onto x ≥ 0
        return x0;
    }

    void require_feasible_start(const Vector& x0) const {
        if (problem.first.num_rows() == 0) return;
        Vector ax = problem.first.A.mul(x0);
        for (int r = 0; r < problem.first.num_rows(); ++r)
            if (std::abs(ax[r] - problem.first.b[r]) > 1e-9)
                throw ValidationError(
                    "trust-region algorithms need a starting point with Ax=b; "
                    "supply a feasible x0");
    }

    int new_point(Vector x, int parent, double parent_value, double delta_q,
                  double m_q) {
        PointRecord rec;
        rec.id = static_cast<int>(points.size());
        rec.x = std::move(x);
        rec.parent_incumbent = parent;
        rec.parent_incumbent_value = parent_value;
        rec.delta_at_generation = delta_q;
        rec.model_value_at_generation = m_q;
        rec.value = dot(problem.first.c, rec.x);
        points.push_back(std::move(rec));
        return points.back().id;
    }

    void dispatch(int point_id) {
        for (const auto& chunk : partition.chunk_clusters) {
            TaskSpec task;
            task.point_id = point_id;
            task.x = points[point_id].x;
            task.cluster_ids = chunk;
            executor.submit(task);
        }
        trace.push_back({TraceEventKind::PointGenerated, point_id, 0,
                         points[point_id].value,
                         points[point_id].model_value_at_generation,
                         points[point_id].delta_at_generation, 0});
    }

    // Applies one cluster result: bumps t_q, folds the value, adds the cut
    // unless the model already matches the fresh evaluation at this point.
    void apply_cluster(const ClusterResult& cr, int point_id) {
        if (!cr.feasible)
            throw CompleteRecourseViolation(
                cr.infeasible_scenario, cr.farkas,
                "complete recourse violated at scenario " +
                    std::to_string(cr.infeasible_scenario));
        PointRecord& rec = points[point_id];
        rec.clusters_done += 1;
        rec.value += cr.value;
        double predicted = cluster_model_value(model, cr.cluster, rec.x);
        if (cr.value > predicted + kCutSkipTol) {
            Cut cut;
            cut.kind = CutKind::Optimality;
            cut.cluster = cr.cluster;
            cut.g = cr.subgrad;
            cut.f = cr.value - dot(cr.subgrad, rec.x);
            cut.origin_point = point_id;
            cut.parent_incumbent = rec.parent_incumbent;
            add_cut(model, cut);
        }
        if (rec.clusters_done == num_clusters()) {
            rec.completed = true;
            trace.push_back({TraceEventKind::PointCompleted, point_id,
                             rec.clusters_done, rec.value, 0.0, 0.0, 0});
        } else {
            trace.push_back({TraceEventKind::ClusterApplied, point_id,
                             rec.clusters_done, 0.0, 0.0, 0.0, 0});
        }
    }

    TaskResult take_result_or_throw() {
        auto r = executor.next_result();
        if (!r)
            throw NumericalFailure("executor returned no result while tasks were pending");
        tasks_executed += 1;
        total_work_units += r->work_units;
        return *r;
    }

    // Synchronous helper: dispatch a point and apply everything it produces.
    void evaluate_fully(int point_id) {
        dispatch(point_id);
        const int chunks = partition.num_chunks();
        for (int i = 0; i < chunks; ++i) {
            TaskResult r = take_result_or_throw();
            for (const ClusterResult& cr : r.clusters) apply_cluster(cr, r.point_id);
        }
        if (!points[point_id].completed)
            throw NumericalFailure("evaluation did not cover all clusters");
    }

    MasterSolution solve_master_step(const std::optional<Vector>& center,
                                     std::optional<double> delta, double center_value,
                                     int epoch) {
        MasterSolution sol = solve_master(model, problem.first, center, delta);
        master_solves += 1;
        executor.note_master_solve(sol.pivots);
        trace.push_back({TraceEventKind::MasterSolved, -1, 0, center_value,
                         sol.model_value, delta.value_or(0.0), 0});
        if (observer) {
            MasterObservation ob;
            ob.solve_counter = sol.solve_counter;
            ob.x = sol.x;
            ob.model_value = sol.model_value;
            ob.bound_active = sol.bound_active;
            ob.center = center;
            ob.delta = delta;
            ob.center_value = center_value;
            ob.epoch = epoch;
            ob.model = model;
            observer(ob);
        }
        return sol;
    }

    RunResult finish(Vector x, double objective, TerminationReason reason) {
        trace.push_back({TraceEventKind::Terminated, -1, 0, objective, 0.0, 0.0, 0});
        RunResult out;
        out.x = std::move(x);
        out.objective = objective;
        out.reason = reason;
        out.master_solves = master_solves;
        out.points_evaluated = static_cast<long>(points.size()) - 1;
        out.points = points;
        out.trace = std::move(trace);
        out.max_cuts = model.max_cuts_seen;
        out.tasks_executed = tasks_executed;
        out.total_work_units = total_work_units;
        out.stats.points_evaluated = out.points_evaluated;
        out.stats.max_cuts = out.max_cuts;
        out.stats.tasks_executed = tasks_executed;
        return out;
    }
};

bool stop_test(double reference, double model_value, double epsilon_tol) {
    return reference - model_value <= epsilon_tol * (1.0 + std::abs(reference));
}

}  // namespace

// ---------------------------------------------------------------------------
// Algorithm LS: synchronous multicut L-shaped loop. Cuts are never deleted.
// ---------------------------------------------------------------------------

RunResult run_ls(const TwoStageProblem& problem, const ClusterPartition& partition,
                 const SolverConfig& config, TaskExecutor& executor,
                 const MasterObserver& observer) {
    ControllerCore core(problem, partition, config, executor, observer);
    core.model.inactivity_threshold = -1;  // LS retains every cut

    Vector x0 = core.starting_point();
    int p0 = core.new_point(x0, -1, kInf, 0.0, 0.0);
    core.evaluate_fully(p0);
    double q_min = core.points[p0].value;
    int best = p0;

    while (true) {
        if (core.master_solves >= config.max_iterations)
            return core.finish(core.points[best].x, q_min,
                               TerminationReason::IterationCap);
        MasterSolution sol =
            core.solve_master_step(std::nullopt, std::nullopt, q_min, 0);
        if (!sol.bound_active && stop_test(q_min, sol.model_value, config.epsilon_tol)) {
            return core.finish(core.points[best].x, q_min,
                               core.master_solves == 1
                                   ? TerminationReason::OptimalAtStart
                                   : TerminationReason::Converged);
        }
        int p = core.new_point(sol.x, -1, kInf, 0.0, sol.model_value);
        core.evaluate_fully(p);
        if (core.points[p].value < q_min) {
            q_min = core.points[p].value;
            best = p;
        }
    }
}

// ---------------------------------------------------------------------------
// Algorithm TR: ℓ∞ trust region with acceptance test, Model-Update and
// Reduce-Δ between minor iterations.
// ---------------------------------------------------------------------------

RunResult run_tr(const TwoStageProblem& problem, const ClusterPartition& partition,
                 const SolverConfig& config, TaskExecutor& executor,
                 const MasterObserver& observer) {
    ControllerCore core(problem, partition, config, executor, observer);

    Vector x0 = core.starting_point();
    core.require_feasible_start(x0);
    int center = core.new_point(x0, -1, kInf, 0.0, 0.0);
    core.evaluate_fully(center);
    double center_value = core.points[center].value;

    TrustRegionState tr{config.delta_0, 0};
    int major = 0;
    std::vector<std::pair<int, double>> minor_points;

    while (true) {
        if (core.master_solves >= config.max_iterations)
            return core.finish(core.points[center].x, center_value,
                               TerminationReason::IterationCap);
        MasterSolution sol = core.solve_master_step(core.points[center].x, tr.delta,
                                                    center_value, major);
        if (!sol.bound_active &&
            stop_test(center_value, sol.model_value, config.epsilon_tol)) {
            return core.finish(core.points[center].x, center_value,
                               core.master_solves == 1
                                   ? TerminationReason::OptimalAtStart
                                   : TerminationReason::Converged);
        }
        double predicted = center_value - sol.model_value;
        if (!(predicted > 0)) {
            // exact model at a non-certified point: treat as converged here
            return core.finish(core.points[center].x, center_value,
                               TerminationReason::Converged);
        }
        int cand = core.new_point(sol.x, center, center_value, tr.delta,
                                  sol.model_value);
        core.evaluate_fully(cand);
        double cand_value = core.points[cand].value;

        if (cand_value <= center_value - config.xi * predicted) {
            // step accepted; possibly enlarge the trust region
            if (cand_value <= center_value - 0.5 * predicted &&
                inf_dist(core.points[cand].x, core.points[center].x) >=
                    tr.delta - 1e-9) {
                tr.delta = std::min(config.delta_hi, 2.0 * tr.delta);
            }
            center = cand;
            center_value = cand_value;
            mark_deletable_on_accept(core.model, cand, sol.active_cut_ids);
            prune(core.model);
            tr.counter = 0;
            minor_points.clear();
            major += 1;
            core.trace.push_back({TraceEventKind::StepAccepted, cand,
                                  core.points[cand].clusters_done, cand_value,
                                  sol.model_value, tr.delta, 0});
        } else {
            minor_points.emplace_back(cand, sol.model_value);
            TrUpdateArgs args;
            args.major_point = center;
            args.center_value = center_value;
            args.m_latest = sol.model_value;
            args.eta = config.eta;
            args.minor_points = minor_points;
            args.active_cut_ids = sol.active_cut_ids;
            model_update_tr(core.model, args);
            prune(core.model);
            reduce_delta_tr(tr, center_value, cand_value, sol.model_value);
            core.trace.push_back({TraceEventKind::StepRejected, cand,
                                  core.points[cand].clusters_done, cand_value,
                                  sol.model_value, tr.delta, 0});
        }
    }
}

// ---------------------------------------------------------------------------
// Algorithm ALS: event-driven asynchronous L-shaped. New candidates trigger
// when a σ fraction of a point's clusters have come back.
// ---------------------------------------------------------------------------

RunResult run_als(const TwoStageProblem& problem, const ClusterPartition& partition,
                  const SolverConfig& config, TaskExecutor& executor,
                  const MasterObserver& observer) {
    ControllerCore core(problem, partition, config, executor, observer);
    core.model.inactivity_threshold = -1;  // no deletion in the L-shaped variants

    const int T = core.num_clusters();
    double q_min = kInf;
    int best = -1;

    Vector x0 = core.starting_point();
    int p0 = core.new_point(x0, -1, kInf, 0.0, 0.0);
    core.dispatch(p0);

    while (true) {
        auto r = executor.next_result();
        if (!r) {
            // cannot happen while any point is mid-evaluation; defensive exit
            Vector x = best >= 0 ? core.points[best].x : core.points[p0].x;
            return core.finish(x, q_min, TerminationReason::BasketDrained);
        }
        core.tasks_executed += 1;
        core.total_work_units += r->work_units;
        for (const ClusterResult& cr : r->clusters) {
            int q = r->point_id;
            core.apply_cluster(cr, q);
            PointRecord& rec = core.points[q];
            if (rec.completed && rec.value < q_min) {
                q_min = rec.value;
                best = q;
            }
            if (rec.clusters_done >= config.sigma * T - 1e-12 && !rec.speceval) {
                rec.speceval = true;
                if (core.master_solves >= config.max_iterations) {
                    Vector x = best >= 0 ? core.points[best].x : core.points[p0].x;
                    return core.finish(x, q_min, TerminationReason::IterationCap);
                }
                MasterSolution sol =
                    core.solve_master_step(std::nullopt, std::nullopt, q_min, 0);
                if (!sol.bound_active && q_min < kInf &&
                    stop_test(q_min, sol.model_value, config.epsilon_tol)) {
                    return core.finish(core.points[best].x, q_min,
                                       core.master_solves == 1
                                           ? TerminationReason::OptimalAtStart
                                           : TerminationReason::Converged);
                }
                int p = core.new_point(sol.x, -1, kInf, 0.0, sol.model_value);
                core.dispatch(p);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Algorithm ATR: basket of in-flight points, incumbent-centered trust
// regions, event-driven accept/reject on completion.
// ---------------------------------------------------------------------------

RunResult run_atr(const TwoStageProblem& problem, const ClusterPartition& partition,
                  const SolverConfig& config, TaskExecutor& executor,
                  const MasterObserver& observer) {
    ControllerCore core(problem, partition, config, executor, observer);

    const int T = core.num_clusters();
    const int K = config.basket_capacity;

    Vector x0 = core.starting_point();
    core.require_feasible_start(x0);
    int p0 = core.new_point(x0, -1, kInf, config.delta_0, 0.0);

    IncumbentState inc;
    inc.delta_curr = config.delta_0;
    inc.basket.insert(p0);
    std::vector<int> last_active_ids;
    int latest_point = p0;

    core.dispatch(p0);

    auto incumbent_x = [&]() -> const Vector& {
        return core.points[inc.incumbent == -1 ? p0 : inc.incumbent].x;
    };
    auto best_known = [&](TerminationReason reason) {
        if (inc.incumbent >= 0)
            return core.finish(core.points[inc.incumbent].x, inc.incumbent_value,
                               reason);
        return core.finish(core.points[p0].x,
                           core.points[p0].completed ? core.points[p0].value : kInf,
                           reason);
    };

    while (true) {
        auto r = executor.next_result();
        if (!r) return best_known(TerminationReason::BasketDrained);
        core.tasks_executed += 1;
        core.total_work_units += r->work_units;
        for (const ClusterResult& cr : r->clusters) {
            int q = r->point_id;
            core.apply_cluster(cr, q);
            PointRecord& rec = core.points[q];
            bool basket_fill = false;
            bool basket_update = false;

            if (rec.completed) {
                double q_value = rec.value;
                bool accept =
                    q_value < inc.incumbent_value &&
                    (rec.parent_incumbent == -1 ||
                     q_value <= rec.parent_incumbent_value -
                                    config.xi * (rec.parent_incumbent_value -
                                                 rec.model_value_at_generation));
                if (accept) {
                    if (rec.parent_incumbent != -1) {
                        double predicted = rec.parent_incumbent_value -
                                           rec.model_value_at_generation;
                        if (q_value <= rec.parent_incumbent_value - 0.5 * predicted &&
                            inf_dist(rec.x,
                                     core.points[rec.parent_incumbent].x) >=
                                rec.delta_at_generation - 1e-9) {
                            inc.delta_curr =
                                std::max(inc.delta_curr,
                                         std::min(config.delta_hi,
                                                  2.0 * rec.delta_at_generation));
                        }
                    }
                    inc.incumbent = q;
                    inc.incumbent_value = q_value;
                    inc.counter = 0;  // reset on each new incumbent
                    mark_deletable_on_accept(core.model, q, last_active_ids);
                    prune(core.model);
                    core.trace.push_back({TraceEventKind::StepAccepted, q, T,
                                          q_value, rec.model_value_at_generation,
                                          inc.delta_curr,
                                          static_cast<int>(inc.basket.size())});
                } else {
                    AtrUpdateArgs args;
                    args.incumbent_point = inc.incumbent;
                    args.incumbent_value = inc.incumbent_value;
                    args.m_latest =
                        core.points[latest_point].model_value_at_generation;
                    args.eta = config.eta;
                    for (const PointRecord& p : core.points)
                        if (p.parent_incumbent == inc.incumbent &&
                            p.parent_incumbent != -1)
                            args.same_incumbent_points.emplace_back(
                                p.id, p.model_value_at_generation);
                    args.active_cut_ids = last_active_ids;
                    model_update_atr(core.model, args);
                    prune(core.model);
                    reduce_delta_atr(inc, rec);
                    core.trace.push_back({TraceEventKind::StepRejected, q, T,
                                          q_value, rec.model_value_at_generation,
                                          inc.delta_curr,
                                          static_cast<int>(inc.basket.size())});
                }
                inc.basket.erase(q);
                basket_update = true;
            } else if (rec.clusters_done >= config.sigma * T - 1e-12 &&
                       static_cast<int>(inc.basket.size()) < K && !rec.speceval) {
                rec.speceval = true;
                basket_fill = true;
            }

            if (basket_fill || basket_update) {
                if (core.master_solves >= config.max_iterations)
                    return best_known(TerminationReason::IterationCap);
                MasterSolution sol = core.solve_master_step(
                    incumbent_x(), inc.delta_curr, inc.incumbent_value,
                    inc.incumbent);
                last_active_ids = sol.active_cut_ids;
                if (inc.incumbent != -1 && !sol.bound_active &&
                    stop_test(inc.incumbent_value, sol.model_value,
                              config.epsilon_tol)) {
                    return core.finish(core.points[inc.incumbent].x,
                                       inc.incumbent_value,
                                       core.master_solves == 1
                                           ? TerminationReason::OptimalAtStart
                                           : TerminationReason::Converged);
                }
                int p = core.new_point(sol.x, inc.incumbent, inc.incumbent_value,
                                       inc.delta_curr, sol.model_value);
                latest_point = p;
                inc.basket.insert(p);
                core.dispatch(p);
            }
        }
    }
}

AlgorithmRunner algorithm_by_name(const std::string& name) {
    if (name == "ls") return &run_ls;
    if (name == "tr") return &run_tr;
    if (name == "als") return &run_als;
    if (name == "atr") return &run_atr;
    throw ValidationError("unknown algorithm: " + name +
                          " (expected ls, als, tr, or atr)");
}

}  // namespace stochgrid
