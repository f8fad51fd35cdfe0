// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Everything is pinned here — tolerances, seeds, grids — so a run
// is reproducible end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stochgrid/errors.hpp"
#include "stochgrid/executor.hpp"
#include "stochgrid/gridsim.hpp"
#include "stochgrid/oracle.hpp"
#include "stochgrid/recourse.hpp"
#include "stochgrid/smps.hpp"
#include "stochgrid/solvers.hpp"
#include "support/test_helpers.hpp"

using namespace stochgrid;
namespace st = stochgrid::testing;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void fail(const std::string& why) {
        if (ok) detail = why;
        ok = false;
    }
    void expect(bool cond, const std::string& why) {
        if (!cond) fail(why);
    }
};

std::vector<TerminationReason> g_all_reasons;

void note_run(const RunResult& r) { g_all_reasons.push_back(r.reason); }

bool finished(const RunResult& r) {
    return r.reason == TerminationReason::Converged ||
           r.reason == TerminationReason::OptimalAtStart;
}

const char* kAlgorithms[4] = {"ls", "als", "tr", "atr"};

SolverConfig config_for(const std::string& algo, const Vector& x0) {
    SolverConfig cfg;
    cfg.x0 = x0;
    if (algo == "als") cfg.sigma = 0.7;
    if (algo == "atr") {
        cfg.sigma = 0.7;
        cfg.basket_capacity = 3;
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence on toy-nv and ten seeded random instances
// ---------------------------------------------------------------------------
Check criterion_oracle_equivalence() {
    Check c;
    std::mt19937_64 rng(20240612);
    for (int inst_id = 0; inst_id < 11; ++inst_id) {
        TwoStageProblem problem;
        Vector x0;
        if (inst_id == 0) {
            problem = toy_nv();
            x0 = {0.0};
        } else {
            auto inst = st::random_instance(rng, {4, 3, 16, inst_id % 3 == 0});
            problem = inst.problem;
            x0 = inst.feasible_start;
        }
        OracleSolution oracle = solve_deterministic_equivalent(problem);
        int N = problem.num_scenarios();
        ClusterPartition part =
            make_partition(N, std::min(4, N), std::min(2, std::min(4, N)));
        for (const char* algo : kAlgorithms) {
            SolverConfig cfg = config_for(algo, x0);
            SerialExecutor exec(problem, part);
            RunResult r = algorithm_by_name(algo)(problem, part, cfg, exec, {});
            note_run(r);
            double rel =
                std::abs(r.objective - oracle.objective) /
                (1.0 + std::abs(oracle.objective));
            if (rel > 1e-5) {
                std::ostringstream os;
                os << algo << " on instance " << inst_id << ": |" << r.objective
                   << " - " << oracle.objective << "| rel gap " << rel << " > 1e-5";
                c.fail(os.str());
            }
        }
    }
    if (c.ok) c.detail = "44 runs within 1e-5 of the deterministic equivalent";
    return c;
}

// ---------------------------------------------------------------------------
// 2. toy-nv ground truth
// ---------------------------------------------------------------------------
Check criterion_toy_ground_truth() {
    Check c;
    TwoStageProblem p = toy_nv();
    OracleSolution oracle = solve_deterministic_equivalent(p);
    c.expect(std::abs(oracle.objective - 3.0) <= 1e-9, "oracle objective != 3.0");
    c.expect(std::abs(oracle.x[0] - 3.0) <= 1e-7, "oracle x* != 3");
    QEvaluation q0 = evaluate_Q(p, {0.0});
    c.expect(std::abs(q0.value - 4.4) <= 1e-8, "evaluate_Q(0) != 4.4");
    c.expect(std::abs(q0.subgradient[0] + 1.0) <= 1e-8, "subgradient at 0 != -1");
    ClusterPartition part = make_partition(2, 2, 2);
    for (const char* algo : kAlgorithms) {
        SolverConfig cfg = config_for(algo, {0.0});
        SerialExecutor exec(p, part);
        RunResult r = algorithm_by_name(algo)(p, part, cfg, exec, {});
        note_run(r);
        c.expect(finished(r), std::string(algo) + " did not converge");
        c.expect(std::abs(r.objective - 3.0) <= 1e-5 * 4.0,
                 std::string(algo) + " missed 3.0, got " + std::to_string(r.objective));
        c.expect(std::abs(r.x[0] - 3.0) <= 1e-3,
                 std::string(algo) + " final x far from 3");
    }
    if (c.ok) c.detail = "Q*=3.0 at x*=3; Q(0)=4.4 with subgradient -1";
    return c;
}

// ---------------------------------------------------------------------------
// 3. Degeneracy identities under the serialized executor
// ---------------------------------------------------------------------------
Check criterion_degeneracy() {
    Check c;
    for (bool steep : {false, true}) {
        TwoStageProblem p = toy_nv();
        if (steep) p.scenarios[0].q = {2.0, 100.0};
        ClusterPartition part = make_partition(2, 2, 2);

        SolverConfig ls_cfg = config_for("ls", {0.0});
        SerialExecutor e1(p, part);
        RunResult ls = run_ls(p, part, ls_cfg, e1);
        SolverConfig als_cfg = ls_cfg;
        als_cfg.sigma = 1.0;
        SerialExecutor e2(p, part);
        RunResult als = run_als(p, part, als_cfg, e2);
        note_run(ls);
        note_run(als);
        c.expect(ls.points.size() == als.points.size(),
                 "ALS(sigma=1) point count differs from LS");
        for (size_t i = 0; i < ls.points.size() && c.ok; ++i)
            c.expect(ls.points[i].x == als.points[i].x,
                     "ALS(sigma=1) diverged from LS at point " + std::to_string(i));
        c.expect(ls.objective == als.objective, "ALS(sigma=1) objective differs");

        SolverConfig tr_cfg = config_for("tr", {0.0});
        SerialExecutor e3(p, part);
        RunResult tr = run_tr(p, part, tr_cfg, e3);
        SolverConfig atr_cfg = tr_cfg;
        atr_cfg.sigma = 1.0;
        atr_cfg.basket_capacity = 1;
        SerialExecutor e4(p, part);
        RunResult atr = run_atr(p, part, atr_cfg, e4);
        note_run(tr);
        note_run(atr);
        c.expect(tr.points.size() == atr.points.size(),
                 "ATR(K=1,sigma=1) point count differs from TR");
        for (size_t i = 0; i < tr.points.size() && c.ok; ++i)
            c.expect(tr.points[i].x == atr.points[i].x,
                     "ATR(K=1,sigma=1) diverged from TR at point " + std::to_string(i));
        c.expect(tr.objective == atr.objective, "ATR(K=1,sigma=1) objective differs");
    }
    if (c.ok) c.detail = "exact point sequences on plain and steep instances";
    return c;
}

// ---------------------------------------------------------------------------
// 4. Model-function invariants along recorded TR/ATR trajectories
// ---------------------------------------------------------------------------
Check criterion_model_invariants() {
    Check c;
    std::mt19937_64 rng(555);
    for (const char* algo : {"tr", "atr"}) {
        for (int inst_id = 0; inst_id < 2; ++inst_id) {
            TwoStageProblem problem;
            Vector x0;
            if (inst_id == 0) {
                problem = toy_nv();
                x0 = {0.0};
            } else {
                auto inst = st::random_instance(rng, {3, 2, 8, false});
                problem = inst.problem;
                x0 = inst.feasible_start;
            }
            int N = problem.num_scenarios();
            ClusterPartition part = make_partition(N, std::min(3, N), 1);
            std::vector<MasterObservation> observations;
            MasterObserver observer = [&](const MasterObservation& ob) {
                observations.push_back(ob);
            };
            SolverConfig cfg = config_for(algo, x0);
            SerialExecutor exec(problem, part);
            RunResult r =
                algorithm_by_name(algo)(problem, part, cfg, exec, observer);
            note_run(r);

            // interpolation: m(center) = Q(center) whenever Q(center) is known
            for (const auto& ob : observations) {
                if (!ob.center || !(ob.center_value < kInf)) continue;
                double m_center =
                    model_value_at(ob.model, problem.first.c, *ob.center);
                if (std::abs(m_center - ob.center_value) > 1e-8)
                    c.fail("interpolation broke: m(center)=" +
                           std::to_string(m_center) + " vs Q=" +
                           std::to_string(ob.center_value));
            }
            // Lemma-1 monotonicity within an epoch (major iteration/incumbent)
            for (size_t i = 1; i < observations.size(); ++i) {
                const auto& prev = observations[i - 1];
                const auto& cur = observations[i];
                if (prev.epoch != cur.epoch) continue;
                if (cur.model_value < prev.model_value - 1e-9)
                    c.fail("master value decreased within an epoch: " +
                           std::to_string(prev.model_value) + " -> " +
                           std::to_string(cur.model_value));
            }
            // underestimation at 100 probes spread across the trajectory
            if (!observations.empty()) {
                int per = std::max<int>(1, 100 / observations.size());
                int total = 0;
                for (const auto& ob : observations) {
                    if (!ob.center) continue;
                    for (int k = 0; k < per && total < 100; ++k) {
                        Vector probe = *ob.center;
                        for (double& v : probe) {
                            double lo = std::max(0.0, v - *ob.delta);
                            double hi = v + *ob.delta;
                            v = st::uniform(rng, lo, hi);
                        }
                        bool floor_active = false;
                        for (int j = 0; j < ob.model.num_clusters; ++j)
                            if (cluster_model_value(ob.model, j, probe) <=
                                ob.model.theta_floor)
                                floor_active = true;
                        if (floor_active) continue;
                        ++total;
                        double m = model_value_at(ob.model, problem.first.c, probe);
                        double q = evaluate_Q(problem, probe).value;
                        if (m > q + 1e-8)
                            c.fail("model overestimates: m=" + std::to_string(m) +
                                   " > Q=" + std::to_string(q));
                    }
                }
            }
        }
    }
    if (c.ok) c.detail = "underestimation, interpolation, minor-iterate monotonicity";
    return c;
}

// ---------------------------------------------------------------------------
// 5. Cut validity: optimality cuts underestimate; feasibility cuts preserve
// ---------------------------------------------------------------------------
Check criterion_cut_validity() {
    Check c;
    std::mt19937_64 rng(777);
    // harvest every cut that ever entered a model across toy and random runs
    int cuts_checked = 0;
    for (int inst_id = 0; inst_id < 2; ++inst_id) {
        TwoStageProblem problem;
        Vector x0;
        if (inst_id == 0) {
            problem = toy_nv();
            x0 = {0.0};
        } else {
            auto inst = st::random_instance(rng, {3, 2, 8, false});
            problem = inst.problem;
            x0 = inst.feasible_start;
        }
        int N = problem.num_scenarios();
        ClusterPartition part = make_partition(N, std::min(3, N), 1);
        for (const char* algo : {"tr", "atr"}) {
            std::vector<MasterObservation> observations;
            SolverConfig cfg = config_for(algo, x0);
            SerialExecutor exec(problem, part);
            RunResult r = algorithm_by_name(algo)(
                problem, part, cfg, exec,
                [&](const MasterObservation& ob) { observations.push_back(ob); });
            note_run(r);
            std::set<int> seen;
            for (const auto& ob : observations) {
                for (int j = 0; j < ob.model.num_clusters; ++j) {
                    for (const Cut& cut : ob.model.cluster_cuts[j]) {
                        if (!seen.insert(cut.id).second) continue;
                        ++cuts_checked;
                        for (int probe = 0; probe < 100; ++probe) {
                            Vector x(problem.num_first_vars());
                            for (double& v : x) v = st::uniform(rng, 0.0, 4.0);
                            double actual = evaluate_cluster(problem, part, j, x).value;
                            double predicted = dot(cut.g, x) + cut.f;
                            if (actual < predicted - 1e-8) {
                                c.fail("cluster " + std::to_string(j) +
                                       " cut overshoots by " +
                                       std::to_string(predicted - actual));
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    c.expect(cuts_checked > 0, "no cuts observed");

    // feasibility side: certificates from an incomplete-recourse variant
    TwoStageProblem nf = toy_nv();
    nf.W = Matrix::from_rows({{1.0}});
    for (auto& s : nf.scenarios) s.q = {2.0};
    for (double xhat : {1.25, 2.0, 3.0}) {
        try {
            solve_scenario(nf, 0, {xhat});
            c.fail("expected infeasibility at x=" + std::to_string(xhat));
        } catch (const CompleteRecourseViolation& e) {
            FeasibilityCutData cut = make_feasibility_cut(e.farkas, nf, e.scenario);
            for (double x = 0.0; x <= 1.0 + 1e-12; x += 0.0625)
                if (cut.g[0] * x < cut.f - 1e-9)
                    c.fail("feasibility cut excluded recourse-feasible x=" +
                           std::to_string(x));
        }
    }
    if (c.ok)
        c.detail = std::to_string(cuts_checked) +
                   " optimality cuts valid at 100 probes; feasible grid preserved";
    return c;
}

// ---------------------------------------------------------------------------
// 6. Trust-region mechanics: Reduce-Δ branches and the doubling rule
// ---------------------------------------------------------------------------
Check criterion_tr_mechanics() {
    Check c;
    {  // ρ>3 divides by min(ρ,4)=4 exactly
        TrustRegionState tr{1.0, 0};
        reduce_delta_tr(tr, 10.0, 20.0, 8.0);  // ρ = 5
        c.expect(tr.delta == 0.25, "rho>3 branch: expected 0.25");
        c.expect(tr.counter == 0, "rho>3 branch: counter not reset");
    }
    {  // counter ≥ 3 with ρ∈(1,3] divides by ρ exactly
        TrustRegionState tr{1.0, 3};
        reduce_delta_tr(tr, 10.0, 14.0, 8.0);  // ρ = 2
        c.expect(tr.delta == 0.5, "counter branch: expected 0.5");
        c.expect(tr.counter == 0, "counter branch: counter not reset");
    }
    {  // ρ ≤ 1 is a no-op on Δ
        TrustRegionState tr{1.0, 2};
        reduce_delta_tr(tr, 10.0, 10.5, 8.0);  // ρ = 0.25
        c.expect(tr.delta == 1.0, "rho<=1 left delta alone");
        c.expect(tr.counter == 3, "rho>0 still counts");
    }
    {  // ATR clamp: Δ_q⁺ = Δ_q/min(ρ,4), Δ_curr = min(Δ_curr, Δ_q⁺)
        IncumbentState inc;
        inc.delta_curr = 5.0;
        PointRecord q;
        q.parent_incumbent = 1;
        q.parent_incumbent_value = 10.0;
        q.model_value_at_generation = 8.0;
        q.delta_at_generation = 1.0;
        q.value = 18.0;  // ρ = 4
        reduce_delta_atr(inc, q);
        c.expect(inc.delta_curr == 0.25, "ATR clamp: expected 0.25");
        PointRecord orphan = q;
        orphan.parent_incumbent = -1;
        IncumbentState before = inc;
        reduce_delta_atr(inc, orphan);
        c.expect(inc.delta_curr == before.delta_curr, "I_q=-1 must be a no-op");
    }
    {  // doubling capped at Δ_hi: toy-nv's first step doubles 1→min(Δ_hi,2)
        TwoStageProblem p = toy_nv();
        ClusterPartition part = make_partition(2, 2, 2);
        SolverConfig cfg = config_for("tr", {0.0});
        cfg.delta_hi = 1.5;  // cap below the uncapped doubling target
        SerialExecutor exec(p, part);
        RunResult r = run_tr(p, part, cfg, exec);
        note_run(r);
        bool saw_capped = false;
        for (const auto& ev : r.trace)
            if (ev.kind == TraceEventKind::StepAccepted && ev.point_id == 1)
                saw_capped = ev.delta == 1.5;
        c.expect(saw_capped, "doubling was not capped at delta_hi=1.5");

        SolverConfig wide = config_for("tr", {0.0});
        SerialExecutor exec2(p, part);
        RunResult r2 = run_tr(p, part, wide, exec2);
        note_run(r2);
        bool saw_doubled = false;
        for (const auto& ev : r2.trace)
            if (ev.kind == TraceEventKind::StepAccepted && ev.point_id == 1)
                saw_doubled = ev.delta == 2.0;
        c.expect(saw_doubled, "step onto the box boundary did not double delta");
    }
    {  // in-run ρ>3 shrink with exact Δ values on the steep instance
        TwoStageProblem p = toy_nv();
        p.scenarios[0].q = {2.0, 100.0};
        ClusterPartition part = make_partition(2, 2, 2);
        SolverConfig cfg = config_for("tr", {0.0});
        SerialExecutor exec(p, part);
        RunResult r = run_tr(p, part, cfg, exec);
        note_run(r);
        std::vector<double> deltas;
        for (const auto& ev : r.trace)
            if (ev.kind == TraceEventKind::StepAccepted ||
                ev.kind == TraceEventKind::StepRejected)
                deltas.push_back(ev.delta);
        c.expect(deltas.size() == 2 && deltas[0] == 2.0 && deltas[1] == 0.5,
                 "steep instance delta trace != {2.0, 0.5}");
    }
    if (c.ok) c.detail = "all Reduce-Δ branches and the capped doubling, exact";
    return c;
}

// ---------------------------------------------------------------------------
// 7. Asynchronous robustness: permutations and worker churn
// ---------------------------------------------------------------------------
Check criterion_async_robustness() {
    Check c;
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SolverConfig cfg = config_for("atr", {0.0});
        cfg.sigma = 0.5;
        auto exec = ScriptedExecutor::random_order(p, part, seed);
        RunResult r = run_atr(p, part, cfg, exec);
        note_run(r);
        if (!finished(r) || std::abs(r.objective - 3.0) > 1e-5 * 4.0) {
            c.fail("permutation seed " + std::to_string(seed) + " missed the optimum");
            break;
        }
    }
    // fault injection: departures mid-task plus a suspension race
    SimConfig sim;
    sim.unit_cost = 0.01;
    sim.task_latency = 1.0;
    sim.benchmark_work_units = 1.0;
    sim.reschedule_on_suspend = true;
    WorkerProfile flaky;
    flaky.speed = 1.0;
    flaky.arrival = 0.0;
    flaky.departure = 14.0;  // dies mid-run
    flaky.suspensions = {{2.2, 9.0}};
    WorkerProfile steady;
    steady.speed = 2.0;
    steady.arrival = 0.5;
    sim.explicit_workers = {flaky, steady};
    SolverConfig cfg = config_for("atr", {0.0});
    cfg.sigma = 0.5;
    SimExecutor exec(p, part, sim, 25);
    RunResult r = run_atr(p, part, cfg, exec);
    note_run(r);
    c.expect(finished(r), "churn run did not converge");
    c.expect(std::abs(r.objective - 3.0) <= 1e-5 * 4.0, "churn run missed optimum");
    const WorkerLedger& ledger = exec.ledger();
    c.expect(ledger.applied_count == r.tasks_executed,
             "event accounting: applied != consumed");
    double conservation = ledger.total_busy() -
                          (ledger.applied_duration + ledger.discarded_duration +
                           ledger.benchmark_duration);
    c.expect(std::abs(conservation) <= 1e-9, "busy-time conservation violated");
    if (c.ok)
        c.detail = "20 permutations + churn with exactly-once application";
    return c;
}

// ---------------------------------------------------------------------------
// 8. Simulator determinism and a Table-1-shaped sweep
// ---------------------------------------------------------------------------
Check criterion_sim_determinism() {
    Check c;
    // synthetic N=200 sampled instance on the toy template
    SampledSpec spec;
    TwoStageProblem base = toy_nv();
    spec.first = base.first;
    spec.W = base.W;
    spec.q_base = base.scenarios[0].q;
    spec.h_base = base.scenarios[0].h;
    spec.T_base = base.scenarios[0].T;
    RandomEntry re;
    re.target = RandomEntry::Target::Rhs;
    re.row = 0;
    re.values = {1.0, 2.0, 3.0, 4.0};
    re.probs = {0.3, 0.3, 0.2, 0.2};
    spec.entries = {re};
    spec.sample_count = 200;
    spec.seed = 99;
    TwoStageProblem problem = sample_instance(spec);

    SimConfig sim;
    sim.seed = 7;
    sim.initial_workers = 4;
    sim.speed_spread_max = 4.0;
    sim.suspension_rate = 0.002;
    sim.suspension_mean_duration = 3.0;

    {  // identical seeds → identical CSV bytes
        ClusterPartition part = make_partition(200, 10, 4);
        SolverConfig cfg = config_for("atr", {0.0});
        auto [r1, s1] = simulate("atr", problem, part, cfg, sim);
        auto [r2, s2] = simulate("atr", problem, part, cfg, sim);
        note_run(r1);
        note_run(r2);
        std::string row1 = stats_csv_row("atr", s1, 3, 4, 10);
        std::string row2 = stats_csv_row("atr", s2, 3, 4, 10);
        c.expect(row1 == row2, "identical seeds produced different CSV rows");
        c.expect(finished(r1), "sim run did not converge");
    }
    // Table-1 shape: σ × C grid for ALS, all columns populated
    int rows = 0;
    for (double sigma : {0.5, 0.7, 0.85}) {
        for (int chunks : {2, 4}) {
            ClusterPartition part = make_partition(200, 8, chunks);
            SolverConfig cfg = config_for("als", {0.0});
            cfg.sigma = sigma;
            auto [r, s] = simulate("als", problem, part, cfg, sim);
            note_run(r);
            ++rows;
            c.expect(finished(r), "sweep cell did not converge");
            c.expect(s.parallel_efficiency >= 0.0 && s.parallel_efficiency <= 1.0,
                     "efficiency outside [0,1]");
            c.expect(s.wall_clock > 0 && s.max_workers > 0 &&
                         s.avg_active_workers > 0 && s.points_evaluated > 0 &&
                         s.max_cuts > 0,
                     "sweep row has an empty column");
        }
    }
    c.expect(rows == 6, "sweep grid size wrong");
    if (c.ok) c.detail = "bit-identical CSV per seed; 6-cell σ×C sweep populated";
    return c;
}

// ---------------------------------------------------------------------------
// 9. Sampling statistics at N=10⁴
// ---------------------------------------------------------------------------
Check criterion_sampling_stats() {
    Check c;
    SampledSpec spec;
    TwoStageProblem base = toy_nv();
    spec.first = base.first;
    spec.W = base.W;
    spec.q_base = base.scenarios[0].q;
    spec.h_base = base.scenarios[0].h;
    spec.T_base = base.scenarios[0].T;
    RandomEntry re;
    re.target = RandomEntry::Target::Rhs;
    re.row = 0;
    re.values = {1.0, 3.0};
    re.probs = {0.4, 0.6};
    spec.entries = {re};
    spec.sample_count = 10000;
    for (std::uint64_t seed : {1ULL, 2024ULL, 31337ULL}) {
        spec.seed = seed;
        TwoStageProblem p = sample_instance(spec);
        long low = 0;
        for (const auto& s : p.scenarios)
            if (s.h[0] == 1.0) ++low;
        double freq = low / 10000.0;
        if (std::abs(freq - 0.4) > 0.02)
            c.fail("seed " + std::to_string(seed) + ": frequency " +
                   std::to_string(freq) + " outside 0.4±0.02");
    }
    if (c.ok) c.detail = "three seeds inside the binomial 4σ band";
    return c;
}

// ---------------------------------------------------------------------------
// 10. Finite termination across the whole suite
// ---------------------------------------------------------------------------
Check criterion_finite_termination() {
    Check c;
    long capped = 0;
    for (TerminationReason reason : g_all_reasons)
        if (reason == TerminationReason::IterationCap ||
            reason == TerminationReason::BasketDrained)
            ++capped;
    c.expect(capped == 0, std::to_string(capped) + " runs hit the iteration cap");
    if (c.ok)
        c.detail = std::to_string(g_all_reasons.size()) +
                   " runs, none at the iteration cap";
    return c;
}

}  // namespace

int main() {
    auto t0 = std::chrono::steady_clock::now();
    struct Entry {
        const char* name;
        std::function<Check()> fn;
    };
    const Entry entries[] = {
        {"oracle equivalence (LS/ALS/TR/ATR vs deterministic equivalent)",
         criterion_oracle_equivalence},
        {"toy-nv ground truth", criterion_toy_ground_truth},
        {"degeneracy identities ALS(1)=LS, ATR(1,1)=TR", criterion_degeneracy},
        {"model invariants along TR/ATR trajectories", criterion_model_invariants},
        {"cut validity at random probes", criterion_cut_validity},
        {"trust-region Reduce-Δ and doubling mechanics", criterion_tr_mechanics},
        {"asynchronous robustness under permutations and churn",
         criterion_async_robustness},
        {"simulator determinism and sweep stats", criterion_sim_determinism},
        {"sampling statistics at N=10000", criterion_sampling_stats},
        {"finite termination (no run at the iteration cap)",
         criterion_finite_termination},
    };
    int failures = 0;
    int index = 0;
    for (const Entry& entry : entries) {
        ++index;
        Check result;
        try {
            result = entry.fn();
        } catch (const std::exception& e) {
            result.ok = false;
            result.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %d: %s — %s\n", result.ok ? "PASS" : "FAIL",
                    index, entry.name, result.detail.c_str());
        if (!result.ok) ++failures;
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("acceptance suite finished in %.2f s (budget 30 s)\n", seconds);
    if (seconds >= 30.0) {
        std::printf("FAIL runtime budget exceeded\n");
        ++failures;
    }
    return failures == 0 ? 0 : 1;
}
