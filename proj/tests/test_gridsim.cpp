#include <doctest.h>

#include <cmath>

#include "stochgrid/errors.hpp"
#include "stochgrid/gridsim.hpp"
#include "stochgrid/oracle.hpp"
#include "stochgrid/solvers.hpp"

using namespace stochgrid;

namespace {

SimConfig quiet_sim(int workers) {
    SimConfig cfg;
    cfg.initial_workers = workers;
    cfg.speed_spread_max = 1.0;  // homogeneous unless a test says otherwise
    return cfg;
}

WorkerProfile worker(int, double speed, double arrival = 0.0,
                     double departure = kInf) {
    WorkerProfile wp;
    wp.speed = speed;
    wp.arrival = arrival;
    wp.departure = departure;
    return wp;
}

}  // namespace

TEST_CASE("worker-count formula matches the reported values") {
    CHECK(max_workers(6, 50, "atr") == 175);   // mid(25,200,175)
    CHECK(max_workers(3, 10, "atr") == 25);    // mid(25,200,20) clamps up
    CHECK(max_workers(1, 25, "als") == 50);    // mid(25,200,2C)
    CHECK(max_workers(9, 50, "atr") == 200);   // ⌊10·50/2⌋=250 clamps down
    CHECK(max_workers(1, 50, "tr") == 50);     // K=1 form: ⌊2·50/2⌋
    CHECK(max_workers(1, 10, "ls") == 25);     // ⌊10⌋ clamps up
    CHECK_THROWS_AS(max_workers(0, 10, "atr"), ValidationError);
    CHECK_THROWS_AS(max_workers(1, 10, "bogus"), ValidationError);
}

TEST_CASE("parallel efficiency ratios") {
    WorkerLedger ledger;
    SUBCASE("owned 100, busy 74 gives 0.74") {
        ledger.workers.push_back({0, 100.0, 74.0});
        bool defined = false;
        CHECK(parallel_efficiency(ledger, &defined) == doctest::Approx(0.74));
        CHECK(defined);
    }
    SUBCASE("fully busy single worker gives 1.0") {
        ledger.workers.push_back({0, 42.0, 42.0});
        CHECK(parallel_efficiency(ledger) == doctest::Approx(1.0));
    }
    SUBCASE("no owned time gives 0 with the flag lowered") {
        bool defined = true;
        CHECK(parallel_efficiency(ledger, &defined) == 0.0);
        CHECK_FALSE(defined);
    }
}

TEST_CASE("single worker simulation matches the direct run") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim = quiet_sim(1);
    auto [result, stats] = simulate("ls", p, part, cfg, sim);
    CHECK(result.reason == TerminationReason::Converged);
    CHECK(std::abs(result.objective - 3.0) <= 1e-4 * 4.0);

    SerialExecutor direct_exec(p, part);
    RunResult direct = run_ls(p, part, cfg, direct_exec);
    CHECK(result.objective == direct.objective);  // same controller, same path

    CHECK(stats.wall_clock > 0);
    CHECK(stats.parallel_efficiency > 0);
    CHECK(stats.parallel_efficiency < 1.0);  // master blocking idles the worker
    CHECK(stats.master_time > 0);
    // one worker, no churn: efficiency = busy time over owned wall time
    CHECK(stats.parallel_efficiency ==
          doctest::Approx(stats.total_worker_cpu / stats.wall_clock).epsilon(1e-9));
    CHECK(stats.avg_active_workers == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("two workers run a two-chunk evaluation concurrently") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim2 = quiet_sim(2);
    auto [r2, s2] = simulate("ls", p, part, cfg, sim2);
    SimConfig sim1 = quiet_sim(1);
    auto [r1, s1] = simulate("ls", p, part, cfg, sim1);
    CHECK(r1.objective == r2.objective);
    // the second worker absorbs half the task time
    CHECK(s2.wall_clock < s1.wall_clock);
    CHECK(s2.total_worker_cpu == doctest::Approx(s1.total_worker_cpu).epsilon(0.25));
}

TEST_CASE("simulation is bit-deterministic per seed") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    cfg.basket_capacity = 2;
    cfg.sigma = 0.5;
    SimConfig sim;
    sim.seed = 42;
    sim.initial_workers = 3;
    sim.speed_spread_max = 5.0;
    sim.suspension_rate = 0.01;
    sim.suspension_mean_duration = 2.0;
    auto [ra, sa] = simulate("atr", p, part, cfg, sim);
    auto [rb, sb] = simulate("atr", p, part, cfg, sim);
    CHECK(ra.objective == rb.objective);
    CHECK(sa.wall_clock == sb.wall_clock);
    CHECK(stats_csv_row("atr", sa, cfg.basket_capacity, 2, 2) ==
          stats_csv_row("atr", sb, cfg.basket_capacity, 2, 2));

    SimConfig other = sim;
    other.seed = 43;
    auto [rc, sc] = simulate("atr", p, part, cfg, other);
    CHECK(rc.reason == TerminationReason::Converged);  // different seed still solves
}

TEST_CASE("worker departure mid-task reschedules and applies exactly once") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim;
    sim.unit_cost = 0.01;
    sim.task_latency = 1.0;  // tasks take ≥ 1s so the departure lands mid-task
    sim.benchmark_work_units = 1.0;
    // worker 0 dies early; worker 1 arrives later and carries the run
    sim.explicit_workers = {worker(0, 1.0, 0.0, 1.5), worker(1, 1.0, 1.0, kInf)};
    SimExecutor exec(p, part, sim, 25);
    RunResult r = run_ls(p, part, cfg, exec);
    CHECK(r.reason == TerminationReason::Converged);
    CHECK(std::abs(r.objective - 3.0) <= 1e-4 * 4.0);
    const WorkerLedger& ledger = exec.ledger();
    CHECK(ledger.discarded_count >= 1);  // at least the aborted execution
    // conservation: busy time = applied + discarded + benchmark durations
    double rhs = ledger.applied_duration + ledger.discarded_duration +
                 ledger.benchmark_duration;
    CHECK(ledger.total_busy() == doctest::Approx(rhs).epsilon(1e-9));
    // every task the controller consumed was applied exactly once
    CHECK(ledger.applied_count == r.tasks_executed);
}

TEST_CASE("suspension race: first result wins, the duplicate is discarded") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim;
    sim.unit_cost = 0.01;
    sim.task_latency = 1.0;
    sim.benchmark_work_units = 1.0;
    sim.reschedule_on_suspend = true;
    WorkerProfile flaky = worker(0, 1.0);
    // suspended shortly after pickup, long enough for the copy to win
    flaky.suspensions = {{2.2, 8.0}, {10.2, 16.0}, {18.2, 24.0}, {26.2, 32.0}};
    sim.explicit_workers = {flaky, worker(1, 2.0)};
    SimExecutor exec(p, part, sim, 25);
    RunResult r = run_ls(p, part, cfg, exec);
    CHECK(r.reason == TerminationReason::Converged);
    const WorkerLedger& ledger = exec.ledger();
    CHECK(ledger.applied_count == r.tasks_executed);  // exactly once each
    CHECK(ledger.discarded_count >= 1);               // the losing duplicates
    double rhs = ledger.applied_duration + ledger.discarded_duration +
                 ledger.benchmark_duration;
    CHECK(ledger.total_busy() == doctest::Approx(rhs).epsilon(1e-9));
    CHECK(parallel_efficiency(ledger) <= 1.0);
}

TEST_CASE("a pool that never staffs is a diagnosed deadlock") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim;
    sim.initial_workers = 0;
    SimExecutor exec(p, part, sim, 25);
    CHECK_THROWS_AS(run_ls(p, part, cfg, exec), NumericalFailure);
}

TEST_CASE("heterogeneous pool: fastest benchmark gets the work first") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim;
    sim.unit_cost = 0.01;
    sim.task_latency = 0.5;
    sim.benchmark_work_units = 10.0;
    sim.explicit_workers = {worker(0, 7.0), worker(1, 1.0)};
    SimExecutor exec(p, part, sim, 25);
    RunResult r = run_ls(p, part, cfg, exec);
    CHECK(r.reason == TerminationReason::Converged);
    const WorkerLedger& ledger = exec.ledger();
    REQUIRE(ledger.workers.size() == 2);
    // the fast machine (id 1) does more of the work
    double busy_fast = 0, busy_slow = 0;
    for (const auto& w : ledger.workers)
        (w.worker_id == 1 ? busy_fast : busy_slow) = w.busy;
    CHECK(busy_fast > 0);
    CHECK(busy_fast >= busy_slow - 1e-9);
}

TEST_CASE("late Poisson arrivals still staff the run") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim;
    sim.seed = 3;
    sim.initial_workers = 0;
    sim.arrival_rate = 0.5;  // first worker shows up after ~2 simulated seconds
    sim.speed_spread_max = 2.0;
    SimExecutor exec(p, part, sim, 25);
    RunResult r = run_ls(p, part, cfg, exec);
    CHECK(r.reason == TerminationReason::Converged);
    CHECK(std::abs(r.objective - 3.0) <= 1e-4 * 4.0);
    CHECK(exec.now() > 0.0);
}

TEST_CASE("the worker cap turns extra arrivals away") {
    TwoStageProblem p = toy_nv();
    ClusterPartition part = make_partition(2, 2, 2);
    SolverConfig cfg;
    SimConfig sim;
    sim.explicit_workers = {worker(0, 1.0), worker(1, 1.0), worker(2, 1.0)};
    SimExecutor exec(p, part, sim, /*worker_cap=*/1);
    RunResult r = run_ls(p, part, cfg, exec);
    CHECK(r.reason == TerminationReason::Converged);
    CHECK(exec.ledger().workers.size() == 1);  // only one admitted
}

TEST_CASE("csv row schema is stable") {
    CHECK(stats_csv_header() ==
          "run,points_evaluated,sigma_or_K,tasks_C,clusters_T,max_procs,avg_procs,"
          "parallel_efficiency,max_cuts,master_time,wall_clock");
    RunStats stats;
    stats.points_evaluated = 12;
    stats.max_cuts = 34;
    stats.master_time = 1.5;
    stats.wall_clock = 60.25;
    stats.avg_active_workers = 3.5;
    stats.max_workers = 25;
    stats.parallel_efficiency = 0.74;
    std::string row = stats_csv_row("als", stats, 0.5, 10, 50);
    CHECK(row == "als,12,0.5,10,50,25,3.5,0.74,34,1.5,60.25");
}
