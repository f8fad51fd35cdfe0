#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stochgrid/errors.hpp"
#include "stochgrid/gridsim.hpp"
#include "stochgrid/oracle.hpp"
#include "stochgrid/parallel.hpp"
#include "stochgrid/smps.hpp"
#include "stochgrid/solvers.hpp"

using namespace stochgrid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIterationCap = 3;

std::string output_dir() {
    const char* env = std::getenv("STOCHGRID_OUT");
    return env && *env ? std::string(env) : std::string(".");
}

std::string resolve_out(const std::string& path) {
    if (path.empty() || path[0] == '/' || path.rfind("./", 0) == 0) return path;
    return output_dir() + "/" + path;
}

struct InstanceArgs {
    std::string instance_path;
    std::string builtin;
    std::string core, time, stoch;
    long long sample_n = 0;
    std::uint64_t sample_seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--instance", instance_path, "native JSON instance file");
        cmd->add_option("--builtin", builtin, "builtin instance name (toy-nv)");
        cmd->add_option("--core", core, "SMPS core file");
        cmd->add_option("--time", time, "SMPS time file");
        cmd->add_option("--stoch", stoch, "SMPS stoch file");
        cmd->add_option("--sample-n", sample_n,
                        "sample this many scenarios from the SMPS bundle");
        cmd->add_option("--sample-seed", sample_seed, "sampling seed");
    }

    TwoStageProblem load() const {
        if (!builtin.empty()) {
            if (builtin == "toy-nv") return toy_nv();
            throw ValidationError("unknown builtin instance: " + builtin);
        }
        if (!instance_path.empty()) return load_problem(instance_path);
        if (!core.empty()) {
            if (time.empty() || stoch.empty())
                throw ValidationError("SMPS input needs --core, --time and --stoch");
            SmpsBundle bundle = load_smps(core, time, stoch);
            if (sample_n > 0) return realize_sampled(bundle, sample_n, sample_seed);
            return realize_full(bundle);
        }
        throw ValidationError(
            "no instance given: use --instance, --builtin or --core/--time/--stoch");
    }
};

struct RunArgs {
    std::string algorithm = "tr";
    SolverConfig config;
    int clusters = 0;  // T; 0 → min(N, 10)
    int chunks = 0;    // C; 0 → T
    std::string x0_path;
    std::string mode = "serial";  // serial | sim | parallel
    int threads = 2;
    SimConfig sim;
    std::string trace_path, csv_path, workers_csv_path;

    void attach(CLI::App* cmd) {
        cmd->add_option("--algorithm", algorithm, "ls | als | tr | atr")
            ->check(CLI::IsMember({"ls", "als", "tr", "atr"}));
        cmd->add_option("--epsilon-tol", config.epsilon_tol, "convergence tolerance");
        cmd->add_option("--delta-hi", config.delta_hi, "maximum trust radius");
        cmd->add_option("--delta0", config.delta_0, "initial trust radius");
        cmd->add_option("--xi", config.xi, "acceptance fraction in (0,1/2)");
        cmd->add_option("--eta", config.eta, "cut retention guard in [0,1)");
        cmd->add_option("--sigma", config.sigma, "synchronicity threshold in (0,1]");
        cmd->add_option("--K", config.basket_capacity, "basket capacity (ATR)");
        cmd->add_option("--inactivity", config.inactivity_threshold,
                        "cut inactivity threshold (master solves)");
        cmd->add_option("--theta-floor", config.theta_floor, "θ lower bound");
        cmd->add_option("--max-iterations", config.max_iterations,
                        "master-solve safeguard");
        cmd->add_option("--T", clusters, "number of clusters");
        cmd->add_option("--C", chunks, "number of chunks (tasks)");
        cmd->add_option("--x0", x0_path, "starting point file (whitespace numbers)");
        cmd->add_option("--mode", mode, "serial | sim | parallel")
            ->check(CLI::IsMember({"serial", "sim", "parallel"}));
        cmd->add_option("--threads", threads, "worker threads for --mode parallel");
        cmd->add_option("--seed", sim.seed, "simulation seed");
        cmd->add_option("--workers", sim.initial_workers, "initial simulated workers");
        cmd->add_option("--arrival-rate", sim.arrival_rate, "worker arrivals/second");
        cmd->add_option("--speed-spread", sim.speed_spread_max,
                        "max worker slowdown factor");
        cmd->add_option("--suspension-rate", sim.suspension_rate,
                        "suspensions per worker-second");
        cmd->add_option("--suspension-mean", sim.suspension_mean_duration,
                        "mean suspension length (s)");
        cmd->add_option("--departure-rate", sim.departure_rate,
                        "departures per worker-second");
        cmd->add_option("--unit-cost", sim.unit_cost, "seconds per work unit");
        cmd->add_option("--task-latency", sim.task_latency, "fixed task overhead (s)");
        cmd->add_option("--max-workers", sim.max_workers_override,
                        "override the mid(25,200,·) worker cap");
        cmd->add_option("--trace", trace_path, "trajectory trace output file");
        cmd->add_option("--csv", csv_path, "stats CSV output file");
        cmd->add_option("--workers-csv", workers_csv_path,
                        "active-worker-count time series (sim mode)");
    }

    Vector load_x0(int n) const {
        if (x0_path.empty()) return {};
        std::ifstream in(x0_path);
        if (!in) throw ValidationError("cannot open x0 file: " + x0_path);
        Vector x;
        double v;
        while (in >> v) x.push_back(v);
        if (static_cast<int>(x.size()) != n)
            throw ValidationError("x0 file has " + std::to_string(x.size()) +
                                  " entries, expected " + std::to_string(n));
        return x;
    }

    ClusterPartition partition_for(const TwoStageProblem& p) const {
        int N = p.num_scenarios();
        int T = clusters > 0 ? clusters : std::min(N, 10);
        int C = chunks > 0 ? chunks : T;
        return make_partition(N, T, C);
    }

    double sigma_or_k() const {
        return (algorithm == "atr") ? static_cast<double>(config.basket_capacity)
                                    : config.sigma;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
}

void write_trace(const std::string& path, const RunResult& result) {
    std::ostringstream os;
    for (const auto& ev : result.trace) os << ev.to_line() << "\n";
    write_text(path, os.str());
}

int exit_code_for(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::Converged:
        case TerminationReason::OptimalAtStart:
            return kExitOk;
        case TerminationReason::IterationCap:
        case TerminationReason::BasketDrained:
            return kExitIterationCap;
    }
    return kExitNumerical;
}

void print_summary(const RunResult& result, const RunStats& stats) {
    std::printf("objective %.10g\n", result.objective);
    std::printf("termination %s\n", to_string(result.reason));
    std::printf("points_evaluated %ld\n", result.points_evaluated);
    std::printf("master_solves %ld\n", result.master_solves);
    std::printf("max_cuts %d\n", result.max_cuts);
    if (stats.wall_clock > 0) {
        std::printf("wall_clock %.6g\n", stats.wall_clock);
        std::printf("parallel_efficiency %.4g\n", stats.parallel_efficiency);
    }
}

int cmd_solve(const InstanceArgs& inst, RunArgs& run) {
    TwoStageProblem problem = inst.load();
    ClusterPartition partition = run.partition_for(problem);
    run.config.x0 = run.load_x0(problem.num_first_vars());
    run.config.validate();

    RunResult result;
    RunStats stats;
    std::vector<std::pair<double, int>> worker_series;
    if (run.mode == "sim") {
        std::tie(result, stats) = simulate(run.algorithm, problem, partition,
                                           run.config, run.sim, {}, &worker_series);
    } else if (run.mode == "parallel") {
        std::tie(result, stats) = run_parallel(run.algorithm, problem, partition,
                                               run.config, run.threads);
    } else {
        SerialExecutor exec(problem, partition);
        result = algorithm_by_name(run.algorithm)(problem, partition, run.config,
                                                  exec, {});
        stats = result.stats;
    }

    print_summary(result, stats);
    if (!run.trace_path.empty()) write_trace(resolve_out(run.trace_path), result);
    if (!run.workers_csv_path.empty()) {
        std::ostringstream os;
        os << "time,active_workers\n";
        char buf[64];
        for (const auto& [t, n] : worker_series) {
            std::snprintf(buf, sizeof buf, "%.9g,%d\n", t, n);
            os << buf;
        }
        write_text(resolve_out(run.workers_csv_path), os.str());
    }
    if (!run.csv_path.empty()) {
        std::ostringstream os;
        os << stats_csv_header() << "\n"
           << stats_csv_row(run.algorithm, stats, run.sigma_or_k(),
                            partition.num_chunks(), partition.num_clusters())
           << "\n";
        write_text(resolve_out(run.csv_path), os.str());
    }
    return exit_code_for(result.reason);
}

int cmd_oracle(const InstanceArgs& inst, long long cap) {
    TwoStageProblem problem = inst.load();
    long long vars = problem.num_first_vars() +
                     static_cast<long long>(problem.num_scenarios()) *
                         problem.num_second_vars();
    if (vars > cap) {
        std::fprintf(stderr,
                     "oracle: instance has %lld variables, above the cap %lld\n",
                     vars, cap);
        return kExitValidation;
    }
    OracleSolution sol = solve_deterministic_equivalent(problem);
    std::printf("objective %.10g\n", sol.objective);
    std::printf("x");
    for (double v : sol.x) std::printf(" %.10g", v);
    std::printf("\n");
    return kExitOk;
}

int cmd_sample(const std::string& core, const std::string& time,
               const std::string& stoch, long long n, std::uint64_t seed,
               const std::string& out) {
    SmpsBundle bundle = load_smps(core, time, stoch);
    TwoStageProblem problem = realize_sampled(bundle, n, seed);
    save_problem(problem, resolve_out(out));
    std::printf("wrote %s with %d scenarios\n", out.c_str(), problem.num_scenarios());
    return kExitOk;
}

int cmd_convert(const std::string& core, const std::string& time,
                const std::string& stoch, long long cap, const std::string& out) {
    SmpsBundle bundle = load_smps(core, time, stoch);
    TwoStageProblem problem = realize_full(bundle, cap);
    save_problem(problem, resolve_out(out));
    std::printf("wrote %s with %d scenarios\n", out.c_str(), problem.num_scenarios());
    return kExitOk;
}

struct SweepArgs {
    std::vector<double> sigma_grid;
    std::vector<int> k_grid;
    std::vector<int> c_grid;
    std::vector<int> t_grid;
    std::string csv_path = "sweep.csv";
};

int cmd_sweep(const InstanceArgs& inst, RunArgs& run, const SweepArgs& sweep) {
    TwoStageProblem problem = inst.load();
    run.config.x0 = run.load_x0(problem.num_first_vars());

    std::vector<double> sigmas = sweep.sigma_grid;
    std::vector<int> ks = sweep.k_grid;
    if (sigmas.empty()) sigmas = {run.config.sigma};
    if (ks.empty()) ks = {run.config.basket_capacity};
    std::vector<int> cs = sweep.c_grid;
    std::vector<int> ts = sweep.t_grid;
    if (cs.empty()) cs = {run.chunks > 0 ? run.chunks : 2};
    if (ts.empty()) ts = {0};  // 0 → derived from C and N

    std::ostringstream os;
    os << stats_csv_header() << "\n";
    int cells = 0, failures = 0;
    for (double sigma : sigmas) {
        for (int k : ks) {
            for (int t_raw : ts) {
                for (int c : cs) {
                    int t = t_raw > 0
                                ? t_raw
                                : std::max(c, std::min(problem.num_scenarios(), 10));
                    if (t > problem.num_scenarios() || c > t) continue;
                    ++cells;
                    SolverConfig cfg = run.config;
                    cfg.sigma = sigma;
                    cfg.basket_capacity = k;
                    try {
                        ClusterPartition part =
                            make_partition(problem.num_scenarios(), t, c);
                        auto [result, stats] =
                            simulate(run.algorithm, problem, part, cfg, run.sim);
                        double axis =
                            run.algorithm == "atr" ? static_cast<double>(k) : sigma;
                        os << stats_csv_row(run.algorithm, stats, axis, c, t) << "\n";
                    } catch (const std::exception& e) {
                        ++failures;
                        os << run.algorithm << ",failed:" << e.what() << "\n";
                    }
                }
            }
        }
    }
    write_text(resolve_out(sweep.csv_path), os.str());
    std::printf("%s", os.str().c_str());
    std::printf("sweep: %d cells, %d failures\n", cells, failures);
    return failures == 0 ? kExitOk : kExitValidation;
}

// Expands `--config FILE` into plain flags: each key=value line becomes
// --key value unless --key already appears on the command line (flags win).
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (config_path.empty()) return args;
    std::ifstream in(config_path);
    if (!in) throw ValidationError("cannot open config file: " + config_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError(config_path + ":" + std::to_string(lineno) +
                                  ": expected key=value");
        std::string key = line.substr(start, eq - start);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            size_t a = s.find_first_not_of(" \t");
            size_t b = s.find_last_not_of(" \t");
            s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
        };
        trim(key);
        trim(value);
        if (key.empty())
            throw ValidationError(config_path + ":" + std::to_string(lineno) +
                                  ": empty key");
        std::string flag = "--" + key;
        bool on_cli = false;
        for (const auto& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) on_cli = true;
        if (!on_cli) {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposition algorithms for two-stage stochastic LPs on a "
                 "simulated worker grid"};
    app.require_subcommand(1);

    InstanceArgs inst;
    RunArgs run;
    SweepArgs sweep;
    long long oracle_cap = 50000;
    std::string smps_core, smps_time, smps_stoch, out_path = "instance.json";
    long long sample_n = 1000;
    std::uint64_t sample_seed = 0;
    long long convert_cap = 1000000;

    CLI::App* solve = app.add_subcommand("solve", "run a decomposition algorithm");
    inst.attach(solve);
    run.attach(solve);

    CLI::App* oracle =
        app.add_subcommand("oracle", "solve the deterministic equivalent directly");
    inst.attach(oracle);
    oracle->add_option("--cap", oracle_cap, "variable-count guard");

    CLI::App* sample = app.add_subcommand("sample", "sample an SMPS bundle to JSON");
    sample->add_option("--core", smps_core, "SMPS core file")->required();
    sample->add_option("--time", smps_time, "SMPS time file")->required();
    sample->add_option("--stoch", smps_stoch, "SMPS stoch file")->required();
    sample->add_option("--n", sample_n, "scenario count");
    sample->add_option("--seed", sample_seed, "sampling seed");
    sample->add_option("--out", out_path, "output JSON path");

    CLI::App* convert = app.add_subcommand(
        "convert", "enumerate an SMPS bundle into a JSON instance");
    convert->add_option("--core", smps_core, "SMPS core file")->required();
    convert->add_option("--time", smps_time, "SMPS time file")->required();
    convert->add_option("--stoch", smps_stoch, "SMPS stoch file")->required();
    convert->add_option("--cap", convert_cap, "scenario-count cap");
    convert->add_option("--out", out_path, "output JSON path");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "grid of simulated runs");
    inst.attach(sweep_cmd);
    run.attach(sweep_cmd);
    sweep_cmd->add_option("--sigma-grid", sweep.sigma_grid, "σ values");
    sweep_cmd->add_option("--k-grid", sweep.k_grid, "K values");
    sweep_cmd->add_option("--c-grid", sweep.c_grid, "chunk counts");
    sweep_cmd->add_option("--t-grid", sweep.t_grid, "cluster counts");
    sweep_cmd->add_option("--sweep-csv", sweep.csv_path, "sweep CSV output");

    // --config FILE is handled before CLI11: plain key=value lines become
    // flags, and explicit flags always win
    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitValidation;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }

    try {
        if (solve->parsed()) return cmd_solve(inst, run);
        if (oracle->parsed()) return cmd_oracle(inst, oracle_cap);
        if (sample->parsed())
            return cmd_sample(smps_core, smps_time, smps_stoch, sample_n,
                              sample_seed, out_path);
        if (convert->parsed())
            return cmd_convert(smps_core, smps_time, smps_stoch, convert_cap,
                               out_path);
        if (sweep_cmd->parsed()) return cmd_sweep(inst, run, sweep);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const CompleteRecourseViolation& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const NumericalFailure& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitValidation;
}
