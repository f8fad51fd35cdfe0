#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stochgrid/linalg.hpp"

namespace stochgrid {

// First-stage data of Eq-form problem: min cᵀx s.t. Ax=b, x ≥ 0.
struct FirstStage {
    Vector c;
    Matrix A;  // may have zero rows
    Vector b;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_rows() const { return static_cast<int>(b.size()); }
};

// One scenario: probability plus (q, h, T); the recourse matrix W is shared.
struct ScenarioData {
    double p = 0.0;
    Vector q;
    Vector h;
    Matrix T;  // m₂ × n
};

// Two-stage stochastic LP with fixed recourse. Immutable after construction;
// safe to share across concurrent readers.
struct TwoStageProblem {
    FirstStage first;
    Matrix W;  // m₂ × n₂
    std::vector<ScenarioData> scenarios;

    int num_first_vars() const { return first.num_vars(); }
    int num_second_vars() const { return W.cols(); }
    int num_second_rows() const { return W.rows(); }
    int num_scenarios() const { return static_cast<int>(scenarios.size()); }

    // Checks all type invariants (dimensions, Σp=1, p>0); throws ValidationError.
    void validate() const;
};

// Scenario indices split into T clusters (cut granularity), clusters grouped
// into C chunks (task granularity).
struct ClusterPartition {
    std::vector<std::vector<int>> clusters;        // scenario indices per cluster
    std::vector<std::vector<int>> chunk_clusters;  // cluster ids per chunk

    int num_clusters() const { return static_cast<int>(clusters.size()); }
    int num_chunks() const { return static_cast<int>(chunk_clusters.size()); }

    void validate(int num_scenarios) const;
};

// Contiguous near-equal clusters (sizes differ by ≤1); chunks take ⌈T/C⌉ or
// ⌊T/C⌋ consecutive clusters.
ClusterPartition make_partition(int num_scenarios, int num_clusters, int num_chunks);

// One independent discrete random entry in the second-stage data.
struct RandomEntry {
    enum class Target { Rhs, Tech, Cost };
    Target target = Target::Rhs;
    int row = 0;  // index into h (Rhs), row of T (Tech), index into q (Cost)
    int col = 0;  // column of T; unused otherwise
    Vector values;
    Vector probs;
};

// Generator description for sampled instances: deterministic base data plus
// independent discrete entries.
struct SampledSpec {
    FirstStage first;
    Matrix W;
    Vector q_base;
    Vector h_base;
    Matrix T_base;
    std::vector<RandomEntry> entries;
    long long sample_count = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Draws sample_count iid scenarios, each with probability 1/N.
// Deterministic for a fixed seed.
TwoStageProblem sample_instance(const SampledSpec& spec);

// Enumerates the cross product of all entries' outcomes (probabilities
// multiply). Throws ScenarioExplosion if the count exceeds the cap.
TwoStageProblem enumerate_instance(const SampledSpec& spec, long long cap = 1000000);

// Builtin single-variable newsvendor-style instance: Q(x) = x +
// 0.8·max(1−x,0) + 1.2·max(3−x,0), minimized at x*=3 with Q*=3.
TwoStageProblem toy_nv();

// Native instance format: JSON document with first{c,A,b}, W, scenarios[].
std::string to_json(const TwoStageProblem& problem);
TwoStageProblem problem_from_json(const std::string& text);
TwoStageProblem load_problem(const std::string& path);
void save_problem(const TwoStageProblem& problem, const std::string& path);

}  // namespace stochgrid
