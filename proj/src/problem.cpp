#include "stochgrid/problem.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stochgrid/errors.hpp"

namespace stochgrid {

void TwoStageProblem::validate() const {
    const int n = num_first_vars();
    if (n == 0) throw ValidationError("problem: first stage has no variables");
    if (scenarios.empty()) throw ValidationError("problem: no scenarios");
    if (first.num_rows() > 0 &&
        (first.A.rows() != first.num_rows() || first.A.cols() != n))
        throw ValidationError("problem: first-stage matrix shape mismatch");
    const int m2 = W.rows();
    const int n2 = W.cols();
    if (m2 == 0 || n2 == 0) throw ValidationError("problem: empty recourse matrix");
    Vector probs;
    probs.reserve(scenarios.size());
    for (size_t i = 0; i < scenarios.size(); ++i) {
        const ScenarioData& s = scenarios[i];
        if (!(s.p > 0.0))
            throw ValidationError("problem: scenario " + std::to_string(i) +
                                  " has nonpositive probability");
        if (static_cast<int>(s.q.size()) != n2 || static_cast<int>(s.h.size()) != m2 ||
            s.T.rows() != m2 || s.T.cols() != n)
            throw ValidationError("problem: scenario " + std::to_string(i) +
                                  " dimensions do not match W");
        probs.push_back(s.p);
    }
    double total = kahan_sum(probs);
    if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("problem: scenario probabilities sum to " +
                              std::to_string(total) + ", expected 1");
}

void ClusterPartition::validate(int num_scenarios) const {
    std::vector<int> seen(num_scenarios, 0);
    for (const auto& cl : clusters) {
        if (cl.empty()) throw ValidationError("partition: empty cluster");
        for (int i : cl) {
            if (i < 0 || i >= num_scenarios)
                throw ValidationError("partition: scenario index out of range");
            if (seen[i]++) throw ValidationError("partition: scenario appears twice");
        }
    }
    for (int i = 0; i < num_scenarios; ++i)
        if (!seen[i]) throw ValidationError("partition: scenario not covered");
    std::vector<int> cluster_seen(clusters.size(), 0);
    for (const auto& ch : chunk_clusters) {
        if (ch.empty()) throw ValidationError("partition: empty chunk");
        for (int j : ch) {
            if (j < 0 || j >= static_cast<int>(clusters.size()))
                throw ValidationError("partition: cluster index out of range");
            if (cluster_seen[j]++)
                throw ValidationError("partition: cluster appears in two chunks");
        }
    }
    for (size_t j = 0; j < clusters.size(); ++j)
        if (!cluster_seen[j]) throw ValidationError("partition: cluster not chunked");
}

ClusterPartition make_partition(int num_scenarios, int num_clusters, int num_chunks) {
    if (num_chunks < 1 || num_clusters < num_chunks || num_scenarios < num_clusters)
        throw ValidationError("partition: need 1 <= C <= T <= N, got N=" +
                              std::to_string(num_scenarios) + " T=" +
                              std::to_string(num_clusters) + " C=" +
                              std::to_string(num_chunks));
    ClusterPartition part;
    part.clusters.resize(num_clusters);
    const int base = num_scenarios / num_clusters;
    const int extra = num_scenarios % num_clusters;
    int next = 0;
    for (int j = 0; j < num_clusters; ++j) {
        int size = base + (j < extra ? 1 : 0);
        for (int k = 0; k < size; ++k) part.clusters[j].push_back(next++);
    }
    part.chunk_clusters.resize(num_chunks);
    const int cbase = num_clusters / num_chunks;
    const int cextra = num_clusters % num_chunks;
    int cnext = 0;
    for (int c = 0; c < num_chunks; ++c) {
        int size = cbase + (c < cextra ? 1 : 0);
        for (int k = 0; k < size; ++k) part.chunk_clusters[c].push_back(cnext++);
    }
    return part;
}

void SampledSpec::validate() const {
    const int n = first.num_vars();
    if (n == 0) throw ValidationError("spec: first stage has no variables");
    const int m2 = W.rows();
    const int n2 = W.cols();
    if (m2 == 0 || n2 == 0) throw ValidationError("spec: empty recourse matrix");
    if (static_cast<int>(q_base.size()) != n2 || static_cast<int>(h_base.size()) != m2 ||
        T_base.rows() != m2 || T_base.cols() != n)
        throw ValidationError("spec: base scenario dimensions do not match W");
    for (size_t e = 0; e < entries.size(); ++e) {
        const RandomEntry& re = entries[e];
        if (re.values.empty() || re.values.size() != re.probs.size())
            throw ValidationError("spec: entry " + std::to_string(e) +
                                  " outcome/probability lengths differ");
        double total = kahan_sum(re.probs);
        if (std::abs(total - 1.0) > 1e-12)
            throw ValidationError("spec: entry " + std::to_string(e) +
                                  " probabilities sum to " + std::to_string(total));
        for (double p : re.probs)
            if (!(p > 0.0))
                throw ValidationError("spec: entry " + std::to_string(e) +
                                      " has nonpositive outcome probability");
        bool ok = false;
        switch (re.target) {
            case RandomEntry::Target::Rhs:
                ok = re.row >= 0 && re.row < m2;
                break;
            case RandomEntry::Target::Tech:
                ok = re.row >= 0 && re.row < m2 && re.col >= 0 && re.col < n;
                break;
            case RandomEntry::Target::Cost:
                ok = re.row >= 0 && re.row < n2;
                break;
        }
        if (!ok)
            throw ValidationError("spec: entry " + std::to_string(e) +
                                  " targets an out-of-range position");
    }
}

namespace {

ScenarioData base_scenario(const SampledSpec& spec, double p) {
    ScenarioData s;
    s.p = p;
    s.q = spec.q_base;
    s.h = spec.h_base;
    s.T = spec.T_base;
    return s;
}

void apply_outcome(ScenarioData& s, const RandomEntry& re, int outcome) {
    double v = re.values[outcome];
    switch (re.target) {
        case RandomEntry::Target::Rhs: s.h[re.row] = v; break;
        case RandomEntry::Target::Tech: s.T(re.row, re.col) = v; break;
        case RandomEntry::Target::Cost: s.q[re.row] = v; break;
    }
}

// Inverse-CDF draw from the generator's raw output; avoids
// std::discrete_distribution, whose mapping is implementation-defined.
int draw_outcome(const RandomEntry& re, std::mt19937_64& rng) {
    double u = (rng() >> 11) * 0x1.0p-53;
    double acc = 0.0;
    for (size_t k = 0; k < re.probs.size(); ++k) {
        acc += re.probs[k];
        if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(re.probs.size()) - 1;
}

}  // namespace

TwoStageProblem sample_instance(const SampledSpec& spec) {
    spec.validate();
    if (spec.sample_count < 1)
        throw ValidationError("spec: sample count must be at least 1");
    TwoStageProblem out;
    out.first = spec.first;
    out.W = spec.W;
    const double p = 1.0 / static_cast<double>(spec.sample_count);
    std::mt19937_64 rng(spec.seed);
    out.scenarios.reserve(spec.sample_count);
    for (long long i = 0; i < spec.sample_count; ++i) {
        ScenarioData s = base_scenario(spec, p);
        for (const RandomEntry& re : spec.entries)
            apply_outcome(s, re, draw_outcome(re, rng));
        out.scenarios.push_back(std::move(s));
    }
    out.validate();
    return out;
}

TwoStageProblem enumerate_instance(const SampledSpec& spec, long long cap) {
    spec.validate();
    long long total = 1;
    for (const RandomEntry& re : spec.entries) {
        long long k = static_cast<long long>(re.values.size());
        if (total > cap / k)  // total*k would exceed cap (and may overflow)
            throw ScenarioExplosion("enumerate: scenario count exceeds cap " +
                                    std::to_string(cap));
        total *= k;
    }
    TwoStageProblem out;
    out.first = spec.first;
    out.W = spec.W;
    std::vector<int> idx(spec.entries.size(), 0);
    while (true) {
        ScenarioData s = base_scenario(spec, 1.0);
        for (size_t e = 0; e < spec.entries.size(); ++e) {
            apply_outcome(s, spec.entries[e], idx[e]);
            s.p *= spec.entries[e].probs[idx[e]];
        }
        out.scenarios.push_back(std::move(s));
        size_t e = 0;
        for (; e < idx.size(); ++e) {
            if (++idx[e] < static_cast<int>(spec.entries[e].values.size())) break;
            idx[e] = 0;
        }
        if (e == idx.size()) break;
    }
    // renormalize away accumulated per-scenario rounding
    Vector probs;
    for (const auto& s : out.scenarios) probs.push_back(s.p);
    double total_p = kahan_sum(probs);
    for (auto& s : out.scenarios) s.p /= total_p;
    out.validate();
    return out;
}

TwoStageProblem toy_nv() {
    TwoStageProblem p;
    p.first.c = {1.0};
    p.W = Matrix::from_rows({{1.0, -1.0}});
    ScenarioData s1;
    s1.p = 0.4;
    s1.q = {2.0, 0.0};
    s1.h = {1.0};
    s1.T = Matrix::from_rows({{1.0}});
    ScenarioData s2 = s1;
    s2.p = 0.6;
    s2.h = {3.0};
    p.scenarios = {s1, s2};
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// JSON instance format
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string("json: ") + what +
                                             " must be an array of rows");
    std::vector<Vector> rows;
    for (const auto& r : j) {
        if (!r.is_array())
            throw ValidationError(std::string("json: ") + what + " row is not an array");
        rows.push_back(r.get<Vector>());
        if (rows.back().size() != rows.front().size())
            throw ValidationError(std::string("json: ") + what + " rows have mixed widths");
    }
    if (rows.empty()) return Matrix();
    return Matrix::from_rows(rows);
}

}  // namespace

std::string to_json(const TwoStageProblem& problem) {
    json j;
    j["first"]["c"] = problem.first.c;
    j["first"]["A"] = matrix_to_json(problem.first.A);
    j["first"]["b"] = problem.first.b;
    j["W"] = matrix_to_json(problem.W);
    json scen = json::array();
    for (const auto& s : problem.scenarios) {
        json js;
        js["p"] = s.p;
        js["q"] = s.q;
        js["h"] = s.h;
        js["T"] = matrix_to_json(s.T);
        scen.push_back(std::move(js));
    }
    j["scenarios"] = std::move(scen);
    return j.dump(2);
}

TwoStageProblem problem_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("json: parse failed: ") + e.what());
    }
    TwoStageProblem p;
    try {
        p.first.c = j.at("first").at("c").get<Vector>();
        p.first.A = matrix_from_json(j.at("first").at("A"), "first.A");
        p.first.b = j.at("first").at("b").get<Vector>();
        p.W = matrix_from_json(j.at("W"), "W");
        for (const auto& js : j.at("scenarios")) {
            ScenarioData s;
            s.p = js.at("p").get<double>();
            s.q = js.at("q").get<Vector>();
            s.h = js.at("h").get<Vector>();
            s.T = matrix_from_json(js.at("T"), "scenario T");
            p.scenarios.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("json: missing or mistyped field: ") + e.what());
    }
    p.validate();
    return p;
}

TwoStageProblem load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open instance file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return problem_from_json(buf.str());
}

void save_problem(const TwoStageProblem& problem, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write instance file: " + path);
    out << to_json(problem) << "\n";
}

}  // namespace stochgrid
