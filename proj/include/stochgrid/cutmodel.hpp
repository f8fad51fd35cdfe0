#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "stochgrid/lp.hpp"
#include "stochgrid/problem.hpp"

namespace stochgrid {

enum class CutKind { Optimality, Feasibility };

// Optimality cut: θ_j ≥ gᵀx + f for cluster j.
// Feasibility cut: gᵀx ≥ f.
struct Cut {
    CutKind kind = CutKind::Optimality;
    int cluster = -1;
    Vector g;
    double f = 0.0;
    int origin_point = -1;      // point id of the evaluation that produced it
    int parent_incumbent = -1;  // I_q of the origin point (−1 allowed)
    long created_at = 0;        // master-solve counter at insertion
    long last_active_at = 0;
    bool deletable = false;
    int id = 0;
};

// Per-master-solve trace record, consumed by tests and the CLI trace file.
struct MasterTraceRecord {
    long counter = 0;
    double model_value = 0.0;
    bool bound_active = false;
    int active_cuts = 0;
    int total_cuts = 0;
};

// The piecewise-linear model m(x) = cᵀx + Σ_j m_[j](x): per-cluster cut pools,
// feasibility cuts, and the θ lower-bound safeguard. Exclusively owned by one
// controller thread.
struct ModelState {
    int num_clusters = 0;
    int num_first_vars = 0;
    double theta_floor = -1e9;
    long inactivity_threshold = 100;  // negative → never prune
    long master_solve_counter = 0;
    std::vector<std::vector<Cut>> cluster_cuts;
    std::vector<Cut> feasibility_cuts;
    std::vector<MasterTraceRecord> trace;
    int max_cuts_seen = 0;

    ModelState() = default;
    ModelState(int clusters, int first_vars)
        : num_clusters(clusters), num_first_vars(first_vars),
          cluster_cuts(clusters) {}

    int total_cuts() const {
        int n = static_cast<int>(feasibility_cuts.size());
        for (const auto& pool : cluster_cuts) n += static_cast<int>(pool.size());
        return n;
    }

private:
    friend int add_cut(ModelState&, Cut);
    friend struct MasterAssembler;
    int next_cut_id_ = 1;

public:
    // warm-start bookkeeping for sequential masters
    Basis last_basis;
    std::vector<int> last_slack_layout;  // cut ids, in slack-column order
    bool last_had_box = false;
};

struct MasterSolution {
    Vector x;
    Vector theta;              // one per cluster
    double model_value = 0.0;  // cᵀx + Σθ at the optimum
    std::vector<int> active_cut_ids;
    bool bound_active = false;  // some θ_j sits on the floor
    long solve_counter = 0;
    long pivots = 0;
};

// Stores the cut with provenance; an identical (g,f) row for the same cluster
// (or duplicate feasibility row) is skipped. Returns the cut id, or 0 when
// skipped.
int add_cut(ModelState& model, Cut cut);

// Solves the master LP over (x, θ): min cᵀx + Σθ_j subject to all cuts,
// Ax=b, x ≥ 0, and optionally the box ‖x−center‖∞ ≤ delta. Updates activity
// bookkeeping and the solve counter. Throws MasterInfeasible when feasibility
// cuts exhaust the region, NumericalFailure on solver trouble.
MasterSolution solve_master(ModelState& model, const FirstStage& first,
                            const std::optional<Vector>& center = std::nullopt,
                            std::optional<double> delta = std::nullopt);

// max(θ_floor, max over cluster-j cuts of gᵀx + f)
double cluster_model_value(const ModelState& model, int cluster, const Vector& x);

// m(x) = cᵀx + Σ_j m_[j](x); ignores feasibility cuts.
double model_value_at(const ModelState& model, const Vector& c_first, const Vector& x);

// Deletable-marking pass after a failed acceptance test at minor iterate
// (k,ℓ). Protects cuts generated at the current major iterate, cuts active at
// the latest master solution, and cuts from earlier minor iterates guarded by
// Q(x^k) − m_latest > η·[Q(x^k) − m_at_generation].
struct TrUpdateArgs {
    int major_point = -1;        // id of x^k
    double center_value = 0.0;   // Q(x^k)
    double m_latest = 0.0;       // m_{k,ℓ}(x^{k,ℓ})
    double eta = 0.0;
    std::vector<std::pair<int, double>> minor_points;  // (point id, m_q) this major iter
    std::vector<int> active_cut_ids;
};
void model_update_tr(ModelState& model, const TrUpdateArgs& args);

// Same structure with parent-incumbent provenance: protects cuts generated at
// the incumbent itself, active cuts, and cuts from points sharing the current
// incumbent guarded by Q^{I} − m_latest > η·[Q^{I} − m_at_generation].
struct AtrUpdateArgs {
    int incumbent_point = -1;   // I_k
    double incumbent_value = 0.0;
    double m_latest = 0.0;      // m^k of the latest generated point
    double eta = 0.0;
    std::vector<std::pair<int, double>> same_incumbent_points;  // (id, m_q), I_q == I_k ≠ −1
    std::vector<int> active_cut_ids;
};
void model_update_atr(ModelState& model, const AtrUpdateArgs& args);

// Wholesale marking after a successful step: everything becomes deletable
// except cuts originating at the new center/incumbent and cuts active at the
// accepting master solution. Physical removal still goes through prune().
void mark_deletable_on_accept(ModelState& model, int new_center_point,
                              const std::vector<int>& active_cut_ids);

// Removes cuts that are marked deletable and have been inactive for more than
// inactivity_threshold master solves. Returns the number removed.
int prune(ModelState& model);

// (reference − model_value) / (1 + |reference|); throws BoundActiveError when
// the solution's model value is not a valid lower bound.
double model_lower_bound_gap(const MasterSolution& solution, double reference);
double model_lower_bound_gap(double model_value, double reference);

}  // namespace stochgrid
