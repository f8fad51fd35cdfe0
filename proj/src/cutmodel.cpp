#include "stochgrid/cutmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stochgrid/errors.hpp"

namespace stochgrid {

int add_cut(ModelState& model, Cut cut) {
    if (static_cast<int>(cut.g.size()) != model.num_first_vars)
        throw ValidationError("add_cut: gradient length does not match first stage");
    auto same_row = [&](const Cut& c) { return c.g == cut.g && c.f == cut.f; };
    if (cut.kind == CutKind::Optimality) {
        if (cut.cluster < 0 || cut.cluster >= model.num_clusters)
            throw ValidationError("add_cut: cluster out of range");
        auto& pool = model.cluster_cuts[cut.cluster];
        for (const Cut& c : pool)
            if (same_row(c)) return 0;
        cut.id = model.next_cut_id_++;
        cut.created_at = model.master_solve_counter;
        cut.last_active_at = model.master_solve_counter;
        pool.push_back(std::move(cut));
    } else {
        for (const Cut& c : model.feasibility_cuts)
            if (same_row(c)) return 0;
        cut.id = model.next_cut_id_++;
        cut.created_at = model.master_solve_counter;
        cut.last_active_at = model.master_solve_counter;
        model.feasibility_cuts.push_back(std::move(cut));
    }
    model.max_cuts_seen = std::max(model.max_cuts_seen, model.total_cuts());
    return model.next_cut_id_ - 1;
}

double cluster_model_value(const ModelState& model, int cluster, const Vector& x) {
    double best = model.theta_floor;
    for (const Cut& c : model.cluster_cuts[cluster])
        best = std::max(best, dot(c.g, x) + c.f);
    return best;
}

double model_value_at(const ModelState& model, const Vector& c_first, const Vector& x) {
    double v = dot(c_first, x);
    for (int j = 0; j < model.num_clusters; ++j)
        v += cluster_model_value(model, j, x);
    return v;
}

// Builds and solves the master LP. Variable layout:
//   [ x (n) | θ (T) | one slack per optimality cut | one slack per feasibility cut ]
// Optimality row:   gᵀx − θ_j + s = −f,  s ≥ 0
// Feasibility row:  gᵀx − s = f,         s ≥ 0
struct MasterAssembler {
    static MasterSolution run(ModelState& model, const FirstStage& first,
                              const std::optional<Vector>& center,
                              std::optional<double> delta) {
        const int n = model.num_first_vars;
        const int T = model.num_clusters;
        if (static_cast<int>(first.c.size()) != n)
            throw ValidationError("solve_master: first stage size mismatch");
        if (delta.has_value()) {
            if (!center.has_value())
                throw ValidationError("solve_master: trust radius without a center");
            if (!(*delta > 0.0))
                throw ValidationError("solve_master: trust radius must be positive");
        }

        std::vector<Cut*> opt_cuts;
        for (auto& pool : model.cluster_cuts)
            for (auto& c : pool) opt_cuts.push_back(&c);
        const int n_opt = static_cast<int>(opt_cuts.size());
        const int n_feas = static_cast<int>(model.feasibility_cuts.size());
        const int ma = first.num_rows();

        LpProblem lp;
        lp.name = "master";
        const int total_vars = n + T + n_opt + n_feas;
        const int total_rows = ma + n_opt + n_feas;
        lp.objective.assign(total_vars, 0.0);
        for (int j = 0; j < n; ++j) lp.objective[j] = first.c[j];
        for (int j = 0; j < T; ++j) lp.objective[n + j] = 1.0;
        lp.lower.assign(total_vars, 0.0);
        lp.upper.assign(total_vars, kInf);
        for (int j = 0; j < n; ++j) {
            if (delta.has_value()) {
                lp.lower[j] = std::max(0.0, (*center)[j] - *delta);
                lp.upper[j] = (*center)[j] + *delta;
            }
        }
        for (int j = 0; j < T; ++j) lp.lower[n + j] = model.theta_floor;

        lp.rows = Matrix(total_rows, total_vars);
        lp.rhs.assign(total_rows, 0.0);
        for (int r = 0; r < ma; ++r) {
            for (int j = 0; j < n; ++j) lp.rows(r, j) = first.A(r, j);
            lp.rhs[r] = first.b[r];
        }
        std::vector<int> slack_layout;
        slack_layout.reserve(n_opt + n_feas);
        for (int k = 0; k < n_opt; ++k) {
            const Cut& c = *opt_cuts[k];
            int row = ma + k;
            for (int j = 0; j < n; ++j) lp.rows(row, j) = c.g[j];
            lp.rows(row, n + c.cluster) = -1.0;
            lp.rows(row, n + T + k) = 1.0;
            lp.rhs[row] = -c.f;
            slack_layout.push_back(c.id);
        }
        for (int k = 0; k < n_feas; ++k) {
            const Cut& c = model.feasibility_cuts[k];
            int row = ma + n_opt + k;
            for (int j = 0; j < n; ++j) lp.rows(row, j) = c.g[j];
            lp.rows(row, n + T + n_opt + k) = -1.0;
            lp.rhs[row] = c.f;
            slack_layout.push_back(c.id);
        }

        LpSolution sol = try_warm(model, lp, slack_layout, n, T,
                                  delta.has_value());
        if (sol.status == LpStatus::Infeasible)
            throw MasterInfeasible(
                "master LP infeasible: feasibility cuts exclude the whole region");
        if (sol.status == LpStatus::Unbounded)
            throw NumericalFailure("master LP unbounded; check problem scaling");
        if (sol.status != LpStatus::Optimal)
            throw NumericalFailure("master LP solve failed");

        model.last_basis = sol.basis;
        model.last_slack_layout = slack_layout;
        model.last_had_box = delta.has_value();
        model.master_solve_counter += 1;

        MasterSolution out;
        out.solve_counter = model.master_solve_counter;
        out.pivots = sol.pivots;
        out.x.assign(sol.primal.begin(), sol.primal.begin() + n);
        out.theta.assign(sol.primal.begin() + n, sol.primal.begin() + n + T);
        out.model_value = sol.objective;
        for (int j = 0; j < T; ++j) {
            if (out.theta[j] <= model.theta_floor +
                                    1e-7 * (1.0 + std::abs(model.theta_floor))) {
                out.bound_active = true;
            }
        }
        // activity from slack values; refresh last_active_at
        for (int k = 0; k < n_opt; ++k) {
            double slack = sol.primal[n + T + k];
            Cut* c = opt_cuts[k];
            if (slack <= 1e-7 * (1.0 + std::abs(c->f))) {
                out.active_cut_ids.push_back(c->id);
                c->last_active_at = model.master_solve_counter;
            }
        }
        for (int k = 0; k < n_feas; ++k) {
            double slack = sol.primal[n + T + n_opt + k];
            Cut& c = model.feasibility_cuts[k];
            if (slack <= 1e-7 * (1.0 + std::abs(c.f))) {
                out.active_cut_ids.push_back(c.id);
                c.last_active_at = model.master_solve_counter;
            }
        }
        model.trace.push_back({model.master_solve_counter, out.model_value,
                               out.bound_active,
                               static_cast<int>(out.active_cut_ids.size()),
                               model.total_cuts()});
        return out;
    }

    static LpSolution try_warm(ModelState& model, const LpProblem& lp,
                               const std::vector<int>& slack_layout, int n, int T,
                               bool has_box) {
        if (model.last_basis.empty() || model.last_had_box != has_box)
            return solve(lp);
        // map the previous basis onto the new layout; new slacks start Basic
        const auto& old_layout = model.last_slack_layout;
        const auto& old_status = model.last_basis.status;
        if (static_cast<int>(old_status.size()) != n + T + static_cast<int>(old_layout.size()))
            return solve(lp);
        Basis hint;
        hint.status.assign(lp.num_vars(), VarStatus::Basic);
        for (int j = 0; j < n + T; ++j) hint.status[j] = old_status[j];
        for (size_t k = 0; k < slack_layout.size(); ++k) {
            int id = slack_layout[k];
            auto it = std::find(old_layout.begin(), old_layout.end(), id);
            hint.status[n + T + k] =
                (it == old_layout.end())
                    ? VarStatus::Basic
                    : old_status[n + T + (it - old_layout.begin())];
        }
        return solve_with_warm_start(lp, hint);
    }
};

MasterSolution solve_master(ModelState& model, const FirstStage& first,
                            const std::optional<Vector>& center,
                            std::optional<double> delta) {
    return MasterAssembler::run(model, first, center, delta);
}

namespace {

void mark_pool(std::vector<Cut>& pool, const std::vector<int>& active,
               const std::vector<std::pair<int, double>>& guarded_points,
               int protected_origin, double center_value, double m_latest,
               double eta) {
    for (Cut& c : pool) {
        bool deletable = true;
        if (c.origin_point == protected_origin) {
            deletable = false;
        } else if (std::find(active.begin(), active.end(), c.id) != active.end()) {
            deletable = false;
        } else {
            for (const auto& [pid, m_gen] : guarded_points) {
                if (pid != c.origin_point) continue;
                if (center_value - m_latest > eta * (center_value - m_gen))
                    deletable = false;
                break;
            }
        }
        c.deletable = deletable;
    }
}

}  // namespace

void model_update_tr(ModelState& model, const TrUpdateArgs& args) {
    for (auto& pool : model.cluster_cuts)
        mark_pool(pool, args.active_cut_ids, args.minor_points, args.major_point,
                  args.center_value, args.m_latest, args.eta);
}

void model_update_atr(ModelState& model, const AtrUpdateArgs& args) {
    for (auto& pool : model.cluster_cuts)
        mark_pool(pool, args.active_cut_ids, args.same_incumbent_points,
                  args.incumbent_point, args.incumbent_value, args.m_latest,
                  args.eta);
}

void mark_deletable_on_accept(ModelState& model, int new_center_point,
                              const std::vector<int>& active_cut_ids) {
    for (auto& pool : model.cluster_cuts) {
        for (Cut& c : pool) {
            c.deletable =
                c.origin_point != new_center_point &&
                std::find(active_cut_ids.begin(), active_cut_ids.end(), c.id) ==
                    active_cut_ids.end();
        }
    }
}

int prune(ModelState& model) {
    if (model.inactivity_threshold < 0) return 0;
    int removed = 0;
    for (auto& pool : model.cluster_cuts) {
        auto it = std::remove_if(pool.begin(), pool.end(), [&](const Cut& c) {
            return c.deletable &&
                   model.master_solve_counter - c.last_active_at >
                       model.inactivity_threshold;
        });
        removed += static_cast<int>(pool.end() - it);
        pool.erase(it, pool.end());
    }
    return removed;
}

double model_lower_bound_gap(double model_value, double reference) {
    return (reference - model_value) / (1.0 + std::abs(reference));
}

double model_lower_bound_gap(const MasterSolution& solution, double reference) {
    if (solution.bound_active)
        throw BoundActiveError(
            "model value is not a valid lower bound: a θ floor is active");
    return model_lower_bound_gap(solution.model_value, reference);
}

}  // namespace stochgrid
