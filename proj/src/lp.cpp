#include "stochgrid/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stochgrid/errors.hpp"

namespace stochgrid {

namespace {

constexpr double kPivotTol = 1e-9;    // residual / pivot-eligibility tolerance
constexpr double kDualTol = 1e-9;     // pricing tolerance
constexpr double kDegenStep = 1e-12;  // steps below this count as degenerate
constexpr int kBlandTrigger = 1000;   // degenerate pivots before Bland's rule
constexpr int kRefactorEvery = 64;

}  // namespace

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
        case LpStatus::NumericalFailure: return "NumericalFailure";
    }
    return "?";
}

void LpProblem::validate_and_default() {
    const int n = num_vars();
    const int m = num_rows();
    if (lower.empty()) lower.assign(n, 0.0);
    if (upper.empty()) upper.assign(n, kInf);
    if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
        throw ValidationError("lp: bound vectors do not match variable count");
    if (m > 0 && (rows.rows() != m || rows.cols() != n))
        throw ValidationError("lp: constraint matrix shape does not match rhs/objective");
    if (m == 0 && !rows.empty() && rows.cols() != n)
        throw ValidationError("lp: constraint matrix has rows but rhs is empty");
    for (int j = 0; j < n; ++j) {
        if (lower[j] > upper[j])
            throw ValidationError("lp: lower bound exceeds upper bound at variable " +
                                  std::to_string(j));
    }
}

// ---------------------------------------------------------------------------
// Solver internals. Columns 0..n−1 are structural, n..n+m−1 are artificials.
// ---------------------------------------------------------------------------

namespace {

class Tableau {
public:
    Tableau(const LpProblem& p) : p_(p), n_(p.num_vars()), m_(p.num_rows()) {
        nt_ = n_ + m_;
        lb_.resize(nt_);
        ub_.resize(nt_);
        for (int j = 0; j < n_; ++j) {
            lb_[j] = p_.lower[j];
            ub_[j] = p_.upper[j];
        }
        for (int j = n_; j < nt_; ++j) {
            lb_[j] = 0.0;
            ub_[j] = kInf;
        }
        value_.assign(nt_, 0.0);
        status_.assign(nt_, VarStatus::AtLower);
        art_sign_.assign(m_, 1.0);
        basis_.assign(m_, -1);
        binv_ = Matrix(m_, m_);
        cost_.assign(nt_, 0.0);
        rhs_scale_ = 1.0 + inf_norm(p_.rhs);
    }

    // column j of the extended matrix at row i
    double col_entry(int i, int j) const {
        if (j < n_) return m_ > 0 ? p_.rows(i, j) : 0.0;
        return (j - n_ == i) ? art_sign_[i] : 0.0;
    }

    void set_initial_point() {
        // Variables with huge safeguard bounds (θ floors) start at 0 instead
        // of at the bound: magnitudes ~1e9 in phase 1 would cost ~1e-8 of
        // absolute precision in the final basics.
        constexpr double kHuge = 1e7;
        for (int j = 0; j < nt_; ++j) {
            if (lb_[j] > -kHuge && lb_[j] > -kInf) {
                status_[j] = VarStatus::AtLower;
                value_[j] = lb_[j];
            } else if (ub_[j] < kHuge && ub_[j] < kInf) {
                status_[j] = VarStatus::AtUpper;
                value_[j] = ub_[j];
            } else if (lb_[j] <= 0.0 && ub_[j] >= 0.0) {
                status_[j] = VarStatus::FreeZero;
                value_[j] = 0.0;
            } else if (lb_[j] > -kInf) {
                status_[j] = VarStatus::AtLower;
                value_[j] = lb_[j];
            } else {
                status_[j] = VarStatus::AtUpper;
                value_[j] = ub_[j];
            }
        }
    }

    // Installs the all-artificial basis matching the residual signs.
    void install_artificial_basis() {
        Vector r = p_.rhs;
        for (int i = 0; i < m_; ++i) {
            double ax = 0.0;
            for (int j = 0; j < n_; ++j) ax += p_.rows(i, j) * value_[j];
            r[i] -= ax;
        }
        for (int i = 0; i < m_; ++i) {
            art_sign_[i] = (r[i] >= 0.0) ? 1.0 : -1.0;
            basis_[i] = n_ + i;
            status_[n_ + i] = VarStatus::Basic;
            value_[n_ + i] = std::abs(r[i]);
            for (int k = 0; k < m_; ++k) binv_(i, k) = 0.0;
            binv_(i, i) = art_sign_[i];
        }
    }

    // Tries to install the caller's basis over structural variables.
    // Returns false when the hint is unusable (wrong shape, singular basis,
    // or primal-infeasible basic point).
    bool install_warm_basis(const Basis& hint) {
        if (static_cast<int>(hint.status.size()) != n_) return false;
        std::vector<int> basics;
        for (int j = 0; j < n_; ++j)
            if (hint.status[j] == VarStatus::Basic) basics.push_back(j);
        if (static_cast<int>(basics.size()) != m_) return false;
        for (int j = 0; j < n_; ++j) {
            VarStatus s = hint.status[j];
            if (s == VarStatus::AtLower && lb_[j] <= -kInf) return false;
            if (s == VarStatus::AtUpper && ub_[j] >= kInf) return false;
        }
        for (int i = 0; i < m_; ++i) basis_[i] = basics[i];
        for (int j = 0; j < n_; ++j) {
            status_[j] = hint.status[j];
            switch (hint.status[j]) {
                case VarStatus::AtLower: value_[j] = lb_[j]; break;
                case VarStatus::AtUpper: value_[j] = ub_[j]; break;
                case VarStatus::FreeZero: value_[j] = 0.0; break;
                case VarStatus::Basic: break;
            }
        }
        for (int i = 0; i < m_; ++i) {
            status_[n_ + i] = VarStatus::AtLower;
            value_[n_ + i] = 0.0;
            ub_[n_ + i] = 0.0;  // artificials locked out in warm phase 2
        }
        if (!refactorize()) return false;
        recompute_basic_values();
        for (int i = 0; i < m_; ++i) {
            int b = basis_[i];
            if (value_[b] < lb_[b] - 1e-7 * rhs_scale_ ||
                value_[b] > ub_[b] + 1e-7 * rhs_scale_)
                return false;
        }
        return true;
    }

    void lock_artificials_for_phase2() {
        for (int j = n_; j < nt_; ++j) ub_[j] = 0.0;
    }

    void set_phase1_costs() {
        std::fill(cost_.begin(), cost_.end(), 0.0);
        for (int j = n_; j < nt_; ++j) cost_[j] = 1.0;
    }

    void set_phase2_costs() {
        for (int j = 0; j < n_; ++j) cost_[j] = p_.objective[j];
        for (int j = n_; j < nt_; ++j) cost_[j] = 0.0;
    }

    bool refactorize() {
        // Rebuild binv_ from the basis columns by Gauss-Jordan with partial
        // pivoting. Returns false on a singular basis.
        Matrix work(m_, 2 * m_);
        for (int i = 0; i < m_; ++i) {
            for (int k = 0; k < m_; ++k) work(i, k) = col_entry(i, basis_[k]);
            work(i, m_ + i) = 1.0;
        }
        for (int col = 0; col < m_; ++col) {
            int piv = -1;
            double best = 1e-11;
            for (int i = col; i < m_; ++i) {
                double a = std::abs(work(i, col));
                if (a > best) {
                    best = a;
                    piv = i;
                }
            }
            if (piv < 0) return false;
            if (piv != col)
                for (int k = 0; k < 2 * m_; ++k) std::swap(work(piv, k), work(col, k));
            double d = work(col, col);
            for (int k = 0; k < 2 * m_; ++k) work(col, k) /= d;
            for (int i = 0; i < m_; ++i) {
                if (i == col) continue;
                double f = work(i, col);
                if (f == 0.0) continue;
                for (int k = 0; k < 2 * m_; ++k) work(i, k) -= f * work(col, k);
            }
        }
        // Columns were permuted into pivot order implicitly; work’s right half
        // is the inverse of the row-permuted matrix, which is what we need
        // since we eliminated in place.
        for (int i = 0; i < m_; ++i)
            for (int k = 0; k < m_; ++k) binv_(i, k) = work(i, m_ + k);
        return true;
    }

    void recompute_basic_values() {
        Vector r = p_.rhs;
        for (int j = 0; j < nt_; ++j) {
            if (status_[j] == VarStatus::Basic) continue;
            double v = value_[j];
            if (v == 0.0) continue;
            for (int i = 0; i < m_; ++i) r[i] -= col_entry(i, j) * v;
        }
        Vector xb = binv_.mul(r);
        // iterative refinement: ill-conditioned bases (nearly parallel cut
        // rows) leave the plain inverse a few digits short of the residual
        // contract
        for (int round = 0; round < 3; ++round) {
            Vector resid = r;
            for (int k = 0; k < m_; ++k) {
                double v = xb[k];
                if (v == 0.0) continue;
                for (int i = 0; i < m_; ++i) resid[i] -= col_entry(i, basis_[k]) * v;
            }
            if (inf_norm(resid) <= 1e-13 * rhs_scale_) break;
            Vector delta = binv_.mul(resid);
            for (int i = 0; i < m_; ++i) xb[i] += delta[i];
        }
        for (int i = 0; i < m_; ++i) value_[basis_[i]] = xb[i];
    }

    Vector duals() const {
        Vector y(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            for (int k = 0; k < m_; ++k) y[k] += cb * binv_(i, k);
        }
        return y;
    }

    double phase_objective() const {
        double s = 0.0;
        for (int j = 0; j < nt_; ++j)
            if (cost_[j] != 0.0) s += cost_[j] * value_[j];
        return s;
    }

    // One simplex phase. Returns Optimal (phase optimum), Unbounded, or
    // NumericalFailure (iteration limit / singular refactorization).
    LpStatus iterate(long& pivots, long pivot_limit) {
        int degen_run = 0;
        bool bland = false;
        long since_refactor = 0;
        while (true) {
            if (pivots > pivot_limit) return LpStatus::NumericalFailure;
            Vector y = duals();
            int enter = -1;
            double enter_score = 0.0;
            int enter_dir = 0;
            for (int j = 0; j < nt_; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                if (ub_[j] - lb_[j] <= 0.0) continue;  // fixed, never enters
                double d = cost_[j];
                for (int i = 0; i < m_; ++i) {
                    double e = col_entry(i, j);
                    if (e != 0.0) d -= y[i] * e;
                }
                int dir = 0;
                double score = 0.0;
                if (status_[j] == VarStatus::AtLower && d < -kDualTol) {
                    dir = +1;
                    score = -d;
                } else if (status_[j] == VarStatus::AtUpper && d > kDualTol) {
                    dir = -1;
                    score = d;
                } else if (status_[j] == VarStatus::FreeZero && std::abs(d) > kDualTol) {
                    dir = d < 0 ? +1 : -1;
                    score = std::abs(d);
                } else {
                    continue;
                }
                if (bland) {
                    enter = j;
                    enter_dir = dir;
                    break;
                }
                if (score > enter_score + 1e-15) {
                    enter = j;
                    enter_score = score;
                    enter_dir = dir;
                }
            }
            if (enter < 0) return LpStatus::Optimal;

            // direction through the basis: x_B moves by −dir·t·w
            Vector aq(m_);
            for (int i = 0; i < m_; ++i) aq[i] = col_entry(i, enter);
            Vector w = binv_.mul(aq);

            // own-bound cap, measured from the current value
            double t_max = (enter_dir > 0) ? ub_[enter] - value_[enter]
                                           : value_[enter] - lb_[enter];
            if (!(t_max < kInf)) t_max = kInf;
            double t_best = t_max;
            int leave_row = -1;
            double leave_pivot = 0.0;
            for (int i = 0; i < m_; ++i) {
                double coef = enter_dir * w[i];
                int b = basis_[i];
                double t;
                if (coef > kPivotTol) {
                    if (lb_[b] <= -kInf) continue;
                    t = (value_[b] - lb_[b]) / coef;
                } else if (coef < -kPivotTol) {
                    if (ub_[b] >= kInf) continue;
                    t = (ub_[b] - value_[b]) / (-coef);
                } else {
                    continue;
                }
                if (t < 0.0) t = 0.0;
                bool better;
                if (bland) {
                    better = t < t_best - 1e-12 ||
                             (t <= t_best + 1e-12 && (leave_row < 0 || b < basis_[leave_row]));
                } else {
                    better = t < t_best - 1e-12 ||
                             (t <= t_best + 1e-12 &&
                              (leave_row < 0 || std::abs(w[i]) > std::abs(leave_pivot) + 1e-15));
                }
                if (better) {
                    t_best = std::min(t, t_best);
                    leave_row = i;
                    leave_pivot = w[i];
                }
            }

            if (leave_row < 0 && !(t_best < kInf)) return LpStatus::Unbounded;

            double step = t_best;
            if (step <= kDegenStep) {
                if (++degen_run > kBlandTrigger) bland = true;
            } else {
                degen_run = 0;
            }

            // apply the move
            for (int i = 0; i < m_; ++i)
                value_[basis_[i]] -= enter_dir * step * w[i];
            value_[enter] += enter_dir * step;
            ++pivots;

            if (leave_row < 0) {
                // bound flip: entering traverses to its opposite bound
                status_[enter] =
                    (enter_dir > 0) ? VarStatus::AtUpper : VarStatus::AtLower;
                value_[enter] = (enter_dir > 0) ? ub_[enter] : lb_[enter];
                continue;
            }

            int leave_var = basis_[leave_row];
            double coef = enter_dir * w[leave_row];
            status_[leave_var] = (coef > 0) ? VarStatus::AtLower : VarStatus::AtUpper;
            value_[leave_var] = (coef > 0) ? lb_[leave_var] : ub_[leave_var];
            basis_[leave_row] = enter;
            status_[enter] = VarStatus::Basic;

            // product-form update of binv_
            double piv = w[leave_row];
            for (int k = 0; k < m_; ++k) binv_(leave_row, k) /= piv;
            for (int i = 0; i < m_; ++i) {
                if (i == leave_row) continue;
                double f = w[i];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k)
                    binv_(i, k) -= f * binv_(leave_row, k);
            }
            if (++since_refactor >= kRefactorEvery) {
                since_refactor = 0;
                if (!refactorize()) return LpStatus::NumericalFailure;
                recompute_basic_values();
            }
        }
    }

    // Swap basic artificials for structural columns where a nonzero pivot
    // exists; redundant rows keep their artificial at zero.
    void drive_out_artificials() {
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            Vector row(m_);
            for (int k = 0; k < m_; ++k) row[k] = binv_(i, k);
            int pick = -1;
            double best = 1e-7;
            for (int j = 0; j < n_; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                double wij = 0.0;
                for (int k = 0; k < m_; ++k) wij += row[k] * p_.rows(k, j);
                if (std::abs(wij) > best) {
                    best = std::abs(wij);
                    pick = j;
                }
            }
            if (pick < 0) continue;
            int art = basis_[i];
            Vector aq(m_);
            for (int k = 0; k < m_; ++k) aq[k] = col_entry(k, pick);
            Vector w = binv_.mul(aq);
            double piv = w[i];
            if (std::abs(piv) < 1e-9) continue;
            status_[art] = VarStatus::AtLower;
            value_[art] = 0.0;
            double entering_value = value_[pick];
            basis_[i] = pick;
            status_[pick] = VarStatus::Basic;
            value_[pick] = entering_value;
            for (int k = 0; k < m_; ++k) binv_(i, k) /= piv;
            for (int r = 0; r < m_; ++r) {
                if (r == i) continue;
                double f = w[r];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) binv_(r, k) -= f * binv_(i, k);
            }
            recompute_basic_values();
        }
    }

    double max_primal_residual() const {
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            for (int j = 0; j < nt_; ++j) {
                double e = col_entry(i, j);
                if (e != 0.0) s += e * value_[j];
            }
            worst = std::max(worst, std::abs(s - p_.rhs[i]));
        }
        return worst;
    }

    LpSolution extract(LpStatus status) const {
        LpSolution out;
        out.status = status;
        out.primal.assign(value_.begin(), value_.begin() + n_);
        out.dual = duals();
        out.reduced_costs.resize(n_);
        for (int j = 0; j < n_; ++j) {
            double d = cost_[j];
            for (int i = 0; i < m_; ++i) {
                double e = m_ > 0 ? p_.rows(i, j) : 0.0;
                if (e != 0.0) d -= out.dual[i] * e;
            }
            out.reduced_costs[j] = d;
        }
        out.objective = 0.0;
        for (int j = 0; j < n_; ++j) out.objective += p_.objective[j] * value_[j];
        out.basis.status.assign(status_.begin(), status_.begin() + n_);
        return out;
    }

    double rhs_scale() const { return rhs_scale_; }

    const LpProblem& p_;
    int n_, m_, nt_;
    Vector lb_, ub_, value_, cost_;
    std::vector<VarStatus> status_;
    Vector art_sign_;
    std::vector<int> basis_;
    Matrix binv_;
    double rhs_scale_;
};

LpSolution failure(long pivots) {
    LpSolution out;
    out.status = LpStatus::NumericalFailure;
    out.pivots = pivots;
#ifdef STOCHGRID_LP_DEBUG
    std::fprintf(stderr, "lp failure after %ld pivots\n", pivots);
#endif
    return out;
}

LpSolution finish_phase2(Tableau& t, long& pivots, long pivot_limit) {
    t.set_phase2_costs();
    LpStatus s2 = t.iterate(pivots, pivot_limit);
    if (s2 == LpStatus::NumericalFailure) {
#ifdef STOCHGRID_LP_DEBUG
        std::fprintf(stderr, "lp: phase2 iterate failed (limit %ld)\n", pivot_limit);
#endif
        return failure(pivots);
    }
    if (s2 == LpStatus::Unbounded) {
        LpSolution out = t.extract(LpStatus::Unbounded);
        out.pivots = pivots;
        return out;
    }
    // refresh the factorization so the reported solution is drift-free
    if (!t.refactorize()) {
#ifdef STOCHGRID_LP_DEBUG
        std::fprintf(stderr, "lp: final refactorize singular\n");
#endif
        return failure(pivots);
    }
    t.recompute_basic_values();
    if (t.max_primal_residual() > 1e-7 * t.rhs_scale()) {
#ifdef STOCHGRID_LP_DEBUG
        std::fprintf(stderr, "lp: final residual %.3g scale %.3g\n",
                     t.max_primal_residual(), t.rhs_scale());
#endif
        return failure(pivots);
    }
    LpSolution out = t.extract(LpStatus::Optimal);
    out.pivots = pivots;
    return out;
}

LpSolution run_solve(const LpProblem& problem, const Basis* hint) {
    LpProblem p = problem;  // local copy so defaults don't mutate the input
    p.validate_and_default();
    const long pivot_limit = 20000 + 200L * (p.num_vars() + p.num_rows());

    if (hint && !hint->empty()) {
        Tableau warm(p);
        long pivots = 0;
        if (warm.install_warm_basis(*hint))
            return finish_phase2(warm, pivots, pivot_limit);
        // incompatible hint: silently fall back to a cold solve
    }

    Tableau t(p);
    long pivots = 0;
    t.set_initial_point();
    t.install_artificial_basis();
    t.set_phase1_costs();
    LpStatus s1 = t.iterate(pivots, pivot_limit);
    if (s1 == LpStatus::NumericalFailure) return failure(pivots);
    if (s1 == LpStatus::Unbounded) return failure(pivots);  // phase 1 is bounded
    double infeas = t.phase_objective();
    if (infeas > 1e-8 * t.rhs_scale()) {
        LpSolution out = t.extract(LpStatus::Infeasible);
        out.farkas = t.duals();  // phase-1 duals certify infeasibility
        out.pivots = pivots;
        return out;
    }
    t.drive_out_artificials();
    t.lock_artificials_for_phase2();
    return finish_phase2(t, pivots, pivot_limit);
}

}  // namespace

SimplexSolver::SimplexSolver(const LpProblem& problem) : problem_(problem) {}

LpSolution SimplexSolver::solve() { return run_solve(problem_, nullptr); }

LpSolution SimplexSolver::solve(const Basis& warm_start) {
    return run_solve(problem_, &warm_start);
}

LpSolution solve(const LpProblem& problem) { return run_solve(problem, nullptr); }

LpSolution solve_with_warm_start(const LpProblem& problem, const Basis& hint) {
    return run_solve(problem, &hint);
}

std::string to_mps(const LpProblem& problem) {
    LpProblem p = problem;
    p.validate_and_default();
    std::ostringstream os;
    char buf[64];
    os << "NAME          " << p.name << "\n";
    os << "ROWS\n";
    os << " N  COST\n";
    for (int i = 0; i < p.num_rows(); ++i) os << " E  R" << i << "\n";
    os << "COLUMNS\n";
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12f", v);
        return std::string(buf);
    };
    for (int j = 0; j < p.num_vars(); ++j) {
        std::string col = "X" + std::to_string(j);
        if (p.objective[j] != 0.0)
            os << "    " << col << "  COST  " << num(p.objective[j]) << "\n";
        for (int i = 0; i < p.num_rows(); ++i) {
            double v = p.rows(i, j);
            if (v != 0.0) os << "    " << col << "  R" << i << "  " << num(v) << "\n";
        }
    }
    os << "RHS\n";
    for (int i = 0; i < p.num_rows(); ++i)
        if (p.rhs[i] != 0.0) os << "    RHS  R" << i << "  " << num(p.rhs[i]) << "\n";
    os << "BOUNDS\n";
    for (int j = 0; j < p.num_vars(); ++j) {
        std::string col = "X" + std::to_string(j);
        if (p.lower[j] != 0.0 && p.lower[j] > -kInf)
            os << " LO BND  " << col << "  " << num(p.lower[j]) << "\n";
        if (p.lower[j] <= -kInf) os << " MI BND  " << col << "\n";
        if (p.upper[j] < kInf)
            os << " UP BND  " << col << "  " << num(p.upper[j]) << "\n";
    }
    os << "ENDATA\n";
    return os.str();
}

}  // namespace stochgrid
