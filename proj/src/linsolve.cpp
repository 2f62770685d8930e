#include "linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace dta::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;   // reject pivots smaller than this
constexpr double kCostTol = 1e-9;     // reduced-cost attractiveness threshold
constexpr double kPhase1Tol = 1e-9;   // residual infeasibility accepted after phase 1

enum class At { Lower, Upper, Basic };

// Working state for the tableau simplex. Variables are laid out as
// [structural | slacks | artificials]; rows are normalised on entry so that
// the feasibility decision is invariant under positive row scaling.
struct Tableau {
    int n = 0;                              // columns (without rhs)
    int m = 0;                              // rows
    std::vector<std::vector<double>> a;     // m x n, row-reduced as pivots occur
    std::vector<double> lo, hi;             // bounds per column
    std::vector<double> x;                  // current value per column
    std::vector<int> basis;                 // basic column per row
    std::vector<At> state;                  // per column
    int n_artificial_start = 0;

    double value(const std::vector<double>& c) const {
        double v = 0.0;
        for (int j = 0; j < n; ++j) v += c[j] * x[j];
        return v;
    }
};

// One simplex phase: minimise cost over the current tableau. Bland's rule on
// both the entering and leaving choices prevents cycling. Returns false if
// the objective is unbounded.
bool run_simplex(Tableau& tb, const std::vector<double>& cost, bool forbid_artificials) {
    const int max_iters = 200 * (tb.n + tb.m + 10);
    // reduced-cost row maintained by elimination
    std::vector<double> d = cost;
    for (int i = 0; i < tb.m; ++i) {
        double cb = d[tb.basis[i]];
        if (cb != 0.0) {
            for (int j = 0; j < tb.n; ++j) d[j] -= cb * tb.a[i][j];
        }
    }

    for (int iter = 0; iter < max_iters; ++iter) {
        // entering: lowest-index attractive column
        int enter = -1;
        int dir = 0;  // +1 increase from lower, -1 decrease from upper
        for (int j = 0; j < tb.n; ++j) {
            if (tb.state[j] == At::Basic) continue;
            if (forbid_artificials && j >= tb.n_artificial_start) continue;
            if (tb.state[j] == At::Lower && d[j] < -kCostTol) {
                enter = j;
                dir = +1;
                break;
            }
            if (tb.state[j] == At::Upper && d[j] > kCostTol) {
                enter = j;
                dir = -1;
                break;
            }
        }
        if (enter < 0) return true;  // optimal

        // ratio test: smallest step before a basic variable or the entering
        // variable itself hits a bound; ties go to the lowest basic variable
        // index (Bland)
        double limit = tb.hi[enter] - tb.lo[enter];  // bound flip distance
        int leave_row = -1;
        int leave_to_upper = 0;
        for (int i = 0; i < tb.m; ++i) {
            double alpha = tb.a[i][enter] * dir;
            int k = tb.basis[i];
            double step = kInf;
            int to_upper = 0;
            if (alpha > kPivotTol) {  // basic decreases toward its lower bound
                if (tb.lo[k] > -kInf) step = std::max((tb.x[k] - tb.lo[k]) / alpha, 0.0);
            } else if (alpha < -kPivotTol) {  // basic increases toward upper
                if (tb.hi[k] < kInf) {
                    step = std::max((tb.hi[k] - tb.x[k]) / (-alpha), 0.0);
                    to_upper = 1;
                }
            }
            if (step == kInf) continue;
            bool better = step < limit - 1e-12;
            bool tie = !better && step <= limit + 1e-12 && leave_row >= 0 &&
                       tb.basis[i] < tb.basis[leave_row];
            if (better || tie) {
                limit = step;
                leave_row = i;
                leave_to_upper = to_upper;
            }
        }

        if (limit == kInf) return false;  // unbounded direction

        // apply the step
        if (limit > 0.0) {
            tb.x[enter] += dir * limit;
            for (int i = 0; i < tb.m; ++i) tb.x[tb.basis[i]] -= tb.a[i][enter] * dir * limit;
        }

        if (leave_row < 0) {
            // entering variable flipped to its other bound; no pivot
            tb.state[enter] = (dir > 0) ? At::Upper : At::Lower;
            tb.x[enter] = (dir > 0) ? tb.hi[enter] : tb.lo[enter];
            continue;
        }

        int leave = tb.basis[leave_row];
        tb.x[leave] = leave_to_upper ? tb.hi[leave] : tb.lo[leave];
        tb.state[leave] = leave_to_upper ? At::Upper : At::Lower;
        tb.state[enter] = At::Basic;
        tb.basis[leave_row] = enter;

        // pivot row reduction
        double piv = tb.a[leave_row][enter];
        double inv = 1.0 / piv;
        for (int j = 0; j < tb.n; ++j) tb.a[leave_row][j] *= inv;
        tb.a[leave_row][enter] = 1.0;
        for (int i = 0; i < tb.m; ++i) {
            if (i == leave_row) continue;
            double f = tb.a[i][enter];
            if (f == 0.0) continue;
            for (int j = 0; j < tb.n; ++j) tb.a[i][j] -= f * tb.a[leave_row][j];
            tb.a[i][enter] = 0.0;
        }
        double fd = d[enter];
        if (fd != 0.0) {
            for (int j = 0; j < tb.n; ++j) d[j] -= fd * tb.a[leave_row][j];
            d[enter] = 0.0;
        }
    }
    throw Error("simplex iteration limit exceeded");
}

// Re-solve the basic variables from the original (normalised) rows with
// Gaussian elimination, removing drift accumulated in the tableau.
void refine_basics(const std::vector<std::vector<double>>& rows, const std::vector<double>& rhs,
                   Tableau& tb) {
    int m = tb.m;
    if (m == 0) return;
    std::vector<std::vector<double>> B(m, std::vector<double>(m + 1, 0.0));
    for (int i = 0; i < m; ++i) {
        double r = rhs[i];
        for (int j = 0; j < tb.n; ++j) {
            if (tb.state[j] == At::Basic) continue;
            if (tb.x[j] != 0.0) r -= rows[i][j] * tb.x[j];
        }
        for (int k = 0; k < m; ++k) B[i][k] = rows[i][tb.basis[k]];
        B[i][m] = r;
    }
    // partial-pivot elimination
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int i = col + 1; i < m; ++i)
            if (std::abs(B[i][col]) > std::abs(B[piv][col])) piv = i;
        if (std::abs(B[piv][col]) < 1e-13) return;  // singular; keep tableau values
        std::swap(B[col], B[piv]);
        for (int i = col + 1; i < m; ++i) {
            double f = B[i][col] / B[col][col];
            if (f == 0.0) continue;
            for (int j = col; j <= m; ++j) B[i][j] -= f * B[col][j];
        }
    }
    std::vector<double> xb(m);
    for (int i = m - 1; i >= 0; --i) {
        double v = B[i][m];
        for (int j = i + 1; j < m; ++j) v -= B[i][j] * xb[j];
        xb[i] = v / B[i][i];
    }
    for (int k = 0; k < m; ++k) tb.x[tb.basis[k]] = xb[k];
}

}  // namespace

void Problem::validate() const {
    if (n_vars < 0) throw Error("lp: negative variable count");
    auto check_len = [&](size_t len, const char* what) {
        if (len != static_cast<size_t>(n_vars))
            throw Error(std::string("lp: ") + what + " length mismatch");
    };
    check_len(lower.size(), "lower bounds");
    check_len(upper.size(), "upper bounds");
    for (int j = 0; j < n_vars; ++j)
        if (!(lower[j] <= upper[j])) throw Error("lp: lower bound exceeds upper bound");
    if (eq_rows.size() != eq_rhs.size() || le_rows.size() != le_rhs.size())
        throw Error("lp: row/rhs count mismatch");
    for (const auto& r : eq_rows) check_len(r.size(), "eq row");
    for (const auto& r : le_rows) check_len(r.size(), "le row");
    if (!objective.empty()) check_len(objective.size(), "objective");
}

Solution solve(const Problem& problem) {
    problem.validate();
    const bool has_objective =
        std::any_of(problem.objective.begin(), problem.objective.end(), [](double c) { return c != 0.0; });
    const bool center = !has_objective && problem.centering_margin > 0.0 && !problem.le_rows.empty();

    const int nv = problem.n_vars + (center ? 1 : 0);  // + common margin column
    const int n_eq = static_cast<int>(problem.eq_rows.size());
    const int n_le = static_cast<int>(problem.le_rows.size());
    const int m = n_eq + n_le;
    const int n_total = nv + n_le + m;  // structural + slacks + artificials

    Tableau tb;
    tb.n = n_total;
    tb.m = m;
    tb.n_artificial_start = nv + n_le;
    tb.a.assign(m, std::vector<double>(n_total, 0.0));
    tb.lo.assign(n_total, 0.0);
    tb.hi.assign(n_total, kInf);
    tb.x.assign(n_total, 0.0);
    tb.state.assign(n_total, At::Lower);
    tb.basis.resize(m);

    for (int j = 0; j < problem.n_vars; ++j) {
        tb.lo[j] = problem.lower[j];
        tb.hi[j] = problem.upper[j];
    }
    if (center) {
        tb.lo[nv - 1] = 0.0;
        tb.hi[nv - 1] = problem.centering_margin;
    }

    // row normalisation keeps the feasibility decision invariant under
    // positive row scaling
    std::vector<double> rhs(m, 0.0);
    std::vector<std::vector<double>> rows(m, std::vector<double>(n_total, 0.0));
    for (int i = 0; i < m; ++i) {
        const bool is_eq = i < n_eq;
        const auto& src = is_eq ? problem.eq_rows[i] : problem.le_rows[i - n_eq];
        double b = is_eq ? problem.eq_rhs[i] : problem.le_rhs[i - n_eq];
        double scale = std::abs(b);
        for (double c : src) scale = std::max(scale, std::abs(c));
        if (scale <= 0.0) scale = 1.0;
        for (int j = 0; j < problem.n_vars; ++j) rows[i][j] = src[j] / scale;
        if (center && !is_eq) rows[i][nv - 1] = 1.0 / scale;  // margin deepens <= rows
        if (!is_eq) rows[i][nv + (i - n_eq)] = 1.0;           // slack
        rhs[i] = b / scale;
    }

    // nonbasic start at the finite bound nearest zero
    for (int j = 0; j < nv + n_le; ++j) {
        if (tb.lo[j] > -kInf) {
            tb.x[j] = tb.lo[j];
            tb.state[j] = At::Lower;
        } else if (tb.hi[j] < kInf) {
            tb.x[j] = tb.hi[j];
            tb.state[j] = At::Upper;
        } else {
            tb.x[j] = 0.0;
            tb.state[j] = At::Lower;  // free var treated as at a virtual bound
            tb.lo[j] = -kInf;
        }
    }

    // artificial basis absorbs the residuals; rows with a negative residual
    // are negated so every basis column starts as +1 (identity basis)
    for (int i = 0; i < m; ++i) {
        double r = rhs[i];
        for (int j = 0; j < nv + n_le; ++j)
            if (tb.x[j] != 0.0) r -= rows[i][j] * tb.x[j];
        if (r < 0.0) {
            for (int j = 0; j < nv + n_le; ++j) rows[i][j] = -rows[i][j];
            rhs[i] = -rhs[i];
            r = -r;
        }
        int art = nv + n_le + i;
        rows[i][art] = 1.0;
        tb.x[art] = r;
        tb.state[art] = At::Basic;
        tb.basis[i] = art;
    }
    tb.a = rows;

    // phase 1: drive artificials to zero
    std::vector<double> phase1_cost(n_total, 0.0);
    for (int i = 0; i < m; ++i) phase1_cost[nv + n_le + i] = 1.0;
    run_simplex(tb, phase1_cost, false);

    double art_sum = 0.0;
    for (int i = 0; i < m; ++i) art_sum += tb.x[nv + n_le + i];
    if (art_sum > kPhase1Tol) return Solution{Status::Infeasible, {}, 0.0};

    // pin artificials at zero so phase 2 cannot reintroduce infeasibility
    for (int i = 0; i < m; ++i) {
        int art = nv + n_le + i;
        tb.lo[art] = 0.0;
        tb.hi[art] = 0.0;
        if (tb.state[art] != At::Basic) tb.x[art] = 0.0;
    }

    if (has_objective) {
        std::vector<double> cost(n_total, 0.0);
        for (int j = 0; j < problem.n_vars; ++j) cost[j] = problem.objective[j];
        if (!run_simplex(tb, cost, true)) throw UnboundedError();
    } else if (center) {
        std::vector<double> cost(n_total, 0.0);
        cost[nv - 1] = -1.0;  // maximise the common margin; bounded by its box
        run_simplex(tb, cost, true);
    }

    refine_basics(rows, rhs, tb);

    Solution sol;
    sol.status = has_objective ? Status::Optimal : Status::Feasible;
    sol.values.assign(tb.x.begin(), tb.x.begin() + problem.n_vars);
    // clamp round-off just outside the box
    for (int j = 0; j < problem.n_vars; ++j)
        sol.values[j] = std::min(std::max(sol.values[j], problem.lower[j]), problem.upper[j]);
    if (!problem.objective.empty())
        for (int j = 0; j < problem.n_vars; ++j)
            sol.objective_value += problem.objective[j] * sol.values[j];
    return sol;
}

bool check_solution(const Problem& problem, const std::vector<double>& x, double tol,
                    std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (x.size() != static_cast<size_t>(problem.n_vars)) return fail("wrong assignment length");
    for (int j = 0; j < problem.n_vars; ++j) {
        if (x[j] < problem.lower[j] - tol || x[j] > problem.upper[j] + tol) {
            std::ostringstream os;
            os << "bound violated at variable " << j;
            return fail(os.str());
        }
    }
    for (size_t i = 0; i < problem.eq_rows.size(); ++i) {
        double ax = 0.0;
        for (int j = 0; j < problem.n_vars; ++j) ax += problem.eq_rows[i][j] * x[j];
        double b = problem.eq_rhs[i];
        if (std::abs(ax - b) > tol * std::max(1.0, std::abs(b))) {
            std::ostringstream os;
            os << "eq row " << i << " residual " << (ax - b);
            return fail(os.str());
        }
    }
    for (size_t i = 0; i < problem.le_rows.size(); ++i) {
        double ax = 0.0;
        for (int j = 0; j < problem.n_vars; ++j) ax += problem.le_rows[i][j] * x[j];
        double b = problem.le_rhs[i];
        if (ax - b > tol * std::max(1.0, std::abs(b))) {
            std::ostringstream os;
            os << "le row " << i << " violated by " << (ax - b);
            return fail(os.str());
        }
    }
    return true;
}

void dump(const Problem& problem, std::ostream& os) {
    os << "lp " << problem.n_vars << "\n";
    for (int j = 0; j < problem.n_vars; ++j)
        os << "bound " << problem.lower[j] << " " << problem.upper[j] << "\n";
    for (size_t i = 0; i < problem.eq_rows.size(); ++i) {
        os << "eq";
        for (double c : problem.eq_rows[i]) os << " " << c;
        os << " " << problem.eq_rhs[i] << "\n";
    }
    for (size_t i = 0; i < problem.le_rows.size(); ++i) {
        os << "le";
        for (double c : problem.le_rows[i]) os << " " << c;
        os << " " << problem.le_rhs[i] << "\n";
    }
    if (!problem.objective.empty()) {
        os << "min";
        for (double c : problem.objective) os << " " << c;
        os << "\n";
    }
}

}  // namespace dta::lp
