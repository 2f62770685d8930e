#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "common.hpp"

namespace dta::lp {

// Bounded-variable linear program:
//   minimise  objective . x
//   s.t.      eq_rows  . x  = eq_rhs
//             le_rows  . x <= le_rhs
//             lower <= x <= upper   (entries may be +/-infinity)
// An empty objective means pure feasibility.
struct Problem {
    int n_vars = 0;
    std::vector<double> lower, upper;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
    std::vector<double> objective;

    // Feasibility-mode centering: with an all-zero objective, pick a feasible
    // point whose <= rows hold with a common extra slack of up to this many
    // rhs units (maximised, possibly 0). Leaves the status untouched; 0
    // disables it. Interior-point solvers land on central points naturally;
    // this gives the simplex the same helpful bias.
    double centering_margin = 0.0;

    void add_eq(std::vector<double> row, double rhs) {
        eq_rows.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }
    void add_le(std::vector<double> row, double rhs) {
        le_rows.push_back(std::move(row));
        le_rhs.push_back(rhs);
    }
    void validate() const;
};

enum class Status { Optimal, Feasible, Infeasible };

struct Solution {
    Status status = Status::Infeasible;
    std::vector<double> values;
    double objective_value = 0.0;
};

// Dense two-phase simplex over bounded variables, Bland's rule. Throws
// UnboundedError when a nonzero objective is unbounded below.
Solution solve(const Problem& problem);

// Independent verifier: re-validates a variable assignment against the raw
// constraint data. Bounds are checked to `tol` absolute, rows to
// tol * max(1, |rhs|). Never consults solver internals.
bool check_solution(const Problem& problem, const std::vector<double>& x, double tol = 1e-8,
                    std::string* why = nullptr);

// Plain-text debug dump, one row per line (format documented in README)
void dump(const Problem& problem, std::ostream& os);

}  // namespace dta::lp
