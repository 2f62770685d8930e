#include <sstream>

#include "doctest.h"
#include "linsolve.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace dta;

TEST_CASE("forced equality") {
    lp::Problem p;
    p.n_vars = 1;
    p.lower = {0.0};
    p.upper = {1.0};
    p.add_eq({1.0}, 0.5);
    lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Feasible);
    CHECK(s.values[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(lp::check_solution(p, s.values));
}

TEST_CASE("contradictory bounds vs inequality") {
    lp::Problem p;
    p.n_vars = 1;
    p.lower = {1.0};
    p.upper = {2.0};
    p.add_le({1.0}, 0.0);
    CHECK(lp::solve(p).status == lp::Status::Infeasible);
}

TEST_CASE("tiny polytope optimum") {
    // minimise x + y subject to x + y >= 1 in [0,10]^2: optimum value 1
    lp::Problem p;
    p.n_vars = 2;
    p.lower = {0.0, 0.0};
    p.upper = {10.0, 10.0};
    p.add_le({-1.0, -1.0}, -1.0);
    p.objective = {1.0, 1.0};
    lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(lp::check_solution(p, s.values));
}

TEST_CASE("unbounded objective throws") {
    lp::Problem p;
    p.n_vars = 1;
    p.lower = {0.0};
    p.upper = {std::numeric_limits<double>::infinity()};
    p.objective = {-1.0};
    CHECK_THROWS_AS(lp::solve(p), UnboundedError);
}

TEST_CASE("planted-feasible instances never infeasible; verifier passes") {
    Rng rng(2024);
    int optimal_better = 0;
    for (int rep = 0; rep < 500; ++rep) {
        oracles::PlantedLp planted = oracles::random_planted_lp(rng);
        lp::Solution s = lp::solve(planted.problem);
        REQUIRE(s.status != lp::Status::Infeasible);
        std::string why;
        bool ok = lp::check_solution(planted.problem, s.values, 1e-8, &why);
        if (!ok) INFO("verifier: ", why);
        CHECK(ok);
        if (!planted.problem.objective.empty()) {
            double at_x0 = 0.0;
            for (int j = 0; j < planted.problem.n_vars; ++j)
                at_x0 += planted.problem.objective[j] * planted.x0[j];
            if (s.objective_value <= at_x0 + 1e-7) ++optimal_better;
        }
    }
    CHECK(optimal_better > 0);  // optimiser beats (or ties) the planted point when asked
}

TEST_CASE("feasibility status invariant under positive row scaling") {
    Rng rng(99);
    for (int rep = 0; rep < 100; ++rep) {
        oracles::PlantedLp planted = oracles::random_planted_lp(rng);
        // make half of the cases infeasible by contradicting the first eq row
        bool expect_infeasible = false;
        lp::Problem prob = planted.problem;
        if (rep % 2 == 1 && !prob.eq_rows.empty()) {
            std::vector<double> row = prob.eq_rows[0];
            prob.add_eq(row, prob.eq_rhs[0] + 7.5);  // same lhs, different rhs
            expect_infeasible = true;
        }
        lp::Status base = lp::solve(prob).status;
        if (expect_infeasible) CHECK(base == lp::Status::Infeasible);

        lp::Problem scaled = prob;
        double factors[] = {1e-4, 3.0, 1e4};
        for (size_t i = 0; i < scaled.eq_rows.size(); ++i) {
            double f = factors[i % 3];
            for (auto& c : scaled.eq_rows[i]) c *= f;
            scaled.eq_rhs[i] *= f;
        }
        for (size_t i = 0; i < scaled.le_rows.size(); ++i) {
            double f = factors[(i + 1) % 3];
            for (auto& c : scaled.le_rows[i]) c *= f;
            scaled.le_rhs[i] *= f;
        }
        CHECK(lp::solve(scaled).status == base);
    }
}

TEST_CASE("equality-only square system") {
    lp::Problem p;
    p.n_vars = 2;
    p.lower = {-10.0, -10.0};
    p.upper = {10.0, 10.0};
    p.add_eq({2.0, 1.0}, 5.0);
    p.add_eq({1.0, -1.0}, 1.0);
    lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Feasible);
    CHECK(s.values[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("degenerate equal bounds") {
    lp::Problem p;
    p.n_vars = 2;
    p.lower = {0.25, 0.0};
    p.upper = {0.25, 1.0};
    p.add_eq({1.0, 1.0}, 0.75);
    lp::Solution s = lp::solve(p);
    REQUIRE(s.status == lp::Status::Feasible);
    CHECK(s.values[0] == doctest::Approx(0.25));
    CHECK(s.values[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("problem dump format") {
    lp::Problem p;
    p.n_vars = 2;
    p.lower = {0.0, -1.0};
    p.upper = {1.0, 2.0};
    p.add_eq({1.0, 2.0}, 3.0);
    p.add_le({-1.0, 0.5}, 0.25);
    p.objective = {1.0, -1.0};
    std::ostringstream os;
    lp::dump(p, os);
    CHECK(os.str() ==
          "lp 2\n"
          "bound 0 1\n"
          "bound -1 2\n"
          "eq 1 2 3\n"
          "le -1 0.5 0.25\n"
          "min 1 -1\n");
}

TEST_CASE("malformed problems rejected") {
    lp::Problem p;
    p.n_vars = 2;
    p.lower = {0.0};  // wrong length
    p.upper = {1.0, 1.0};
    CHECK_THROWS_AS(lp::solve(p), Error);

    lp::Problem q;
    q.n_vars = 1;
    q.lower = {2.0};
    q.upper = {1.0};  // inverted bounds
    CHECK_THROWS_AS(lp::solve(q), Error);
}
