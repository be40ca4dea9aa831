#include <cmath>

#include "doctest.h"
#include "oracle.hpp"

#include "eifkit/dist.hpp"
#include "eifkit/error.hpp"
#include "eifkit/generate.hpp"
#include "eifkit/tangent.hpp"

using namespace eifkit;

namespace {

FactorizedDistribution two_coins() {
  return FactorizedDistribution({make_variable("X1", 2, ""), make_variable("X2", 2, "")},
                                {{0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}});
}

FactorizedDistribution three_vars(std::uint64_t seed) {
  return random_distribution({make_variable("A", 2, ""), make_variable("B", 2, ""), make_variable("C", 2, "")}, seed);
}

double max_diff(const Table& a, const Table& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("joint density of two fair coins") {
  const auto p = two_coins();
  CHECK(joint_density(p, OutcomePoint{{0, 0}}) == 0.25);
}

TEST_CASE("point mass distribution") {
  const FactorizedDistribution p({make_variable("X", 3, ""), make_variable("Y", 2, "")},
                                 {{0, 1, 0}, {0.5, 0.5, 0, 1, 0.5, 0.5}});
  CHECK(joint_density(p, OutcomePoint{{1, 1}}) == 1.0);
  for (std::size_t x = 0; x < 3; ++x) {
    for (std::size_t y = 0; y < 2; ++y) {
      if (x != 1 || y != 1) CHECK(joint_density(p, OutcomePoint{{x, y}}) == 0.0);
    }
  }
}

TEST_CASE("joint density sums to one and matches enumeration") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = three_vars(seed);
    const auto o = oracle::joint_of(p);
    double total = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double d = joint_density(p, OutcomePoint{o.points[i]});
      CHECK(std::abs(d - o.prob[i]) <= 1e-15);
      total += d;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("invalid points are rejected") {
  const auto p = two_coins();
  CHECK_THROWS_AS(joint_density(p, OutcomePoint{{0, 2}}), DomainError);
  CHECK_THROWS_AS(joint_density(p, OutcomePoint{{0}}), DomainError);
}

TEST_CASE("constructor validates its invariants") {
  const auto x = make_variable("X", 2, "");
  CHECK_THROWS_AS(FactorizedDistribution({x, x}, {{0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}}), DomainError);
  CHECK_THROWS_AS(FactorizedDistribution({x}, {{0.5, 0.6}}), DomainError);
  CHECK_THROWS_AS(FactorizedDistribution({x}, {{1.5, -0.5}}), DomainError);
  CHECK_THROWS_AS(FactorizedDistribution({x}, {{0.5, 0.5, 0.0}}), DomainError);
  CHECK_THROWS_AS(FactorizedDistribution({VariableSpec{"X", {1.0, 1.0}, ""}}, {{0.5, 0.5}}), DomainError);
  CHECK_THROWS_AS(FactorizedDistribution({VariableSpec{"X", {}, ""}}, {{}}), DomainError);
  CHECK_NOTHROW(FactorizedDistribution({x}, {{0.5, 0.5 + 5e-13}}));
}

TEST_CASE("refactorize round trip") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = random_point_treatment(seed, {3, 2});
    const auto q = refactorize(p.joint(), p.variables());
    for (std::size_t i = 0; i < p.num_variables(); ++i) {
      const auto a = p.factor(i);
      const auto b = q.factor(i);
      for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-12);
    }
    CHECK(max_diff(p.joint(), q.joint()) <= 1e-12);
    CHECK(q.null_rows().empty());
  }
}

TEST_CASE("refactorize a uniform 2x2 joint") {
  const auto q = refactorize(Table{0.25, 0.25, 0.25, 0.25}, {make_variable("X1", 2, ""), make_variable("X2", 2, "")});
  for (std::size_t i = 0; i < 2; ++i) {
    for (double v : q.factor(i)) CHECK(v == 0.5);
  }
}

TEST_CASE("refactorize a perturbed joint") {
  const auto p = three_vars(5);
  const auto s = random_score(p, 6);
  Table joint(p.joint().size());
  for (std::size_t i = 0; i < joint.size(); ++i) joint[i] = (1 + 0.01 * s[i]) * p.joint()[i];
  const auto q = refactorize(joint, p.variables());
  const auto o = oracle::joint_of(q);
  for (std::size_t i = 0; i < joint.size(); ++i) CHECK(std::abs(o.prob[i] - joint[i]) <= 1e-12);
}

TEST_CASE("refactorize fills zero-mass rows uniformly and flags them") {
  // X1 = 1 never happens.
  const auto q = refactorize(Table{0.3, 0.7, 0.0, 0.0}, {make_variable("X1", 2, ""), make_variable("X2", 2, "")});
  REQUIRE(q.null_rows().size() == 1);
  CHECK(q.null_rows()[0].factor == 1);
  CHECK(q.null_rows()[0].parent == 1);
  CHECK(q.conditional(1, 1, 0) == 0.5);
  CHECK(q.conditional(1, 1, 1) == 0.5);
  CHECK(q.conditional(1, 0, 1) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("refactorize rejects a joint that is not a distribution") {
  const auto vars = std::vector<VariableSpec>{make_variable("X", 2, "")};
  CHECK_THROWS_AS(refactorize(Table{0.5, 0.6}, vars), DomainError);
  CHECK_THROWS_AS(refactorize(Table{1.5, -0.5}, vars), DomainError);
  CHECK_THROWS_AS(refactorize(Table{1.0}, vars), DomainError);
}

TEST_CASE("expectation") {
  const auto p = random_point_treatment(3);
  const auto o = oracle::joint_of(p);
  CHECK(std::abs(expectation(p, Table(p.joint().size(), 1.0)) - 1.0) <= 1e-12);
  Table atom(p.joint().size(), 0.0);
  atom[7] = 1.0;
  CHECK(expectation(p, atom) == p.joint()[7]);
  const std::size_t y = p.num_variables() - 1;
  CHECK(std::abs(expectation(p, variable_values(p, y)) - oracle::expect(o, oracle::values_of(o, y))) <= 1e-12);
}

TEST_CASE("tabulate evaluates at every point") {
  const auto p = random_point_treatment(3);
  const auto t = tabulate(p, [](const OutcomePoint& o) { return static_cast<double>(o.levels[0] * 10 + o.levels[2]); });
  const auto o = oracle::joint_of(p);
  for (std::size_t i = 0; i < o.size(); ++i) CHECK(t[i] == static_cast<double>(o.points[i][0] * 10 + o.points[i][2]));
}

TEST_CASE("conditional expectation") {
  const auto p = random_point_treatment(4);
  const auto o = oracle::joint_of(p);
  const std::size_t y = 2;
  const Table yv = variable_values(p, y);
  SUBCASE("full history returns the value") {
    for (std::size_t i = 0; i < o.size(); ++i) {
      CHECK(conditional_expectation(p, yv, o.points[i]) == doctest::Approx(yv[i]).epsilon(1e-15));
    }
  }
  SUBCASE("empty history is the expectation") {
    CHECK(std::abs(conditional_expectation(p, yv, std::vector<std::size_t>{}) - expectation(p, yv)) <= 1e-15);
  }
  SUBCASE("outcome regression matches enumeration") {
    for (std::size_t w = 0; w < 3; ++w) {
      for (std::size_t a = 0; a < 2; ++a) {
        const std::vector<std::size_t> at{w, a};
        CHECK(std::abs(conditional_expectation(p, yv, at) - oracle::q_bar(o, 1, 2, {w}, a)) <= 1e-12);
      }
    }
  }
  SUBCASE("zero-mass event") {
    const FactorizedDistribution q({make_variable("X", 2, ""), make_variable("Y", 2, "")}, {{1, 0}, {0.5, 0.5, 0.5, 0.5}});
    const std::vector<std::size_t> at{1};
    CHECK_THROWS_AS(conditional_expectation(q, variable_values(q, 1), at), DomainError);
  }
}

TEST_CASE("conditional expectation on arbitrary variable subsets matches enumeration") {
  const auto p = random_transport(9, false);
  const auto o = oracle::joint_of(p);
  const auto s = random_score(p, 10);
  const std::vector<std::vector<std::size_t>> subsets{{}, {0}, {1, 3}, {0, 1, 3, 4}, {2, 5}, {0, 1, 2, 3, 4, 5}};
  for (const auto& vars : subsets) {
    const Table lib = conditional_expectation_on(p, s.values(), vars);
    const auto ref = oracle::cond_mean(o, s.values(), vars);
    CHECK(oracle::max_abs_diff_on_support(o, lib, ref) <= 1e-12);
  }
}

TEST_CASE("tower property for every prefix") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto p = random_longitudinal(seed, 1);
    const auto s = random_score(p, seed + 100);
    Table f = s.values();
    for (auto& v : f) v += 3.0;
    for (std::size_t k = 0; k <= p.num_variables(); ++k) {
      CHECK(std::abs(expectation(p, conditional_expectation_table(p, f, k)) - expectation(p, f)) <= 1e-12);
    }
  }
}

TEST_CASE("prefix means and broadcast") {
  const auto p = random_point_treatment(12);
  const auto o = oracle::joint_of(p);
  const Table yv = variable_values(p, 2);
  const Table means = prefix_means(p, yv, 2);
  const Table full = broadcast_prefix(p.space(), means, 2);
  const auto ref = oracle::cond_mean(o, yv, {0, 1});
  CHECK(oracle::max_abs_diff_on_support(o, full, ref) <= 1e-12);
  const Table pm = prefix_marginal(p, 1);
  for (std::size_t w = 0; w < 3; ++w) CHECK(std::abs(pm[w] - oracle::mass(o, {0}, {w})) <= 1e-12);
}

TEST_CASE("marginals") {
  SUBCASE("all variables give the joint") {
    const auto p = three_vars(3);
    const auto m = marginal(p, {0, 1, 2});
    CHECK(max_diff(m.probs, p.joint()) <= 1e-15);
  }
  SUBCASE("first variable of an independent pair is its factor") {
    const FactorizedDistribution p({make_variable("X1", 3, ""), make_variable("X2", 2, "")},
                                   {{0.2, 0.3, 0.5}, {0.1, 0.9, 0.1, 0.9, 0.1, 0.9}});
    const auto m = marginal(p, {0});
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(m.probs[i] - p.factor(0)[i]) <= 1e-15);
    const auto m2 = marginal(p, {1});
    CHECK(std::abs(m2.probs[1] - 0.9) <= 1e-15);
  }
  SUBCASE("W marginal in a point-treatment model") {
    const auto p = random_point_treatment(8, {3, 2});
    const auto o = oracle::joint_of(p);
    const auto m = marginal(p, {0, 1});
    double total = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 2; ++b) {
        const std::vector<std::size_t> at{a, b};
        CHECK(std::abs(m.at(at) - oracle::mass(o, {0, 1}, {a, b})) <= 1e-12);
        total += m.at(at);
      }
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
  SUBCASE("out of order subsets") {
    const auto p = random_point_treatment(8);
    const auto o = oracle::joint_of(p);
    const auto m = marginal(p, {2, 0});
    for (std::size_t y = 0; y < 3; ++y) {
      for (std::size_t w = 0; w < 3; ++w) {
        const std::vector<std::size_t> at{y, w};
        CHECK(std::abs(m.at(at) - oracle::mass(o, {2, 0}, {y, w})) <= 1e-12);
      }
    }
  }
}

TEST_CASE("contract_last integrates the last variable") {
  // f over (X1, X2) with X2 binary; conditional rows per X1 level.
  const Table f{1.0, 3.0, 10.0, 20.0};
  const Table g{0.25, 0.75, 0.5, 0.5};
  const Table r = contract_last(f, g, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(2.5));
  CHECK(r[1] == doctest::Approx(15.0));
}

TEST_CASE("outcome space indexing") {
  const OutcomeSpace s({3, 2, 4});
  CHECK(s.size() == 24);
  CHECK(s.prefix_count(2) == 6);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.index_of(s.point_at(i)) == i);
  const OutcomePoint o{{2, 1, 3}};
  CHECK(s.index_of(o) == 2 * 8 + 1 * 4 + 3);
  CHECK(s.level_of(s.index_of(o), 1) == 1);
}

TEST_CASE("positivity floor") {
  const auto p = two_coins();
  CHECK(p.positivity_floor() == 1e-3);
  CHECK_NOTHROW(p.require_positive(1e-3, "x"));
  CHECK_THROWS_AS(p.require_positive(9e-4, "x"), PositivityError);
}

TEST_CASE("quadrature grid") {
  const auto g = QuadratureGrid::unit_at_levels(std::vector<double>{1, 2, 3, 4}, 1, 4);
  CHECK(g.points() == std::vector<double>{1, 2, 3, 4});
  CHECK(g.weights() == std::vector<double>{1, 1, 1, 1});
  const auto clipped = QuadratureGrid({0.0, 2.0}, {1.0, 1.0}, 1.0, 3.0);
  CHECK(clipped.points().front() == 1.0);
  CHECK_THROWS_AS(QuadratureGrid({1.0, 2.0}, {1.0, 0.0}, 0.0, 3.0), DomainError);
  CHECK_THROWS_AS(QuadratureGrid({2.0, 1.0}, {1.0, 1.0}, 0.0, 3.0), DomainError);
  CHECK_THROWS_AS(QuadratureGrid({0.0, 0.5}, {1.0, 1.0}, 1.0, 3.0), DomainError);
}

TEST_CASE("with_factor replaces one table") {
  const auto p = two_coins();
  const auto q = p.with_factor(1, {0.1, 0.9, 0.5, 0.5});
  CHECK(q.conditional(1, 0, 1) == 0.9);
  CHECK(q.factor(0)[0] == 0.5);
  CHECK(std::abs(q.joint()[1] - 0.45) <= 1e-15);
  CHECK_THROWS_AS(p.with_factor(1, {0.1, 0.8, 0.5, 0.5}), DomainError);
}
