#include <doctest.h>

#include <cmath>
#include <random>

#include "fsel/markov.hpp"
#include "fsel/selection.hpp"
#include "test_util.hpp"

using namespace fsel;

namespace {

const Alphabet kBinary = Alphabet::finite(2);
const auto kHalf = BernoulliDistribution::explicit_weights({0.5, 0.5});

/// Stationary vector by plain power iteration on the lazy chain, used as an
/// oracle independent of the linear solve.
Eigen::VectorXd power_oracle(const Eigen::MatrixXd& P) {
  const auto n = P.rows();
  const Eigen::MatrixXd lazy = 0.5 * (Eigen::MatrixXd::Identity(n, n) + P);
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int i = 0; i < 200'000; ++i) {
    const Eigen::RowVectorXd w = v * lazy;
    if ((w - v).lpNorm<1>() < 1e-15) return w.transpose();
    v = w;
  }
  return v.transpose();
}

Eigen::MatrixXd random_stochastic(std::mt19937_64& gen, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd P(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) P(i, j) = u(gen);
    P.row(i) /= P.row(i).sum();
  }
  return P;
}

}  // namespace

TEST_CASE("parity chain") {
  const auto c = induce_chain(make_parity_selector(kBinary), kHalf);
  CHECK(c.P.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.5)));
  REQUIRE(c.irreducible);
  CHECK(c.pi(0) == doctest::Approx(0.5));
  CHECK(c.pi(1) == doctest::Approx(0.5));
  CHECK(c.selection_constant() == doctest::Approx(0.5));
  CHECK(c.predicted_selection_rate == doctest::Approx(0.5));
}

TEST_CASE("one-state chain") {
  const auto c = induce_chain(make_accept_all(Alphabet::countably_infinite()), BernoulliDistribution::geometric(0.3));
  REQUIRE(c.P.rows() == 1);
  CHECK(c.P(0, 0) == doctest::Approx(1.0));
  CHECK(c.pi(0) == doctest::Approx(1.0));
  CHECK(c.expected_return_times[0] == doctest::Approx(1.0));

  DfaBuilder none(kBinary, 1);
  const auto n = induce_chain(none.build(), kHalf);
  CHECK_FALSE(n.c.has_value());
  CHECK(n.predicted_selection_rate == 0.0);
  CHECK_THROWS_AS(n.selection_constant(), ValidationError);
}

TEST_CASE("S_0 chain and the skewed example") {
  const auto s0 = induce_chain(compile_postnikova_kmp({0}, kBinary), kHalf);
  REQUIRE(s0.irreducible);
  CHECK(s0.pi(0) == doctest::Approx(0.5));
  CHECK(s0.pi(1) == doctest::Approx(0.5));

  Eigen::MatrixXd P(2, 2);
  P << 0.9, 0.1, 0.5, 0.5;
  const auto pi = stationary(P);
  CHECK(pi(0) == doctest::Approx(5.0 / 6.0));
  CHECK(pi(1) == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("KMP chain for 00") {
  const auto c = induce_chain(compile_postnikova_kmp({0, 0}, kBinary), kHalf);
  REQUIRE(c.irreducible);
  // States: 0 = no progress, 1 = seen 0, 2 = seen 00 (accepting).
  CHECK(c.pi(0) == doctest::Approx(0.5));
  CHECK(c.pi(1) == doctest::Approx(0.25));
  CHECK(c.pi(2) == doctest::Approx(0.25));
  CHECK(c.predicted_selection_rate == doctest::Approx(0.25));
}

TEST_CASE("stationary vectors of random chains") {
  std::mt19937_64 gen(89);
  for (int trial = 0; trial < 20; ++trial) {
    const auto P = random_stochastic(gen, 10);
    const auto pi = stationary(P);
    CHECK(stationary_residual(P, pi) < 1e-12);
    CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((pi - power_oracle(P)).lpNorm<Eigen::Infinity>() < 1e-10);
    for (int i = 0; i < 10; ++i) CHECK(pi(i) > 0.0);
  }
}

TEST_CASE("stationary rejects reducible and malformed matrices") {
  Eigen::MatrixXd two_sinks(3, 3);
  two_sinks << 1, 0, 0, 0, 1, 0, 0.5, 0.5, 0;
  CHECK_THROWS_AS(stationary(two_sinks), NotIrreducible);
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_AS(stationary(bad), ValidationError);
  CHECK_THROWS_AS(stationary(Eigen::MatrixXd(2, 3)), ValidationError);
}

TEST_CASE("induced chains of random selectors") {
  std::mt19937_64 gen(97);
  const auto p = BernoulliDistribution::explicit_weights({0.2, 0.5, 0.3});
  for (int trial = 0; trial < 100; ++trial) {
    auto table = testing::random_sc_table(gen, 1 + gen() % 10, 3);
    table.accepting[gen() % table.accepting.size()] = true;
    const Dfa d = testing::to_dfa(table);
    const auto c = induce_chain(d, p);
    // Rows sum to one and entries match the table.
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(c.P.rows(), c.P.cols());
    for (std::size_t q = 0; q < table.next.size(); ++q)
      for (Symbol a = 0; a < 3; ++a) oracle(static_cast<int>(q), table.next[q][a]) += p.prob(a);
    CHECK((c.P - oracle).lpNorm<Eigen::Infinity>() < 1e-15);
    REQUIRE(c.irreducible);
    CHECK(stationary_residual(c.P, c.pi) < 1e-12);
    for (int i = 0; i < c.pi.size(); ++i) CHECK(c.pi(i) * c.expected_return_times[i] == doctest::Approx(1.0));
    REQUIRE(c.c.has_value());
    CHECK(*c.c <= c.predicted_selection_rate + 1e-15);
    CHECK(*c.c > 0.0);
  }
}

TEST_CASE("infinite alphabet chain puts the complement on the default edge") {
  DfaBuilder b(Alphabet::countably_infinite(), 2);
  b.set_default(0, 0).set_transition(0, 0, 1).set_default(1, 0).set_accepting(1);
  const auto c = induce_chain(b.build(), BernoulliDistribution::geometric(0.5));
  CHECK(c.P(0, 1) == doctest::Approx(0.5));
  CHECK(c.P(0, 0) == doctest::Approx(0.5));
  CHECK(c.P(1, 0) == doctest::Approx(1.0));
  CHECK(c.pi(1) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("reducible chains report no stationary data") {
  DfaBuilder b(kBinary, 2);
  b.set_default(0, 1).set_default(1, 1).set_accepting(1);
  const auto c = induce_chain(b.build(), kHalf);
  CHECK_FALSE(c.irreducible);
  CHECK(c.pi.size() == 0);
  CHECK_FALSE(c.c.has_value());
}

TEST_CASE("ergodic prediction on random selectors") {
  std::mt19937_64 gen(101);
  const auto p = BernoulliDistribution::explicit_weights({0.25, 0.75});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto table = testing::random_sc_table(gen, 2 + gen() % 6, 2);
    table.accepting[gen() % table.accepting.size()] = true;
    BernoulliSource src(p, seed);
    const auto r = predict_and_compare(testing::to_dfa(table), p, src, 1'000'000);
    CHECK(r.rate_error < 0.01);
    CHECK(r.max_visit_error < 0.01);
    CHECK(r.within);
  }
}

TEST_CASE("prediction examples") {
  BernoulliSource src(kHalf, 5);
  const auto r = predict_and_compare(compile_postnikova_kmp({0, 0}, kBinary), kHalf, src, 100'000);
  CHECK(r.effective_length == r.input_length);
  CHECK(r.empirical_rate == doctest::Approx(0.25).epsilon(0.05));
  CHECK(r.tolerance == doctest::Approx(5 * std::sqrt(0.25 / 100'000.0)));
  CHECK(r.within);

  // A transient start state is left out of the comparison.
  DfaBuilder b(kBinary, 3);
  b.set_default(0, 1).set_default(1, 2).set_default(2, 1).set_accepting(1);
  BernoulliSource src2(kHalf, 6);
  const auto t = predict_and_compare(b.build(), kHalf, src2, 10'000);
  CHECK(t.states.size() == 2);
  CHECK(t.effective_length == 9'999);
  CHECK(t.empirical_rate == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(t.within);
}
