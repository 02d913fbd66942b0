#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fsel/core.hpp"

using namespace fsel;

namespace {

const double kBasel = 6.0 / (std::numbers::pi * std::numbers::pi);

ProbabilityMap markov_table() {
  return ProbabilityMap::tabular(2, 2,
                                 {{{0}, 0.7}, {{1}, 0.3}, {{0, 0}, 0.5}, {{0, 1}, 0.2}, {{1, 0}, 0.2}, {{1, 1}, 0.1}});
}

}  // namespace

TEST_CASE("alphabet membership") {
  const auto a = Alphabet::finite(3);
  CHECK(a.contains(2));
  CHECK_FALSE(a.contains(3));
  CHECK_THROWS_AS(a.check(Symbol{3}), InvalidSymbol);
  CHECK_THROWS_AS(Alphabet::finite(0), ValidationError);
  const auto inf = Alphabet::countably_infinite();
  CHECK_FALSE(inf.is_finite());
  CHECK(inf.contains(~Symbol{0}));
  CHECK_FALSE(a == inf);
}

TEST_CASE("word text round trip") {
  CHECK(format_word(Word{0, 1, 1}) == "0.1.1");
  CHECK(format_word(Word{}) == "<empty>");
  CHECK(parse_word("12.0.3") == Word{12, 0, 3});
  CHECK(parse_word("<empty>").empty());
  CHECK_THROWS_AS(parse_word("1..2"), ValidationError);
  CHECK_THROWS_AS(parse_word("x"), ValidationError);
}

TEST_CASE("for_each_word enumerates k^n words lexicographically") {
  std::vector<Word> seen;
  for_each_word(3, 2, [&](WordView w) { seen.emplace_back(w.begin(), w.end()); });
  REQUIRE(seen.size() == 9);
  CHECK(seen.front() == Word{0, 0});
  CHECK(seen[1] == Word{0, 1});
  CHECK(seen.back() == Word{2, 2});
  CHECK(std::is_sorted(seen.begin(), seen.end()));
  int empty_calls = 0;
  for_each_word(5, 0, [&](WordView w) {
    CHECK(w.empty());
    ++empty_calls;
  });
  CHECK(empty_calls == 1);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(BernoulliDistribution::explicit_weights({0.5, 0.6}), ValidationError);
  CHECK_THROWS_AS(BernoulliDistribution::explicit_weights({-0.1, 1.1}), ValidationError);
  CHECK_THROWS_AS(BernoulliDistribution::explicit_weights({}), ValidationError);
  CHECK_THROWS_AS(BernoulliDistribution::geometric(1.0), ValidationError);
  CHECK_THROWS_AS(BernoulliDistribution::geometric(0.0), ValidationError);
  const auto p = BernoulliDistribution::explicit_weights({0.5, 0.5, 0.0});
  CHECK_FALSE(p.is_positive());
  CHECK(p.first_zero_atom() == Symbol{2});
  CHECK(BernoulliDistribution::inverse_square().is_positive());
}

TEST_CASE("parametric atoms and tails") {
  const auto g = BernoulliDistribution::geometric(0.25);
  CHECK(g.prob(0) == doctest::Approx(0.75));
  CHECK(g.prob(2) == doctest::Approx(0.75 * 0.0625));
  // geometric tail from cut: ratio^cut
  CHECK(g.tail_bound(3) == doctest::Approx(std::pow(0.25, 3)));

  const auto s = BernoulliDistribution::inverse_square();
  CHECK(s.prob(0) == doctest::Approx(0.607927).epsilon(1e-6));
  CHECK(s.prob(1) == doctest::Approx(kBasel / 4));
  // Direct partial sums against the bound.
  for (Symbol cut : {1u, 10u, 100u}) {
    double head = 0.0;
    for (Symbol a = 0; a < cut; ++a) head += s.prob(a);
    CHECK(1.0 - head <= s.tail_bound(cut) + 1e-15);
  }
}

TEST_CASE("mu examples") {
  const auto half = ProbabilityMap::bernoulli(BernoulliDistribution::explicit_weights({0.5, 0.5}));
  CHECK(half.mu(Word{0, 1, 1, 0}) == 0.0625);
  CHECK(half.mu(Word{}) == 1.0);
  const auto two = ProbabilityMap::period_two();
  CHECK(two.mu(Word{0, 1, 0, 1}) == 0.5);
  CHECK(two.mu(Word{0, 0, 1, 1}) == 0.0);
  CHECK(two.mu(Word{}) == 1.0);
  const auto sq = ProbabilityMap::bernoulli(BernoulliDistribution::inverse_square());
  CHECK(sq.mu(Word{0}) == doctest::Approx(kBasel));
  CHECK_THROWS_AS(half.mu(Word{2}), InvalidSymbol);
  CHECK_THROWS_AS(markov_table().mu(Word{0, 0, 0}), WordTooLong);
  CHECK(markov_table().mu(Word{}) == 1.0);
}

TEST_CASE("tabular map validation") {
  CHECK_THROWS_AS(ProbabilityMap::tabular(2, 1, {{{0}, 0.7}, {{1}, 0.2}}), ValidationError);
  CHECK_THROWS_AS(ProbabilityMap::tabular(2, 1, {{{0}, 0.5}, {{1}, 0.5}, {{0, 1}, 1.0}}), ValidationError);
  CHECK_THROWS_AS(ProbabilityMap::tabular(2, 1, {{{2}, 1.0}}), InvalidSymbol);
  // Missing entries count as zero.
  const auto m = ProbabilityMap::tabular(2, 1, {{{0}, 1.0}});
  CHECK(m.mu(Word{1}) == 0.0);
}

TEST_CASE("every length of a finite map sums to one") {
  const auto p = ProbabilityMap::bernoulli(BernoulliDistribution::explicit_weights({0.2, 0.3, 0.5}));
  for (std::size_t n = 1; n <= 5; ++n) {
    double sum = 0.0;
    for_each_word(3, n, [&](WordView w) { sum += p.mu(w); });
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  const auto t = markov_table();
  for (std::size_t n = 1; n <= 2; ++n) {
    double sum = 0.0;
    for_each_word(2, n, [&](WordView w) { sum += t.mu(w); });
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("period-two map has exactly two half-weight words per length") {
  const auto m = ProbabilityMap::period_two();
  for (std::size_t n = 1; n <= 10; ++n) {
    int positive = 0;
    for_each_word(2, n, [&](WordView w) {
      const double v = m.mu(w);
      if (v > 0) {
        CHECK(v == 0.5);
        ++positive;
      }
    });
    CHECK(positive == 2);
  }
}

TEST_CASE("invariance of the three map kinds") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> w(4);
    double sum = 0;
    for (auto& x : w) sum += (x = std::uniform_real_distribution<double>(0.01, 1.0)(gen));
    for (auto& x : w) x /= sum;
    double fix = 1.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) fix -= w[i];
    w.back() = fix;
    const auto r = check_invariance(ProbabilityMap::bernoulli(BernoulliDistribution::explicit_weights(w)), 3, 0);
    CHECK(r.invariant);
    CHECK(r.max_left_residual < 1e-12);
    CHECK(r.max_right_residual < 1e-12);
  }
  const auto two = check_invariance(ProbabilityMap::period_two(), 4, 0);
  CHECK(two.invariant);
  CHECK(two.entries.size() == 1 + 2 + 4 + 8);

  const auto tab = check_invariance(markov_table(), 2, 0);
  CHECK(tab.invariant);
  CHECK(tab.depth_checked == 2);
  // Clamped to the table depth.
  CHECK(check_invariance(markov_table(), 5, 0).depth_checked == 2);

  const auto bad = ProbabilityMap::tabular(2, 2, {{{0}, 0.5}, {{1}, 0.5}, {{0, 0}, 1.0}});
  CHECK_FALSE(check_invariance(bad, 2, 0).invariant);
}

TEST_CASE("invariance on an infinite alphabet carries the tail") {
  const auto g = ProbabilityMap::bernoulli(BernoulliDistribution::geometric(0.5));
  const auto r = check_invariance(g, 3, 30);
  CHECK(r.invariant);
  CHECK(r.tolerance > 1e-6);
  const auto s = check_invariance(ProbabilityMap::bernoulli(BernoulliDistribution::inverse_square()), 2, 200);
  CHECK(s.invariant);
  CHECK(s.max_right_residual > 1e-4);  // the truncation is visible but bounded
}

TEST_CASE("first witness search") {
  const auto b = ProbabilityMap::bernoulli(BernoulliDistribution::explicit_weights({0.3, 0.7}));
  CHECK_FALSE(is_bernoulli_within(b, 4, 1e-9).has_value());
  CHECK_FALSE(
      is_bernoulli_within(ProbabilityMap::bernoulli(BernoulliDistribution::geometric(0.4)), 3, 1e-9, 8).has_value());

  const auto two = is_bernoulli_within(ProbabilityMap::period_two(), 2, 0.1);
  REQUIRE(two);
  CHECK(two->word == Word{0, 0});
  CHECK(two->gap == doctest::Approx(0.25));
  CHECK(two->mu_word == 0.0);
  CHECK(two->mu_product == doctest::Approx(0.25));
  CHECK(two->prefix() == Word{0});
  CHECK(two->last() == 0);

  // All four length-2 gaps equal 0.01 (up to rounding) in this table.
  CHECK_FALSE(is_bernoulli_within(markov_table(), 2, 0.02).has_value());
  const auto tab = is_bernoulli_within(markov_table(), 2, 0.005);
  REQUIRE(tab);
  CHECK(tab->word == Word{0, 0});
  CHECK(tab->gap == doctest::Approx(0.01));
  CHECK_THROWS_AS(is_bernoulli_within(markov_table(), 3, 0.005), WordTooLong);
  CHECK_THROWS_AS(is_bernoulli_within(b, 1, 0.1), ValidationError);
}
