#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fsel/automata.hpp"
#include "fsel/core.hpp"
#include "fsel/sequences.hpp"

namespace fsel {

/// Markov chain on the states of a DFA driven by i.i.d. symbols from p.
struct InducedChain {
  Eigen::MatrixXd P;
  /// Empty when the chain is not irreducible.
  Eigen::VectorXd pi;
  bool irreducible = false;
  /// min of pi over accepting states; nullopt when there are none or pi is
  /// unavailable.
  std::optional<double> c;
  double predicted_selection_rate = 0.0;
  /// 1 / pi(i).
  std::vector<double> expected_return_times;

  /// Throws ValidationError when c is undefined.
  double selection_constant() const;
};

/// P_ij = sum of p(a) over symbols a with delta(i, a) = j. The default edge
/// gets the complement of the exception atoms, so no infinite enumeration
/// happens. Stationary data are filled in when the chain is irreducible.
InducedChain induce_chain(const Dfa& dfa, const BernoulliDistribution& p);

/// Unique stationary distribution of an irreducible row-stochastic matrix.
/// Throws NotIrreducible.
Eigen::VectorXd stationary(const Eigen::MatrixXd& P);

/// sum_j |(pi P)_j - pi_j|
double stationary_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi);

struct PredictionReport {
  std::uint64_t input_length = 0;
  /// Symbols read inside the recurrent component the run settled in.
  std::uint64_t effective_length = 0;
  /// Original state ids of the chain's states.
  std::vector<StateId> states;
  InducedChain chain;
  std::uint64_t selected_count = 0;
  double empirical_rate = 0.0;
  std::vector<double> empirical_visits;
  double rate_error = 0.0;
  double max_visit_error = 0.0;
  double max_error = 0.0;
  /// 5 sqrt(0.25 / effective_length)
  double tolerance = 0.0;
  bool within = false;
};

/// Runs the selector over the first n symbols of src (which should sample p)
/// and compares selection rate and visit fractions with the chain. A selector
/// that is not strongly connected is judged on the recurrent component the run
/// enters; the transient prefix is left out of both sides.
PredictionReport predict_and_compare(const Dfa& dfa, const BernoulliDistribution& p, SequenceSource& src,
                                     std::uint64_t n);

}  // namespace fsel
