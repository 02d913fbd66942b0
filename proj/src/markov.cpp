#include "fsel/markov.hpp"

#include <cmath>

#include "fsel/selection.hpp"

namespace fsel {

namespace {

constexpr double kSolveResidual = 1e-12;
constexpr double kPowerTolerance = 1e-13;
constexpr int kPowerIterations = 10'000'000;

}  // namespace

double InducedChain::selection_constant() const {
  if (!c) throw ValidationError("c is undefined: no accepting state or no stationary distribution");
  return *c;
}

InducedChain induce_chain(const Dfa& dfa, const BernoulliDistribution& p) {
  if (!(dfa.alphabet() == p.alphabet())) throw AlphabetMismatch("distribution and selector alphabets differ");
  const auto n = static_cast<Eigen::Index>(dfa.state_count());
  InducedChain chain;
  chain.P = Eigen::MatrixXd::Zero(n, n);
  const Alphabet& alphabet = dfa.alphabet();

  for (StateId q = 0; q < dfa.state_count(); ++q) {
    const StateRow& row = dfa.row(q);
    double exception_mass = 0.0;
    for (const Transition& t : row.exceptions) {
      const double pa = p.prob(t.symbol);
      chain.P(q, t.target) += pa;
      exception_mass += pa;
    }
    double rest = 0.0;
    if (alphabet.is_finite()) {
      std::size_t next = 0;
      for (Symbol a = 0; a < alphabet.size(); ++a) {
        if (next < row.exceptions.size() && row.exceptions[next].symbol == a) {
          ++next;
          continue;
        }
        rest += p.prob(a);
      }
    } else {
      rest = std::max(0.0, 1.0 - exception_mass);
    }
    chain.P(q, row.default_target) += rest;
  }

  std::vector<std::vector<StateId>> support(dfa.state_count());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (chain.P(i, j) > 0.0) support[i].push_back(static_cast<StateId>(j));
    }
  }
  chain.irreducible = analyze_graph(support).strongly_connected();
  if (!chain.irreducible) return chain;

  chain.pi = stationary(chain.P);
  for (Eigen::Index i = 0; i < n; ++i) chain.expected_return_times.push_back(1.0 / chain.pi(i));
  for (StateId q : dfa.accepting_states()) {
    chain.predicted_selection_rate += chain.pi(q);
    chain.c = chain.c ? std::min(*chain.c, chain.pi(q)) : chain.pi(q);
  }
  return chain;
}

double stationary_residual(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  return (P.transpose() * pi - pi).lpNorm<1>();
}

Eigen::VectorXd stationary(const Eigen::MatrixXd& P) {
  const Eigen::Index n = P.rows();
  if (n == 0 || P.cols() != n) throw ValidationError("transition matrix must be square and non-empty");
  std::vector<std::vector<StateId>> support(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (P(i, j) < 0.0) throw ValidationError("transition matrix has a negative entry");
      if (P(i, j) > 0.0) support[i].push_back(static_cast<StateId>(j));
      sum += P(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-10) throw ValidationError("row " + std::to_string(i) + " does not sum to 1");
  }
  if (!analyze_graph(support).strongly_connected()) {
    throw NotIrreducible("chain has more than one communicating class");
  }

  // (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
  if (pi.allFinite() && pi.minCoeff() >= 0.0) {
    pi /= pi.sum();
    if (stationary_residual(P, pi) < kSolveResidual) return pi;
  }

  // Lazy chain (I + P) / 2 has the same stationary vector and is aperiodic.
  const Eigen::MatrixXd lazy = 0.5 * (Eigen::MatrixXd::Identity(n, n) + P);
  pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < kPowerIterations; ++it) {
    Eigen::VectorXd next = lazy.transpose() * pi;
    next /= next.sum();
    const double step = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (step < kPowerTolerance) break;
  }
  return pi;
}

PredictionReport predict_and_compare(const Dfa& dfa, const BernoulliDistribution& p, SequenceSource& src,
                                     std::uint64_t n) {
  if (n == 0) throw ValidationError("prediction needs a non-empty input");
  SelectOptions options;
  options.record_selected = false;
  options.record_positions = false;
  const SelectionTrace trace = select(dfa, src, n, options);
  if (!trace.entered_recurrent_at) throw ValidationError("run never reached a recurrent component");

  const SccAnalysis scc = scc_analyze(dfa);
  const StateId entry = *trace.entered_recurrent_state;
  const std::uint32_t comp = scc.component_of[entry];

  PredictionReport r;
  r.input_length = n;
  r.effective_length = n - (*trace.entered_recurrent_at - 1);
  r.states = scc.members[comp];
  const Dfa restricted = scc.strongly_connected() ? dfa : restrict_to_component(dfa, scc, comp, entry);
  r.chain = induce_chain(restricted, p);
  if (!r.chain.irreducible) {
    throw NotIrreducible("induced chain on the recurrent component is reducible; some atom of p is zero");
  }

  const double len = static_cast<double>(r.effective_length);
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    const std::uint64_t visits = trace.state_visit_counts[r.states[i]];
    if (dfa.is_accepting(r.states[i])) r.selected_count += visits;
    const double frac = static_cast<double>(visits) / len;
    r.empirical_visits.push_back(frac);
    r.max_visit_error = std::max(r.max_visit_error, std::abs(frac - r.chain.pi(static_cast<Eigen::Index>(i))));
  }
  r.empirical_rate = static_cast<double>(r.selected_count) / len;
  r.rate_error = std::abs(r.empirical_rate - r.chain.predicted_selection_rate);
  r.max_error = std::max(r.rate_error, r.max_visit_error);
  r.tolerance = 5.0 * std::sqrt(0.25 / len);
  r.within = r.max_error <= r.tolerance;
  return r;
}

}  // namespace fsel
