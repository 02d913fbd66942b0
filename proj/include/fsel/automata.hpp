#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fsel/core.hpp"

namespace fsel {

using StateId = std::uint32_t;

struct Transition {
  Symbol symbol;
  StateId target;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Outgoing transitions of one state: a finite exception list plus a default
/// target taken by every other symbol. This is what makes a DFA over an
/// infinite alphabet finitely representable.
struct StateRow {
  StateId default_target = 0;
  std::vector<Transition> exceptions;  // strictly increasing by symbol

  friend bool operator==(const StateRow&, const StateRow&) = default;
};

/// Deterministic automaton with finitely many states over a finite or
/// countably infinite alphabet. Immutable once built.
///
/// Canonical form, enforced by the constructor: exceptions sorted without
/// duplicate symbols, no exception targets the default, and on a finite
/// alphabet at least one symbol is left for the default edge.
class Dfa {
public:
  Dfa(Alphabet alphabet, StateId start, std::vector<bool> accepting, std::vector<StateRow> rows);

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::size_t state_count() const noexcept { return rows_.size(); }
  StateId start() const noexcept { return start_; }
  bool is_accepting(StateId q) const { return accepting_.at(q); }
  const std::vector<bool>& accepting_mask() const noexcept { return accepting_; }
  std::vector<StateId> accepting_states() const;
  bool has_accepting() const noexcept;
  const StateRow& row(StateId q) const { return rows_.at(q); }
  const std::vector<StateRow>& rows() const noexcept { return rows_; }

  /// Throws InvalidState / InvalidSymbol.
  StateId step(StateId q, Symbol a) const;
  /// No validation; for hot loops over trusted input.
  StateId step_unchecked(StateId q, Symbol a) const noexcept {
    const StateRow& r = rows_[q];
    const auto& ex = r.exceptions;
    if (ex.size() <= 8) {
      for (const Transition& t : ex) {
        if (t.symbol == a) return t.target;
        if (t.symbol > a) break;
      }
      return r.default_target;
    }
    return lookup(r, a);
  }

  StateId run(WordView w) const { return run_from(start_, w); }
  StateId run_from(StateId q, WordView w) const;

  /// Smallest symbol routed to the default target of q.
  Symbol default_symbol(StateId q) const;
  /// One labelled edge per exception plus the default edge labelled by
  /// default_symbol(q), sorted by symbol.
  std::vector<Transition> labelled_edges(StateId q) const;

  /// Same automaton started in q.
  Dfa with_start(StateId q) const;

  friend bool operator==(const Dfa&, const Dfa&) = default;

private:
  static StateId lookup(const StateRow& r, Symbol a) noexcept;

  Alphabet alphabet_;
  StateId start_;
  std::vector<bool> accepting_;
  std::vector<StateRow> rows_;
};

/// Mutable staging area that canonicalizes into a Dfa.
class DfaBuilder {
public:
  DfaBuilder(Alphabet alphabet, std::size_t state_count);

  DfaBuilder& set_start(StateId q);
  DfaBuilder& set_accepting(StateId q, bool accepting = true);
  DfaBuilder& set_default(StateId q, StateId target);
  DfaBuilder& set_transition(StateId q, Symbol a, StateId target);

  /// Drops exceptions equal to the default. On a finite alphabet where every
  /// symbol carries an exception, the most frequent target becomes the default.
  Dfa build() const;

private:
  Alphabet alphabet_;
  StateId start_ = 0;
  std::vector<bool> accepting_;
  std::vector<StateId> defaults_;
  std::vector<std::vector<Transition>> exceptions_;
};

// Small selectors used throughout the tests and the CLI.

/// One accepting state; selects every symbol.
Dfa make_accept_all(Alphabet alphabet);
/// Two states tracking the parity of occurrences of `flip`; state 0 is the
/// even state. Accepting = {0} when accept_even, else {1}.
Dfa make_parity_selector(Alphabet alphabet, Symbol flip = 1, bool accept_even = true);
/// Two-state cycle on every symbol; accepting after odd-length prefixes, so
/// it selects positions 2, 4, 6, ...
Dfa make_even_position_selector(Alphabet alphabet);

// ---------------------------------------------------------------------------
// Structure

/// Strongly connected components with deterministic numbering: component ids
/// are ordered by their smallest state.
struct SccAnalysis {
  std::vector<std::uint32_t> component_of;
  std::vector<std::vector<StateId>> members;
  /// No edge leaves the component.
  std::vector<bool> recurrent;
  /// Condensation DAG, sorted and deduplicated.
  std::vector<std::vector<std::uint32_t>> successors;
  /// Components ordered so every edge goes forward.
  std::vector<std::uint32_t> topological_order;

  std::size_t component_count() const noexcept { return members.size(); }
  bool strongly_connected() const noexcept { return members.size() == 1; }
  bool in_recurrent(StateId q) const { return recurrent[component_of.at(q)]; }
};

/// SCCs of an explicit directed multigraph (iterative Tarjan).
SccAnalysis analyze_graph(const std::vector<std::vector<StateId>>& adjacency);

/// Edges are the default edge of every state plus step(q, a) for each probe.
/// Throws IncompleteProbeSet when an exception symbol is not probed.
SccAnalysis scc_analyze(const Dfa& dfa, std::span<const Symbol> probe_symbols);
/// Probes exactly the exception symbols.
SccAnalysis scc_analyze(const Dfa& dfa);

/// A word u with run_from(q, u) in a recurrent component for every state q.
/// Built state by state from shortest, smallest-symbol-first BFS paths.
Word synchronizing_word_to_recurrent(const Dfa& dfa);

/// Keeps the states reachable from the start, renumbered in BFS order.
Dfa restrict_to_reachable(const Dfa& dfa);

/// Smallest automaton with the same accepted prefixes, hence the same
/// selection behavior. Any automaton selecting like dfa maps onto it, so it is
/// strongly connected whenever some equivalent automaton is.
Dfa minimize(const Dfa& dfa);

/// The sub-automaton on a recurrent component, started at `start` (a member).
Dfa restrict_to_component(const Dfa& dfa, const SccAnalysis& scc, std::uint32_t component, StateId start);

// ---------------------------------------------------------------------------
// Postnikova strategies: select exactly the symbols following an occurrence of w.

/// Largest pattern length the 2^m construction will materialize.
inline constexpr std::size_t kMaxBitVectorPattern = 20;

/// 2^m states indexed by bit vectors (bit j-1 holds b_j); start all-zeros,
/// accepting iff b_m = 1; c_1 = [a = w_1], c_j = [b_{j-1} = 1 and a = w_j].
Dfa compile_postnikova_paper(const Word& w, Alphabet alphabet);

/// (m+1)-state failure-function automaton: state = longest suffix of the
/// input that is a prefix of w; accepting = {m}.
Dfa compile_postnikova_kmp(const Word& w, Alphabet alphabet);

/// Product selector with C[w] = B[A[w]]: B is frozen while A is in a
/// non-accepting state and steps together with A otherwise. States unreachable
/// from the start pair are pruned.
Dfa compose(const Dfa& a, const Dfa& b);

}  // namespace fsel
