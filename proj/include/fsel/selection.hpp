#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fsel/automata.hpp"
#include "fsel/sequences.hpp"

namespace fsel {

/// Result of running a selector over an input prefix. Positions are 1-based.
struct SelectionTrace {
  std::uint64_t input_length = 0;
  std::uint64_t selected_count = 0;
  /// Empty unless recording was requested.
  Word selected;
  std::vector<std::uint64_t> selected_positions;
  /// Number of reads performed from each state (the state before the read);
  /// sums to input_length.
  std::vector<std::uint64_t> state_visit_counts;
  /// First position whose before-state lies in a recurrent component.
  std::optional<std::uint64_t> entered_recurrent_at;
  /// The state in which that happened.
  std::optional<StateId> entered_recurrent_state;
};

struct SelectOptions {
  bool record_selected = true;
  bool record_positions = true;
};

/// Called for every selected symbol with its 1-based input position.
using SelectionSink = std::function<void(Symbol symbol, std::uint64_t position)>;

/// Streaming selection: symbol i is selected iff the state reached after the
/// first i-1 symbols is accepting. Holds O(|Q|) state; the automaton must
/// outlive the engine.
class SelectionEngine {
public:
  explicit SelectionEngine(const Dfa& dfa);

  /// Consumes one input symbol; true when it is selected.
  bool feed(Symbol a);

  StateId state() const noexcept { return state_; }
  std::uint64_t consumed() const noexcept { return consumed_; }
  std::uint64_t selected_count() const noexcept { return selected_; }
  const std::vector<std::uint64_t>& visit_counts() const noexcept { return visits_; }
  std::optional<std::uint64_t> entered_recurrent_at() const noexcept { return entered_at_; }
  std::optional<StateId> entered_recurrent_state() const noexcept { return entered_state_; }
  const SccAnalysis& scc() const noexcept { return scc_; }

private:
  const Dfa* dfa_;
  SccAnalysis scc_;
  StateId state_;
  std::uint64_t consumed_ = 0;
  std::uint64_t selected_ = 0;
  std::vector<std::uint64_t> visits_;
  std::optional<std::uint64_t> entered_at_;
  std::optional<StateId> entered_state_;
};

/// Resets src and selects from its first n symbols.
SelectionTrace select(const Dfa& dfa, SequenceSource& src, std::uint64_t n, const SelectOptions& options = {},
                      const SelectionSink& sink = {});

/// A[w] for a finite input.
Word select_word(const Dfa& dfa, WordView input);
/// A_q[w]: the same selector started in q.
Word select_word_from(const Dfa& dfa, StateId q, WordView input);

/// Reference Postnikova selection by suffix test: position i is selected iff
/// input[1..i-1] ends with w.
Word select_postnikova_oracle(WordView w, WordView input);

}  // namespace fsel
