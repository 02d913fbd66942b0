#include "fsel/selection.hpp"

#include <algorithm>

namespace fsel {

SelectionEngine::SelectionEngine(const Dfa& dfa)
    : dfa_(&dfa), scc_(scc_analyze(dfa)), state_(dfa.start()), visits_(dfa.state_count(), 0) {}

bool SelectionEngine::feed(Symbol a) {
  dfa_->alphabet().check(a);
  ++consumed_;
  ++visits_[state_];
  if (!entered_at_ && scc_.in_recurrent(state_)) {
    entered_at_ = consumed_;
    entered_state_ = state_;
  }
  const bool picked = dfa_->is_accepting(state_);
  if (picked) ++selected_;
  state_ = dfa_->step_unchecked(state_, a);
  return picked;
}

SelectionTrace select(const Dfa& dfa, SequenceSource& src, std::uint64_t n, const SelectOptions& options,
                      const SelectionSink& sink) {
  if (!(src.alphabet() == dfa.alphabet())) {
    throw AlphabetMismatch("source alphabet " + src.alphabet().to_string() + " differs from selector alphabet " +
                           dfa.alphabet().to_string());
  }
  src.reset();
  SelectionEngine engine(dfa);
  SelectionTrace trace;
  for (std::uint64_t i = 1; i <= n; ++i) {
    const Symbol a = src.next();
    if (!engine.feed(a)) continue;
    if (options.record_selected) trace.selected.push_back(a);
    if (options.record_positions) trace.selected_positions.push_back(i);
    if (sink) sink(a, i);
  }
  trace.input_length = n;
  trace.selected_count = engine.selected_count();
  trace.state_visit_counts = engine.visit_counts();
  trace.entered_recurrent_at = engine.entered_recurrent_at();
  trace.entered_recurrent_state = engine.entered_recurrent_state();
  return trace;
}

Word select_word_from(const Dfa& dfa, StateId q, WordView input) {
  if (q >= dfa.state_count()) throw InvalidState("state " + std::to_string(q) + " out of range");
  dfa.alphabet().check(input);
  Word out;
  for (Symbol a : input) {
    if (dfa.is_accepting(q)) out.push_back(a);
    q = dfa.step_unchecked(q, a);
  }
  return out;
}

Word select_word(const Dfa& dfa, WordView input) { return select_word_from(dfa, dfa.start(), input); }

Word select_postnikova_oracle(WordView w, WordView input) {
  if (w.empty()) throw EmptyPattern("Postnikova pattern must be non-empty");
  Word out;
  for (std::size_t i = w.size(); i < input.size(); ++i) {
    // prefix input[0..i) ends with w
    if (std::equal(w.begin(), w.end(), input.begin() + static_cast<std::ptrdiff_t>(i - w.size()))) {
      out.push_back(input[i]);
    }
  }
  return out;
}

}  // namespace fsel
