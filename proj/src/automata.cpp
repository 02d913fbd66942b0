#include "fsel/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <unordered_map>

namespace fsel {

namespace {

constexpr std::uint32_t kUnvisited = UINT32_MAX;

Word distinct_symbols(const Word& w) {
  Word s(w);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Dfa

Dfa::Dfa(Alphabet alphabet, StateId start, std::vector<bool> accepting, std::vector<StateRow> rows)
    : alphabet_(alphabet), start_(start), accepting_(std::move(accepting)), rows_(std::move(rows)) {
  const std::size_t n = rows_.size();
  if (n == 0) throw ValidationError("DFA needs at least one state");
  if (n > UINT32_MAX - 1) throw ValidationError("too many states");
  if (start_ >= n) throw ValidationError("start state " + std::to_string(start_) + " out of range");
  if (accepting_.size() != n) throw ValidationError("accepting mask size does not match state count");
  for (std::size_t q = 0; q < n; ++q) {
    const StateRow& r = rows_[q];
    const std::string where = "state " + std::to_string(q) + ": ";
    if (r.default_target >= n) throw ValidationError(where + "default target out of range");
    for (std::size_t i = 0; i < r.exceptions.size(); ++i) {
      const Transition& t = r.exceptions[i];
      if (!alphabet_.contains(t.symbol)) {
        throw ValidationError(where + "exception symbol " + std::to_string(t.symbol) + " outside alphabet");
      }
      if (t.target >= n) throw ValidationError(where + "exception target out of range");
      if (t.target == r.default_target) {
        throw ValidationError(where + "exception on symbol " + std::to_string(t.symbol) + " repeats the default");
      }
      if (i > 0 && r.exceptions[i - 1].symbol >= t.symbol) {
        throw ValidationError(where + "exceptions must be strictly increasing by symbol");
      }
    }
    if (alphabet_.is_finite() && r.exceptions.size() >= alphabet_.size()) {
      throw ValidationError(where + "default edge is unused; every symbol carries an exception");
    }
  }
}

std::vector<StateId> Dfa::accepting_states() const {
  std::vector<StateId> out;
  for (StateId q = 0; q < accepting_.size(); ++q) {
    if (accepting_[q]) out.push_back(q);
  }
  return out;
}

bool Dfa::has_accepting() const noexcept {
  return std::find(accepting_.begin(), accepting_.end(), true) != accepting_.end();
}

StateId Dfa::lookup(const StateRow& r, Symbol a) noexcept {
  const auto it = std::lower_bound(r.exceptions.begin(), r.exceptions.end(), a,
                                   [](const Transition& t, Symbol s) { return t.symbol < s; });
  if (it != r.exceptions.end() && it->symbol == a) return it->target;
  return r.default_target;
}

StateId Dfa::step(StateId q, Symbol a) const {
  if (q >= rows_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  alphabet_.check(a);
  return step_unchecked(q, a);
}

StateId Dfa::run_from(StateId q, WordView w) const {
  if (q >= rows_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  alphabet_.check(w);
  for (Symbol a : w) q = step_unchecked(q, a);
  return q;
}

Symbol Dfa::default_symbol(StateId q) const {
  Symbol s = 0;
  for (const Transition& t : row(q).exceptions) {
    if (t.symbol != s) break;
    ++s;
  }
  return s;
}

std::vector<Transition> Dfa::labelled_edges(StateId q) const {
  const StateRow& r = row(q);
  std::vector<Transition> edges(r.exceptions);
  const Transition def{default_symbol(q), r.default_target};
  edges.insert(std::lower_bound(edges.begin(), edges.end(), def,
                                [](const Transition& x, const Transition& y) { return x.symbol < y.symbol; }),
               def);
  return edges;
}

Dfa Dfa::with_start(StateId q) const {
  if (q >= rows_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  return Dfa(alphabet_, q, accepting_, rows_);
}

// ---------------------------------------------------------------------------
// DfaBuilder

DfaBuilder::DfaBuilder(Alphabet alphabet, std::size_t state_count)
    : alphabet_(alphabet), accepting_(state_count, false), defaults_(state_count, 0), exceptions_(state_count) {
  if (state_count == 0) throw ValidationError("DFA needs at least one state");
}

DfaBuilder& DfaBuilder::set_start(StateId q) {
  if (q >= defaults_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  start_ = q;
  return *this;
}

DfaBuilder& DfaBuilder::set_accepting(StateId q, bool accepting) {
  if (q >= accepting_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  accepting_[q] = accepting;
  return *this;
}

DfaBuilder& DfaBuilder::set_default(StateId q, StateId target) {
  if (q >= defaults_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  if (target >= defaults_.size()) throw InvalidState("state " + std::to_string(target) + " out of range");
  defaults_[q] = target;
  return *this;
}

DfaBuilder& DfaBuilder::set_transition(StateId q, Symbol a, StateId target) {
  alphabet_.check(a);
  if (q >= exceptions_.size()) throw InvalidState("state " + std::to_string(q) + " out of range");
  if (target >= defaults_.size()) throw InvalidState("state " + std::to_string(target) + " out of range");
  auto& ex = exceptions_[q];
  const auto it = std::find_if(ex.begin(), ex.end(), [a](const Transition& t) { return t.symbol == a; });
  if (it != ex.end()) {
    it->target = target;
  } else {
    ex.push_back({a, target});
  }
  return *this;
}

Dfa DfaBuilder::build() const {
  std::vector<StateRow> rows(defaults_.size());
  for (std::size_t q = 0; q < rows.size(); ++q) {
    std::vector<Transition> ex = exceptions_[q];
    std::sort(ex.begin(), ex.end(), [](const Transition& x, const Transition& y) { return x.symbol < y.symbol; });
    StateId def = defaults_[q];
    if (alphabet_.is_finite() && ex.size() == alphabet_.size()) {
      std::map<StateId, std::size_t> freq;
      for (const Transition& t : ex) ++freq[t.target];
      def = std::max_element(freq.begin(), freq.end(), [](const auto& x, const auto& y) { return x.second < y.second; })
                ->first;
    }
    rows[q].default_target = def;
    for (const Transition& t : ex) {
      if (t.target != def) rows[q].exceptions.push_back(t);
    }
  }
  return Dfa(alphabet_, start_, accepting_, std::move(rows));
}

Dfa make_accept_all(Alphabet alphabet) {
  return DfaBuilder(alphabet, 1).set_accepting(0).build();
}

Dfa make_parity_selector(Alphabet alphabet, Symbol flip, bool accept_even) {
  DfaBuilder b(alphabet, 2);
  b.set_default(0, 0).set_default(1, 1);
  b.set_transition(0, flip, 1).set_transition(1, flip, 0);
  b.set_accepting(accept_even ? 0 : 1);
  return b.build();
}

Dfa make_even_position_selector(Alphabet alphabet) {
  DfaBuilder b(alphabet, 2);
  b.set_default(0, 1).set_default(1, 0).set_accepting(1);
  return b.build();
}

// ---------------------------------------------------------------------------
// SCC analysis

SccAnalysis analyze_graph(const std::vector<std::vector<StateId>>& adjacency) {
  const std::size_t n = adjacency.size();
  std::vector<std::uint32_t> index(n, kUnvisited);
  std::vector<std::uint32_t> low(n, 0);
  std::vector<std::uint32_t> raw_component(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<StateId> stack;
  std::uint32_t next_index = 0;
  std::uint32_t raw_count = 0;

  struct Frame {
    StateId v;
    std::size_t edge;
  };
  std::vector<Frame> call;

  for (StateId root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& out = adjacency[f.v];
      if (f.edge < out.size()) {
        const StateId w = out[f.edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const StateId v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        StateId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          raw_component[w] = raw_count;
        } while (w != v);
        ++raw_count;
      }
    }
  }

  // Renumber by smallest member: scanning states in order meets each
  // component first at its smallest state.
  std::vector<std::uint32_t> renumber(raw_count, kUnvisited);
  SccAnalysis out;
  out.component_of.resize(n);
  std::uint32_t count = 0;
  for (StateId q = 0; q < n; ++q) {
    auto& id = renumber[raw_component[q]];
    if (id == kUnvisited) {
      id = count++;
      out.members.emplace_back();
    }
    out.component_of[q] = id;
    out.members[id].push_back(q);
  }

  out.successors.assign(count, {});
  out.recurrent.assign(count, true);
  for (StateId q = 0; q < n; ++q) {
    const std::uint32_t c = out.component_of[q];
    for (StateId t : adjacency[q]) {
      const std::uint32_t d = out.component_of[t];
      if (d != c) {
        out.successors[c].push_back(d);
        out.recurrent[c] = false;
      }
    }
  }
  std::vector<std::size_t> indegree(count, 0);
  for (auto& succ : out.successors) {
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    for (std::uint32_t d : succ) ++indegree[d];
  }
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
  for (std::uint32_t c = 0; c < count; ++c) {
    if (indegree[c] == 0) ready.push(c);
  }
  while (!ready.empty()) {
    const std::uint32_t c = ready.top();
    ready.pop();
    out.topological_order.push_back(c);
    for (std::uint32_t d : out.successors[c]) {
      if (--indegree[d] == 0) ready.push(d);
    }
  }
  return out;
}

SccAnalysis scc_analyze(const Dfa& dfa, std::span<const Symbol> probe_symbols) {
  std::vector<Symbol> probes(probe_symbols.begin(), probe_symbols.end());
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());

  std::vector<std::vector<StateId>> adjacency(dfa.state_count());
  for (StateId q = 0; q < dfa.state_count(); ++q) {
    const StateRow& r = dfa.row(q);
    for (const Transition& t : r.exceptions) {
      if (!std::binary_search(probes.begin(), probes.end(), t.symbol)) {
        throw IncompleteProbeSet("exception symbol " + std::to_string(t.symbol) + " of state " + std::to_string(q) +
                                 " is not in the probe set");
      }
    }
    adjacency[q].push_back(r.default_target);
    for (Symbol a : probes) {
      if (dfa.alphabet().contains(a)) adjacency[q].push_back(dfa.step_unchecked(q, a));
    }
  }
  return analyze_graph(adjacency);
}

SccAnalysis scc_analyze(const Dfa& dfa) {
  std::vector<Symbol> probes;
  for (const StateRow& r : dfa.rows()) {
    for (const Transition& t : r.exceptions) probes.push_back(t.symbol);
  }
  return scc_analyze(dfa, probes);
}

Word synchronizing_word_to_recurrent(const Dfa& dfa) {
  const SccAnalysis scc = scc_analyze(dfa);
  const std::size_t n = dfa.state_count();
  Word u;
  std::vector<StateId> parent(n);
  std::vector<Symbol> via(n);
  std::vector<bool> seen(n);

  for (StateId q = 0; q < n; ++q) {
    const StateId from = dfa.run_from(q, u);
    if (scc.in_recurrent(from)) continue;

    std::fill(seen.begin(), seen.end(), false);
    std::deque<StateId> queue{from};
    seen[from] = true;
    StateId hit = from;
    bool found = false;
    while (!queue.empty() && !found) {
      const StateId v = queue.front();
      queue.pop_front();
      for (const Transition& e : dfa.labelled_edges(v)) {
        if (seen[e.target]) continue;
        seen[e.target] = true;
        parent[e.target] = v;
        via[e.target] = e.symbol;
        if (scc.in_recurrent(e.target)) {
          hit = e.target;
          found = true;
          break;
        }
        queue.push_back(e.target);
      }
    }
    // A minimal component is always reachable in a finite graph.
    Word path;
    for (StateId v = hit; v != from; v = parent[v]) path.push_back(via[v]);
    u.insert(u.end(), path.rbegin(), path.rend());
  }
  return u;
}

Dfa restrict_to_reachable(const Dfa& dfa) {
  std::vector<StateId> id(dfa.state_count(), kUnvisited);
  std::vector<StateId> order{dfa.start()};
  id[dfa.start()] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (const Transition& e : dfa.labelled_edges(order[i])) {
      if (id[e.target] == kUnvisited) {
        id[e.target] = static_cast<StateId>(order.size());
        order.push_back(e.target);
      }
    }
  }
  std::vector<StateRow> rows(order.size());
  std::vector<bool> accepting(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const StateRow& r = dfa.row(order[i]);
    rows[i].default_target = id[r.default_target];
    for (const Transition& t : r.exceptions) rows[i].exceptions.push_back({t.symbol, id[t.target]});
    accepting[i] = dfa.is_accepting(order[i]);
  }
  return Dfa(dfa.alphabet(), 0, std::move(accepting), std::move(rows));
}

Dfa minimize(const Dfa& dfa) {
  const Dfa d = restrict_to_reachable(dfa);
  const std::size_t n = d.state_count();

  // Symbols outside every exception list all follow the defaults, so one
  // representative of them plus the exception symbols decide every state.
  std::vector<Symbol> probes;
  for (const StateRow& r : d.rows())
    for (const Transition& t : r.exceptions) probes.push_back(t.symbol);
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  std::optional<Symbol> other;
  Symbol gap = 0;
  for (Symbol a : probes) {
    if (a != gap) break;
    ++gap;
  }
  if (d.alphabet().contains(gap)) other = gap;
  if (other) probes.push_back(*other);

  // Moore refinement until the class count stops growing.
  std::vector<StateId> cls(n);
  for (std::size_t q = 0; q < n; ++q) cls[q] = d.is_accepting(static_cast<StateId>(q)) ? 1 : 0;
  std::size_t classes = 0;
  for (;;) {
    std::map<std::vector<StateId>, StateId> ids;
    std::vector<StateId> next(n);
    std::vector<StateId> sig;
    for (std::size_t q = 0; q < n; ++q) {
      sig.assign(1, cls[q]);
      for (Symbol a : probes) sig.push_back(cls[d.step_unchecked(static_cast<StateId>(q), a)]);
      next[q] = ids.emplace(sig, static_cast<StateId>(ids.size())).first->second;
    }
    cls = std::move(next);
    if (ids.size() == classes) break;
    classes = ids.size();
  }

  // Classes are numbered by first appearance in BFS order, so the start is 0.
  std::vector<StateId> rep(classes, kUnvisited);
  for (std::size_t q = 0; q < n; ++q)
    if (rep[cls[q]] == kUnvisited) rep[cls[q]] = static_cast<StateId>(q);
  DfaBuilder b(d.alphabet(), classes);
  b.set_start(cls[d.start()]);
  for (StateId c = 0; c < classes; ++c) {
    const StateId q = rep[c];
    b.set_accepting(c, d.is_accepting(q));
    b.set_default(c, cls[d.row(q).default_target]);
    for (Symbol a : probes) b.set_transition(c, a, cls[d.step_unchecked(q, a)]);
  }
  return b.build();
}

Dfa restrict_to_component(const Dfa& dfa, const SccAnalysis& scc, std::uint32_t component, StateId start) {
  if (component >= scc.component_count()) throw ValidationError("component index out of range");
  if (!scc.recurrent[component]) throw ValidationError("only recurrent components are closed under transitions");
  const auto& members = scc.members[component];
  std::vector<StateId> id(dfa.state_count(), kUnvisited);
  for (std::size_t i = 0; i < members.size(); ++i) id[members[i]] = static_cast<StateId>(i);
  if (start >= dfa.state_count() || id[start] == kUnvisited) throw InvalidState("start state not in component");

  std::vector<StateRow> rows(members.size());
  std::vector<bool> accepting(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    const StateRow& r = dfa.row(members[i]);
    rows[i].default_target = id[r.default_target];
    for (const Transition& t : r.exceptions) rows[i].exceptions.push_back({t.symbol, id[t.target]});
    accepting[i] = dfa.is_accepting(members[i]);
  }
  return Dfa(dfa.alphabet(), id[start], std::move(accepting), std::move(rows));
}

// ---------------------------------------------------------------------------
// Postnikova compilers

Dfa compile_postnikova_paper(const Word& w, Alphabet alphabet) {
  const std::size_t m = w.size();
  if (m == 0) throw EmptyPattern("Postnikova pattern must be non-empty");
  if (m > kMaxBitVectorPattern) {
    throw ValidationError("bit-vector construction limited to patterns of length " +
                          std::to_string(kMaxBitVectorPattern));
  }
  alphabet.check(w);
  const std::size_t n = std::size_t{1} << m;
  const Word symbols = distinct_symbols(w);
  const std::uint64_t accept_bit = std::uint64_t{1} << (m - 1);

  DfaBuilder b(alphabet, n);
  for (std::uint64_t state = 0; state < n; ++state) {
    // Symbols outside w clear every bit.
    b.set_default(static_cast<StateId>(state), 0);
    for (Symbol a : symbols) {
      std::uint64_t next = (a == w[0]) ? 1 : 0;
      for (std::size_t j = 1; j < m; ++j) {
        if (((state >> (j - 1)) & 1U) != 0 && a == w[j]) next |= std::uint64_t{1} << j;
      }
      b.set_transition(static_cast<StateId>(state), a, static_cast<StateId>(next));
    }
    if ((state & accept_bit) != 0) b.set_accepting(static_cast<StateId>(state));
  }
  return b.build();
}

Dfa compile_postnikova_kmp(const Word& w, Alphabet alphabet) {
  const std::size_t m = w.size();
  if (m == 0) throw EmptyPattern("Postnikova pattern must be non-empty");
  alphabet.check(w);

  // fail[j]: longest proper border of w[0..j)
  std::vector<std::size_t> fail(m + 1, 0);
  for (std::size_t j = 2, k = 0; j <= m; ++j) {
    while (k > 0 && w[j - 1] != w[k]) k = fail[k];
    if (w[j - 1] == w[k]) ++k;
    fail[j] = k;
  }

  const Word symbols = distinct_symbols(w);
  std::vector<std::vector<StateId>> delta(m + 1, std::vector<StateId>(symbols.size(), 0));
  for (std::size_t j = 0; j <= m; ++j) {
    for (std::size_t s = 0; s < symbols.size(); ++s) {
      if (j < m && symbols[s] == w[j]) {
        delta[j][s] = static_cast<StateId>(j + 1);
      } else if (j > 0) {
        delta[j][s] = delta[fail[j]][s];
      }
    }
  }

  DfaBuilder b(alphabet, m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    b.set_default(static_cast<StateId>(j), 0);
    for (std::size_t s = 0; s < symbols.size(); ++s) b.set_transition(static_cast<StateId>(j), symbols[s], delta[j][s]);
  }
  b.set_accepting(static_cast<StateId>(m));
  return b.build();
}

// ---------------------------------------------------------------------------
// Composition

Dfa compose(const Dfa& a, const Dfa& b) {
  if (!(a.alphabet() == b.alphabet())) {
    throw AlphabetMismatch("cannot compose selectors over " + a.alphabet().to_string() + " and " +
                           b.alphabet().to_string());
  }
  const Alphabet& alphabet = a.alphabet();
  const std::uint64_t nb = b.state_count();
  std::unordered_map<std::uint64_t, StateId> ids;
  std::vector<std::pair<StateId, StateId>> order;

  auto intern = [&](StateId qa, StateId qb) {
    const std::uint64_t key = qa * nb + qb;
    const auto [it, inserted] = ids.try_emplace(key, static_cast<StateId>(order.size()));
    if (inserted) order.emplace_back(qa, qb);
    return it->second;
  };

  struct PendingRow {
    StateId default_target;
    std::vector<Transition> exceptions;
  };
  std::vector<PendingRow> rows;

  intern(a.start(), b.start());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [qa, qb] = order[i];
    const bool moves_b = a.is_accepting(qa);

    Word symbols;
    for (const Transition& t : a.row(qa).exceptions) symbols.push_back(t.symbol);
    if (moves_b) {
      for (const Transition& t : b.row(qb).exceptions) symbols.push_back(t.symbol);
    }
    std::sort(symbols.begin(), symbols.end());
    symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());

    PendingRow row;
    for (Symbol s : symbols) {
      const StateId ta = a.step_unchecked(qa, s);
      const StateId tb = moves_b ? b.step_unchecked(qb, s) : qb;
      row.exceptions.push_back({s, intern(ta, tb)});
    }
    const bool default_live = !alphabet.is_finite() || symbols.size() < alphabet.size();
    if (default_live) {
      row.default_target = intern(a.row(qa).default_target, moves_b ? b.row(qb).default_target : qb);
    } else {
      row.default_target = row.exceptions.front().target;
    }
    rows.push_back(std::move(row));
  }

  DfaBuilder builder(alphabet, order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto q = static_cast<StateId>(i);
    builder.set_default(q, rows[i].default_target);
    for (const Transition& t : rows[i].exceptions) builder.set_transition(q, t.symbol, t.target);
    builder.set_accepting(q, a.is_accepting(order[i].first) && b.is_accepting(order[i].second));
  }
  return builder.build();
}

}  // namespace fsel
