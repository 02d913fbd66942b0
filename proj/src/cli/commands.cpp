#include "cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "fsel/markov.hpp"
#include "fsel/rng.hpp"
#include "fsel/selection.hpp"
#include "fsel/stats.hpp"

namespace fsel::cli {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Reports

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Record& Record::set(const std::string& key, const std::string& value) {
  fields.emplace_back(key, value);
  return *this;
}

Record& Record::set(const std::string& key, double value) { return set(key, format_double(value)); }

Record& Record::set(const std::string& key, std::uint64_t value) { return set(key, std::to_string(value)); }

Record& Report::add(const std::string& name) {
  records_.push_back(Record{name, {}});
  return records_.back();
}

namespace {

std::string quoted(const std::string& v) {
  const bool plain = !v.empty() && v.find_first_of(" \t\"=\n") == std::string::npos;
  return plain ? v : json(v).dump();
}

bool same_shape(const Record& a, const Record& b) {
  if (a.name != b.name || a.fields.size() != b.fields.size()) return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    if (a.fields[i].first != b.fields[i].first) return false;
  }
  return true;
}

}  // namespace

void Report::write_machine(std::ostream& out) const {
  for (const Record& r : records_) {
    out << "record=" << r.name;
    for (const auto& [k, v] : r.fields) out << ' ' << k << '=' << quoted(v);
    out << '\n';
  }
}

void Report::write_human(std::ostream& out) const {
  std::size_t i = 0;
  while (i < records_.size()) {
    std::size_t j = i + 1;
    while (j < records_.size() && same_shape(records_[i], records_[j])) ++j;
    const Record& first = records_[i];
    out << "[" << first.name << "]\n";
    std::vector<std::size_t> width(first.fields.size());
    for (std::size_t c = 0; c < width.size(); ++c) {
      width[c] = first.fields[c].first.size();
      for (std::size_t r = i; r < j; ++r) width[c] = std::max(width[c], records_[r].fields[c].second.size());
    }
    auto row = [&](const std::function<const std::string&(std::size_t)>& cell) {
      std::string line;
      for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) line += "  ";
        const std::string& s = cell(c);
        line += s;
        if (c + 1 < width.size()) line.append(width[c] - s.size(), ' ');
      }
      out << line << '\n';
    };
    row([&](std::size_t c) -> const std::string& { return first.fields[c].first; });
    for (std::size_t r = i; r < j; ++r) {
      row([&](std::size_t c) -> const std::string& { return records_[r].fields[c].second; });
    }
    out << '\n';
    i = j;
  }
}

// ---------------------------------------------------------------------------
// Commands

namespace {

struct Outcome {
  Report report;
  int code = kExitOk;
};

Record& header(Report& report, const std::string& command, const ExperimentConfig& config) {
  Record& r = report.add("run");
  r.set("command", command).set("rng", std::string(CounterRng::kAlgorithmId));
  r.set("alphabet", config.alphabet.to_string());
  if (config.map) r.set("map", config.map->to_string());
  if (config.source) r.set("source", describe_source(config));
  if (config.selector) r.set("selector", describe_selector(config));
  if (config.length) r.set("length", config.length);
  return r;
}

void write_sequence(const ExperimentConfig& config, const std::optional<std::string>& path, WordView w,
                    std::ostream& fallback) {
  const bool bytes = config.output.sequence_format == "bytes";
  if (!path) {
    bytes ? write_bytes(fallback, w) : write_text(fallback, w);
    return;
  }
  std::ofstream file(*path, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + *path);
  bytes ? write_bytes(file, w) : write_text(file, w);
}

const ProbabilityMap& require_map(const ExperimentConfig& config) {
  if (!config.map) throw ConfigError("this command needs a map");
  return *config.map;
}

const BernoulliDistribution& require_bernoulli(const ExperimentConfig& config) {
  const BernoulliDistribution* p = require_map(config).distribution();
  if (p == nullptr) throw ConfigError("this command needs a Bernoulli map");
  return *p;
}

void chain_records(Report& report, const InducedChain& chain, const std::vector<StateId>& states) {
  for (Eigen::Index i = 0; i < chain.P.rows(); ++i) {
    Record& r = report.add("transition");
    r.set("state", static_cast<std::uint64_t>(states[i]));
    for (Eigen::Index j = 0; j < chain.P.cols(); ++j) r.set("p" + std::to_string(states[j]), chain.P(i, j));
  }
  Record& s = report.add("chain");
  s.set("irreducible", chain.irreducible);
  if (chain.irreducible) {
    s.set("residual", stationary_residual(chain.P, chain.pi));
    s.set("predicted_rate", chain.predicted_selection_rate);
    s.set("c", chain.c ? format_double(*chain.c) : std::string("undefined"));
    for (Eigen::Index i = 0; i < chain.pi.size(); ++i) {
      report.add("stationary")
          .set("state", static_cast<std::uint64_t>(states[i]))
          .set("pi", chain.pi(i))
          .set("return_time", chain.expected_return_times[i]);
    }
  }
}

std::vector<StateId> identity_states(std::size_t n) {
  std::vector<StateId> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<StateId>(i);
  return s;
}

/// Feeds n input symbols through the selector and calls on_checkpoint after
/// each scheduled input length.
void run_checkpointed(const Dfa& dfa, SequenceSource& src, const std::vector<std::uint64_t>& checkpoints,
                      const std::function<void(Symbol)>& on_selected,
                      const std::function<void(std::uint64_t, const SelectionEngine&)>& on_checkpoint) {
  if (!(src.alphabet() == dfa.alphabet())) throw AlphabetMismatch("source and selector alphabets differ");
  src.reset();
  SelectionEngine engine(dfa);
  std::size_t next = 0;
  const std::uint64_t n = checkpoints.back();
  for (std::uint64_t i = 1; i <= n; ++i) {
    const Symbol a = src.next();
    if (engine.feed(a)) on_selected(a);
    while (next < checkpoints.size() && checkpoints[next] == i) {
      on_checkpoint(i, engine);
      ++next;
    }
  }
}

Outcome cmd_generate(const ExperimentConfig& config, const RunOptions& options, std::ostream& out) {
  validate(config, false);
  auto src = make_source(config);
  const Word w = sample_prefix(*src, config.length);
  write_sequence(config, options.out ? options.out : config.output.sequence, w, out);
  Outcome o;
  o.report.add("generated").set("symbols", static_cast<std::uint64_t>(w.size()));
  return o;
}

Outcome cmd_select(const ExperimentConfig& config, const RunOptions&, std::ostream&) {
  validate(config, false);
  const Dfa dfa = make_selector(config);
  auto src = make_source(config);
  SelectOptions opts;
  opts.record_positions = false;
  const SelectionTrace t = select(dfa, *src, config.length, opts);
  Outcome o;
  header(o.report, "select", config);
  Record& r = o.report.add("selection");
  r.set("input_length", t.input_length).set("selected", t.selected_count);
  r.set("rate", static_cast<double>(t.selected_count) / static_cast<double>(t.input_length));
  r.set("entered_recurrent_at", t.entered_recurrent_at ? std::to_string(*t.entered_recurrent_at) : "never");
  for (std::size_t q = 0; q < t.state_visit_counts.size(); ++q) {
    o.report.add("visits").set("state", static_cast<std::uint64_t>(q)).set("count", t.state_visit_counts[q]);
  }
  if (config.output.sequence) write_sequence(config, config.output.sequence, t.selected, std::cout);
  return o;
}

void word_records(Report& report, const FrequencyCounter& counter, const ProbabilityMap* map,
                  std::size_t keep_words) {
  for (std::size_t len = 1; len <= counter.max_len(); ++len) {
    auto words = counter.words_of_length(len);
    if (keep_words > 0 && words.size() > keep_words) {
      std::stable_sort(words.begin(), words.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
      words.resize(keep_words);
    }
    for (const auto& [w, count] : words) {
      Record& r = report.add("word");
      r.set("length", static_cast<std::uint64_t>(len)).set("word", format_word(w)).set("count", count);
      r.set("frequency", counter.frequency(w));
      if (map && (!map->max_depth() || len <= *map->max_depth())) {
        const double mu = map->mu(w);
        r.set("mu", mu).set("deviation", std::abs(counter.frequency(w) - mu));
      }
    }
  }
}

void checkpoint_record(Report& report, const Checkpoint& cp) {
  Record& r = report.add("checkpoint");
  r.set("input_length", cp.input_length).set("sample_length", cp.sample_length);
  for (std::size_t i = 0; i < cp.max_deviation_by_length.size(); ++i) {
    r.set("max_dev_len" + std::to_string(i + 1), cp.max_deviation_by_length[i]);
  }
  r.set("max_deviation", cp.max_deviation).set("worst_word", format_word(cp.worst_word));
  r.set("unobserved_bound", cp.unobserved_mass_bound);
}

Outcome cmd_stats(const ExperimentConfig& config, const RunOptions&, std::ostream&) {
  validate(config, false);
  auto src = make_source(config);
  const Dfa dfa = config.selector ? make_selector(config) : make_accept_all(config.alphabet);
  FrequencyCounter counter(config.max_word_length);
  Outcome o;
  header(o.report, "stats", config).set("max_word_length", static_cast<std::uint64_t>(config.max_word_length));
  const auto checkpoints = resolved_checkpoints(config);
  run_checkpointed(
      dfa, *src, checkpoints, [&](Symbol a) { counter.push(a); },
      [&](std::uint64_t i, const SelectionEngine&) {
        if (config.map) {
          checkpoint_record(o.report, measure_deviations(counter, *config.map, i));
        } else {
          o.report.add("checkpoint").set("input_length", i).set("sample_length", counter.length());
        }
      });
  word_records(o.report, counter, config.map ? &*config.map : nullptr, config.keep_words);
  o.report.add("summary").set("distinct_words", static_cast<std::uint64_t>(counter.distinct())).set(
      "evicted", counter.evicted());
  return o;
}

Outcome cmd_verify_preservation(const ExperimentConfig& config, const RunOptions&, std::ostream&) {
  validate(config, true);
  const BernoulliDistribution& p = require_bernoulli(config);
  if (!p.is_positive()) throw ConfigError("verify-preservation needs a positive Bernoulli map");
  const ProbabilityMap& map = *config.map;
  const Dfa dfa = make_selector(config);
  auto src = make_source(config);
  const double tol = config.tolerance.value_or(0.01);

  Outcome o;
  header(o.report, "verify-preservation", config)
      .set("max_word_length", static_cast<std::uint64_t>(config.max_word_length))
      .set("tolerance", tol);
  FrequencyCounter counter(config.max_word_length);
  Checkpoint last;
  run_checkpointed(
      dfa, *src, resolved_checkpoints(config), [&](Symbol a) { counter.push(a); },
      [&](std::uint64_t i, const SelectionEngine&) {
        last = measure_deviations(counter, map, i);
        checkpoint_record(o.report, last);
      });
  if (config.keep_words > 0) {
    for (const WordDeviation& d : measure_deviations(counter, map, config.length, config.keep_words).words) {
      o.report.add("word")
          .set("word", format_word(d.word))
          .set("count", d.count)
          .set("frequency", d.frequency)
          .set("mu", d.mu)
          .set("deviation", d.deviation);
    }
  }

  Record& v = o.report.add("verdict");
  v.set("selected", counter.length()).set("evicted", counter.evicted());
  if (counter.length() == 0) {
    v.set("result", "empty selection");
    o.code = kExitEmptySelection;
  } else if (last.max_deviation <= tol && !counter.evicted()) {
    v.set("max_deviation", last.max_deviation).set("result", "preserved");
  } else {
    v.set("max_deviation", last.max_deviation).set("result", "deviation above tolerance");
    o.code = kExitVerdictFailed;
  }
  return o;
}

Outcome cmd_break_distribution(const ExperimentConfig& config, const RunOptions&, std::ostream&) {
  validate(config, true);
  const ProbabilityMap& map = require_map(config);
  Outcome o;
  Record& head = header(o.report, "break-distribution", config);

  Word pattern;
  Symbol target = 0;
  std::optional<FirstWitness> witness;
  std::unique_ptr<SequenceSource> src = make_source(config);
  if (const BernoulliDistribution* p = map.distribution()) {
    const auto zero = p->first_zero_atom();
    if (!zero) {
      head.set("pathway", "none");
      o.report.add("verdict").set("result", "no witness");
      o.code = kExitNoWitness;
      return o;
    }
    head.set("pathway", "non-positive");
    pattern = {*zero};
    target = *zero;
    const bool already = config.source->is_object() && config.source->value("kind", "") == "bb_insertion";
    if (!already) src = bb_insertion_stream(std::move(src), *zero, config.alphabet);
  } else {
    std::size_t depth = config.witness.depth;
    if (const auto d = map.max_depth()) depth = std::min(depth, *d);
    witness = is_bernoulli_within(map, depth, config.witness.tolerance, config.witness.symbol_cut);
    if (!witness) {
      head.set("pathway", "none");
      o.report.add("verdict").set("result", "no witness").set("depth", static_cast<std::uint64_t>(depth));
      o.code = kExitNoWitness;
      return o;
    }
    head.set("pathway", "witness");
    pattern = witness->prefix();
    target = witness->last();
    o.report.add("witness")
        .set("word", format_word(witness->word))
        .set("gap", witness->gap)
        .set("mu_word", witness->mu_word)
        .set("mu_product", witness->mu_product);
  }

  const Dfa dfa = compile_postnikova_kmp(pattern, config.alphabet);
  std::vector<CheckpointFrequency> freqs;
  std::uint64_t selected = 0;
  std::uint64_t hits = 0;
  run_checkpointed(
      dfa, *src, resolved_checkpoints(config),
      [&](Symbol a) {
        ++selected;
        hits += a == target ? 1 : 0;
      },
      [&](std::uint64_t i, const SelectionEngine&) {
        freqs.push_back({i, selected, selected ? static_cast<double>(hits) / static_cast<double>(selected) : 0.0});
      });

  GammaReport g;
  if (witness) {
    g = gamma_gap_report(freqs, map, *witness);
  } else {
    // A zero atom b: mu(b) = 0, and the inserted blocks make b follow b in
    // half of the selected positions asymptotically.
    g.prefix = pattern;
    g.target = target;
    g.mu_target = 0.0;
    g.gamma = 0.5;
    g.threshold = 0.25;
    for (const auto& c : freqs) g.deviations.push_back(c.frequency);
    g.final_deviation = g.deviations.back();
    g.broken = freqs.back().selected_length > 0 && g.final_deviation > g.threshold;
  }
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    o.report.add("checkpoint")
        .set("input_length", freqs[i].input_length)
        .set("selected", freqs[i].selected_length)
        .set("frequency", freqs[i].frequency)
        .set("deviation", g.deviations[i]);
  }
  Record& v = o.report.add("verdict");
  v.set("pattern", format_word(g.prefix)).set("target", static_cast<std::uint64_t>(g.target));
  v.set("mu_target", g.mu_target).set("gamma", g.gamma).set("threshold", g.threshold);
  v.set("final_deviation", g.final_deviation);
  if (freqs.back().selected_length == 0) {
    v.set("result", "empty selection");
    o.code = kExitEmptySelection;
  } else if (g.broken) {
    v.set("result", "broken");
  } else {
    v.set("result", "not broken");
    o.code = kExitVerdictFailed;
  }
  return o;
}

Outcome cmd_predict(const ExperimentConfig& config, const RunOptions&, std::ostream&) {
  validate(config, true);
  const BernoulliDistribution& p = require_bernoulli(config);
  const Dfa dfa = make_selector(config);
  if (!dfa.has_accepting()) throw ConfigError("predict needs a selector with an accepting state");
  auto src = make_source(config);
  const PredictionReport r = predict_and_compare(dfa, p, *src, config.length);
  const double tol = config.tolerance.value_or(r.tolerance);

  Outcome o;
  header(o.report, "predict", config).set("tolerance", tol);
  chain_records(o.report, r.chain, r.states);
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    o.report.add("visits")
        .set("state", static_cast<std::uint64_t>(r.states[i]))
        .set("predicted", r.chain.pi(static_cast<Eigen::Index>(i)))
        .set("empirical", r.empirical_visits[i]);
  }
  Record& v = o.report.add("verdict");
  v.set("effective_length", r.effective_length).set("selected", r.selected_count);
  v.set("predicted_rate", r.chain.predicted_selection_rate).set("empirical_rate", r.empirical_rate);
  v.set("rate_error", r.rate_error).set("max_visit_error", r.max_visit_error).set("max_error", r.max_error);
  const bool ok = r.max_error <= tol;
  v.set("result", ok ? "within tolerance" : "outside tolerance");
  o.code = ok ? kExitOk : kExitVerdictFailed;
  return o;
}

std::string join_states(const std::vector<StateId>& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out.empty() ? "-" : out;
}

Outcome cmd_analyze_dfa(const ExperimentConfig& config, const RunOptions&, std::ostream&) {
  if (config.map && !(config.map->alphabet() == config.alphabet)) throw ConfigError("map alphabet differs");
  const Dfa dfa = make_selector(config);
  const SccAnalysis scc = scc_analyze(dfa);
  Outcome o;
  header(o.report, "analyze-dfa", config)
      .set("states", static_cast<std::uint64_t>(dfa.state_count()))
      .set("start", static_cast<std::uint64_t>(dfa.start()))
      .set("accepting", join_states(dfa.accepting_states()))
      .set("strongly_connected", scc.strongly_connected());
  for (std::uint32_t c = 0; c < scc.component_count(); ++c) {
    std::vector<StateId> succ(scc.successors[c].begin(), scc.successors[c].end());
    o.report.add("component")
        .set("id", static_cast<std::uint64_t>(c))
        .set("members", join_states(scc.members[c]))
        .set("recurrent", static_cast<bool>(scc.recurrent[c]))
        .set("successors", join_states(succ));
  }
  const Word sync = synchronizing_word_to_recurrent(dfa);
  o.report.add("synchronizing_word").set("length", static_cast<std::uint64_t>(sync.size())).set("word",
                                                                                                 format_word(sync));
  if (config.map && config.map->distribution()) {
    const BernoulliDistribution& p = *config.map->distribution();
    if (scc.strongly_connected()) {
      chain_records(o.report, induce_chain(dfa, p), identity_states(dfa.state_count()));
    } else {
      for (std::uint32_t c = 0; c < scc.component_count(); ++c) {
        if (!scc.recurrent[c]) continue;
        o.report.add("recurrent_chain").set("component", static_cast<std::uint64_t>(c));
        const Dfa sub = restrict_to_component(dfa, scc, c, scc.members[c].front());
        chain_records(o.report, induce_chain(sub, p), scc.members[c]);
      }
    }
  }
  return o;
}

}  // namespace

int run_command(const std::string& command, ExperimentConfig config, const RunOptions& options, std::ostream& out,
                std::ostream& err) {
  try {
    if (options.format != "machine" && options.format != "human") {
      throw ConfigError("--format must be machine or human");
    }
    if (options.seed) override_seed(config, *options.seed);
    Outcome o;
    if (command == "generate") {
      o = cmd_generate(config, options, out);
      return o.code;
    } else if (command == "select") {
      o = cmd_select(config, options, out);
    } else if (command == "stats") {
      o = cmd_stats(config, options, out);
    } else if (command == "verify-preservation") {
      o = cmd_verify_preservation(config, options, out);
    } else if (command == "break-distribution") {
      o = cmd_break_distribution(config, options, out);
    } else if (command == "predict") {
      o = cmd_predict(config, options, out);
    } else if (command == "analyze-dfa") {
      o = cmd_analyze_dfa(config, options, out);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }

    std::ostringstream text;
    options.format == "human" ? o.report.write_human(text) : o.report.write_machine(text);
    const auto path = options.out ? options.out : config.output.report;
    if (path) {
      std::ofstream file(*path, std::ios::binary);
      if (!file) throw ConfigError("cannot write " + *path);
      file << text.str();
    } else {
      out << text.str();
    }
    return o.code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace fsel::cli
