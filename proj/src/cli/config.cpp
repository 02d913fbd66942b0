#include "cli/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <initializer_list>

#include "fsel/io.hpp"
#include "fsel/rng.hpp"
#include "fsel/stats.hpp"

namespace fsel::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    const bool ok = std::any_of(allowed.begin(), allowed.end(), [&key](const char* a) { return key == a; });
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + " is missing '" + key + "'");
  return obj.at(key);
}

std::string kind_of(const json& obj, const std::string& where) {
  const json& k = require(obj, "kind", where);
  if (!k.is_string()) throw ConfigError(where + ".kind must be a string");
  return k.get<std::string>();
}

template <typename T>
T get_as(const json& v, const std::string& where) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + " has the wrong type: " + v.dump());
  }
}

std::uint64_t get_count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) throw ConfigError(where + " must be a non-negative integer");
  return v.get<std::uint64_t>();
}

Word word_from_json(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_word(v.get<std::string>());
    } catch (const Error& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (v.is_array()) {
    Word w;
    for (const auto& s : v) w.push_back(get_count(s, where));
    return w;
  }
  throw ConfigError(where + " must be a dotted word string or an array of symbols");
}

BernoulliDistribution distribution_from_json(const json& spec, const std::string& where) {
  const std::string kind = kind_of(spec, where);
  if (kind == "bernoulli") {
    check_keys(spec, {"kind", "weights"}, where);
    return BernoulliDistribution::explicit_weights(get_as<std::vector<double>>(require(spec, "weights", where), where));
  }
  if (kind == "geometric") {
    check_keys(spec, {"kind", "ratio"}, where);
    return BernoulliDistribution::geometric(get_as<double>(require(spec, "ratio", where), where));
  }
  if (kind == "inverse_square") {
    check_keys(spec, {"kind"}, where);
    return BernoulliDistribution::inverse_square();
  }
  throw ConfigError(where + ": unknown distribution kind '" + kind + "'");
}

ProbabilityMap map_from_json(const json& spec, const Alphabet& alphabet) {
  const std::string where = "map";
  const std::string kind = kind_of(spec, where);
  if (kind == "tabular") {
    check_keys(spec, {"kind", "depth", "table"}, where);
    if (!alphabet.is_finite()) throw ConfigError("tabular maps need a finite alphabet");
    ProbabilityMap::Table table;
    const json& t = require(spec, "table", where);
    if (!t.is_object()) throw ConfigError("map.table must be an object of word: probability");
    for (const auto& [key, value] : t.items()) {
      table[word_from_json(key, "map.table")] = get_as<double>(value, "map.table." + key);
    }
    return ProbabilityMap::tabular(alphabet.size(), get_count(require(spec, "depth", where), "map.depth"),
                                   std::move(table));
  }
  if (kind == "period_two") {
    check_keys(spec, {"kind"}, where);
    return ProbabilityMap::period_two();
  }
  return ProbabilityMap::bernoulli(distribution_from_json(spec, where));
}

std::unique_ptr<SequenceSource> source_from_json(const json& spec, const ExperimentConfig& config,
                                                 const std::string& where) {
  const std::string kind = kind_of(spec, where);
  if (kind == "champernowne") {
    check_keys(spec, {"kind", "base"}, where);
    return std::make_unique<ChampernowneSource>(
        static_cast<unsigned>(get_count(require(spec, "base", where), where + ".base")));
  }
  if (kind == "periodic") {
    check_keys(spec, {"kind", "pattern"}, where);
    return std::make_unique<PeriodicSource>(word_from_json(require(spec, "pattern", where), where + ".pattern"),
                                            config.alphabet);
  }
  if (kind == "bernoulli") {
    check_keys(spec, {"kind", "seed", "distribution"}, where);
    const std::uint64_t seed = get_count(require(spec, "seed", where), where + ".seed");
    if (spec.contains("distribution")) {
      return std::make_unique<BernoulliSource>(distribution_from_json(spec.at("distribution"), where + ".distribution"),
                                               seed);
    }
    const BernoulliDistribution* p = config.map ? config.map->distribution() : nullptr;
    if (p == nullptr) throw ConfigError(where + " needs a distribution when the map is not Bernoulli");
    return std::make_unique<BernoulliSource>(*p, seed);
  }
  if (kind == "markov") {
    check_keys(spec, {"kind", "transition", "initial", "seed"}, where);
    return std::make_unique<MarkovSource>(
        get_as<std::vector<std::vector<double>>>(require(spec, "transition", where), where + ".transition"),
        get_as<std::vector<double>>(require(spec, "initial", where), where + ".initial"),
        get_count(require(spec, "seed", where), where + ".seed"));
  }
  if (kind == "bb_insertion") {
    check_keys(spec, {"kind", "b", "inner"}, where);
    return bb_insertion_stream(source_from_json(require(spec, "inner", where), config, where + ".inner"),
                               get_count(require(spec, "b", where), where + ".b"), config.alphabet);
  }
  throw ConfigError(where + ": unknown source kind '" + kind + "'");
}

Dfa selector_from_json(const json& spec, const ExperimentConfig& config, const std::string& where) {
  const std::string kind = kind_of(spec, where);
  if (kind == "accept_all") {
    check_keys(spec, {"kind"}, where);
    return make_accept_all(config.alphabet);
  }
  if (kind == "parity") {
    check_keys(spec, {"kind", "flip", "accept_even"}, where);
    const Symbol flip = spec.contains("flip") ? get_count(spec.at("flip"), where + ".flip") : 1;
    const bool even = spec.contains("accept_even") ? get_as<bool>(spec.at("accept_even"), where) : true;
    return make_parity_selector(config.alphabet, flip, even);
  }
  if (kind == "even_positions") {
    check_keys(spec, {"kind"}, where);
    return make_even_position_selector(config.alphabet);
  }
  if (kind == "postnikova") {
    check_keys(spec, {"kind", "pattern", "construction"}, where);
    const Word w = word_from_json(require(spec, "pattern", where), where + ".pattern");
    const std::string how = spec.contains("construction") ? get_as<std::string>(spec.at("construction"), where) : "kmp";
    if (how == "kmp") return compile_postnikova_kmp(w, config.alphabet);
    if (how == "bitvector") return compile_postnikova_paper(w, config.alphabet);
    throw ConfigError(where + ".construction must be \"kmp\" or \"bitvector\"");
  }
  if (kind == "dfa") {
    check_keys(spec, {"kind", "path"}, where);
    std::filesystem::path path = get_as<std::string>(require(spec, "path", where), where + ".path");
    if (path.is_relative()) path = std::filesystem::path(config.base_dir) / path;
    Dfa dfa = load_dfa(path.string());
    if (!(dfa.alphabet() == config.alphabet)) {
      throw ConfigError(path.string() + ": DFA alphabet " + dfa.alphabet().to_string() +
                        " differs from the config alphabet " + config.alphabet.to_string());
    }
    return dfa;
  }
  if (kind == "compose") {
    check_keys(spec, {"kind", "stages"}, where);
    const json& stages = require(spec, "stages", where);
    if (!stages.is_array() || stages.empty()) throw ConfigError(where + ".stages must be a non-empty array");
    Dfa acc = selector_from_json(stages[0], config, where + ".stages[0]");
    for (std::size_t i = 1; i < stages.size(); ++i) {
      acc = compose(acc, selector_from_json(stages[i], config, where + ".stages[" + std::to_string(i) + "]"));
    }
    return acc;
  }
  throw ConfigError(where + ": unknown selector kind '" + kind + "'");
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  check_keys(doc, {"alphabet", "map", "source", "selector", "length", "max_word_length", "checkpoints", "tolerance",
                   "witness", "rng", "output", "keep_words"},
             "config");
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    if (doc.contains("alphabet")) c.alphabet = alphabet_from_json(doc.at("alphabet"));
    if (doc.contains("map")) c.map = map_from_json(doc.at("map"), c.alphabet);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("source")) c.source = doc.at("source");
  if (doc.contains("selector")) c.selector = doc.at("selector");
  if (doc.contains("length")) c.length = get_count(doc.at("length"), "length");
  if (doc.contains("max_word_length")) {
    c.max_word_length = get_count(doc.at("max_word_length"), "max_word_length");
    if (c.max_word_length == 0 || c.max_word_length > 16) throw ConfigError("max_word_length must lie in 1..16");
  }
  if (doc.contains("checkpoints")) {
    for (const auto& v : doc.at("checkpoints")) c.checkpoints.push_back(get_count(v, "checkpoints"));
    if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end())) {
      throw ConfigError("checkpoints must be increasing");
    }
  }
  if (doc.contains("tolerance")) {
    c.tolerance = get_as<double>(doc.at("tolerance"), "tolerance");
    if (!(*c.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  }
  if (doc.contains("witness")) {
    const json& w = doc.at("witness");
    check_keys(w, {"depth", "tolerance", "symbol_cut"}, "witness");
    if (w.contains("depth")) c.witness.depth = get_count(w.at("depth"), "witness.depth");
    if (w.contains("tolerance")) c.witness.tolerance = get_as<double>(w.at("tolerance"), "witness.tolerance");
    if (w.contains("symbol_cut")) c.witness.symbol_cut = get_count(w.at("symbol_cut"), "witness.symbol_cut");
  }
  if (doc.contains("rng")) {
    c.rng = get_as<std::string>(doc.at("rng"), "rng");
    if (c.rng != CounterRng::kAlgorithmId) {
      throw ConfigError("unsupported rng '" + c.rng + "'; only " + std::string(CounterRng::kAlgorithmId));
    }
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, {"report", "sequence", "sequence_format"}, "output");
    if (o.contains("report")) c.output.report = get_as<std::string>(o.at("report"), "output.report");
    if (o.contains("sequence")) c.output.sequence = get_as<std::string>(o.at("sequence"), "output.sequence");
    if (o.contains("sequence_format")) {
      c.output.sequence_format = get_as<std::string>(o.at("sequence_format"), "output.sequence_format");
      if (c.output.sequence_format != "text" && c.output.sequence_format != "bytes") {
        throw ConfigError("output.sequence_format must be \"text\" or \"bytes\"");
      }
    }
  }
  if (doc.contains("keep_words")) c.keep_words = get_count(doc.at("keep_words"), "keep_words");
  // Materialize once so malformed source or selector specs fail at load time.
  if (c.source) make_source(c);
  if (c.selector) make_selector(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(doc, dir.empty() ? "." : dir.string());
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  if (!config.source) return;
  json* spec = &*config.source;
  while (spec->is_object()) {
    if (spec->contains("seed")) (*spec)["seed"] = seed;
    if (!spec->contains("inner")) break;
    spec = &(*spec)["inner"];
  }
}

std::unique_ptr<SequenceSource> make_source(const ExperimentConfig& config) {
  if (!config.source) throw ConfigError("config has no source");
  try {
    return source_from_json(*config.source, config, "source");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("source: ") + e.what());
  }
}

Dfa make_selector(const ExperimentConfig& config) {
  if (!config.selector) throw ConfigError("config has no selector");
  try {
    return selector_from_json(*config.selector, config, "selector");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("selector: ") + e.what());
  }
}

void validate(const ExperimentConfig& config, bool statistical) {
  if (config.length == 0) throw ConfigError("length must be positive");
  if (statistical && config.length < kMinStatisticalLength) {
    throw ConfigError("statistical commands need length >= " + std::to_string(kMinStatisticalLength));
  }
  if (config.map && !(config.map->alphabet() == config.alphabet)) {
    throw ConfigError("map alphabet " + config.map->alphabet().to_string() + " differs from the config alphabet " +
                      config.alphabet.to_string());
  }
  if (config.source) {
    const auto src = make_source(config);
    if (!(src->alphabet() == config.alphabet)) {
      throw ConfigError("source alphabet " + src->alphabet().to_string() + " differs from the config alphabet " +
                        config.alphabet.to_string());
    }
  }
  if (config.selector) make_selector(config);
  for (std::uint64_t c : config.checkpoints) {
    if (c == 0 || c > config.length) throw ConfigError("checkpoints must lie in 1..length");
  }
}

std::vector<std::uint64_t> resolved_checkpoints(const ExperimentConfig& config) {
  std::vector<std::uint64_t> out = config.checkpoints.empty() ? checkpoint_schedule(config.length) : config.checkpoints;
  if (out.empty() || out.back() != config.length) out.push_back(config.length);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string describe_source(const ExperimentConfig& config) {
  return config.source ? make_source(config)->describe() : "none";
}

std::string describe_selector(const ExperimentConfig& config) {
  if (!config.selector) return "none";
  return config.selector->dump();
}

}  // namespace fsel::cli
