#include "fsel/io.hpp"

#include <fstream>

namespace fsel {

using nlohmann::json;

json alphabet_to_json(const Alphabet& alphabet) {
  if (alphabet.is_finite()) return alphabet.size();
  return "infinite";
}

Alphabet alphabet_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "infinite") return Alphabet::countably_infinite();
  if ((j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() > 0)) && j.get<std::uint64_t>() > 0) return Alphabet::finite(j.get<std::uint64_t>());
  throw ValidationError("alphabet must be a positive integer or \"infinite\", got " + j.dump());
}

json dfa_to_json(const Dfa& dfa) {
  json states = json::array();
  for (const StateRow& row : dfa.rows()) {
    json ex = json::array();
    for (const Transition& t : row.exceptions) ex.push_back({t.symbol, t.target});
    states.push_back({{"default", row.default_target}, {"exceptions", ex}});
  }
  return {{"alphabet", alphabet_to_json(dfa.alphabet())},
          {"start", dfa.start()},
          {"accepting", dfa.accepting_states()},
          {"states", states}};
}

Dfa dfa_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ValidationError("DFA document must be an object");
    for (const auto& [key, value] : j.items()) {
      if (key != "alphabet" && key != "start" && key != "accepting" && key != "states") {
        throw ValidationError("unknown DFA key '" + key + "'");
      }
    }
    const Alphabet alphabet = alphabet_from_json(j.at("alphabet"));
    const auto& states = j.at("states");
    if (!states.is_array() || states.empty()) throw ValidationError("DFA needs at least one state");
    DfaBuilder builder(alphabet, states.size());
    builder.set_start(j.at("start").get<StateId>());
    for (const auto& q : j.at("accepting")) builder.set_accepting(q.get<StateId>());
    for (std::size_t q = 0; q < states.size(); ++q) {
      const auto& s = states[q];
      const auto id = static_cast<StateId>(q);
      builder.set_default(id, s.at("default").get<StateId>());
      if (s.contains("exceptions")) {
        for (const auto& e : s.at("exceptions")) {
          if (!e.is_array() || e.size() != 2) throw ValidationError("exception must be a [symbol, target] pair");
          builder.set_transition(id, e[0].get<Symbol>(), e[1].get<StateId>());
        }
      }
    }
    return builder.build();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed DFA document: ") + e.what());
  }
}

Dfa load_dfa(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return dfa_from_json(j);
}

void save_dfa(const Dfa& dfa, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << dfa_to_json(dfa).dump(2) << '\n';
}

}  // namespace fsel
