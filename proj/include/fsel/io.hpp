#pragma once

#include <string>

#include <json.hpp>

#include "fsel/automata.hpp"

namespace fsel {

/// DFA file layout:
///   {"alphabet": 2 | "infinite", "start": 0, "accepting": [0],
///    "states": [{"default": 1, "exceptions": [[1, 0]]}, ...]}
/// Exceptions are [symbol, target] pairs. Loading goes through DfaBuilder, so
/// exceptions equal to the default are dropped.
nlohmann::json dfa_to_json(const Dfa& dfa);
Dfa dfa_from_json(const nlohmann::json& j);

Dfa load_dfa(const std::string& path);
void save_dfa(const Dfa& dfa, const std::string& path);

nlohmann::json alphabet_to_json(const Alphabet& alphabet);
Alphabet alphabet_from_json(const nlohmann::json& j);

}  // namespace fsel
