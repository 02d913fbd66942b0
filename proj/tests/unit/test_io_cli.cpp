#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "cli/commands.hpp"
#include "fsel/io.hpp"
#include "fsel/selection.hpp"
#include "test_util.hpp"

using namespace fsel;
using namespace fsel::cli;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(const std::string& command, const json& doc, RunOptions options = {}) {
  Run r;
  std::ostringstream out;
  std::ostringstream err;
  try {
    r.code = run_command(command, parse_config(doc, CONFIG_DIR), options, out, err);
  } catch (const Error& e) {
    r.code = -1;
    r.err = e.what();
    return r;
  }
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Value of key in the first line of the machine report with this record name.
std::string field(const std::string& report, const std::string& record, const std::string& key) {
  std::istringstream in(report);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("record=" + record + " ", 0) != 0 && line != "record=" + record) continue;
    const auto at = line.find(" " + key + "=");
    if (at == std::string::npos) return {};
    const auto start = at + key.size() + 2;
    if (line[start] == '"') return json::parse(line.substr(start, line.find('"', start + 1) - start + 1)).get<std::string>();
    return line.substr(start, line.find(' ', start) - start);
  }
  return {};
}

json binary_half() { return {{"kind", "bernoulli"}, {"weights", {0.5, 0.5}}}; }

}  // namespace

TEST_CASE("dfa json round trip") {
  std::mt19937_64 gen(103);
  for (int trial = 0; trial < 50; ++trial) {
    const Dfa d = testing::to_dfa(testing::random_table(gen, 1 + gen() % 8, 1 + gen() % 4));
    const json j = dfa_to_json(d);
    const Dfa back = dfa_from_json(j);
    CHECK(dfa_to_json(back) == j);
    CHECK(back.state_count() == d.state_count());
    CHECK(back.start() == d.start());
    CHECK(back.accepting_states() == d.accepting_states());
  }
  const Dfa inf = load_dfa(std::string(CONFIG_DIR) + "/selector_after_zero.json");
  CHECK_FALSE(inf.alphabet().is_finite());
  CHECK(inf.is_accepting(1));
  CHECK(dfa_from_json(dfa_to_json(inf)).step(0, 0) == 1);
  CHECK(dfa_from_json(dfa_to_json(inf)).step(0, 999) == 0);
}

TEST_CASE("dfa json errors") {
  const json good = json::parse(R"({"alphabet": 2, "start": 0, "accepting": [0],
                                    "states": [{"default": 0, "exceptions": []}]})");
  CHECK_NOTHROW(dfa_from_json(good));
  json extra = good;
  extra["colour"] = "red";
  CHECK_THROWS_AS(dfa_from_json(extra), ValidationError);
  json bad_target = good;
  bad_target["states"][0]["default"] = 3;
  CHECK_THROWS_AS(dfa_from_json(bad_target), InvalidState);
  json bad_symbol = good;
  bad_symbol["states"][0]["exceptions"] = json::array({json::array({2, 0})});
  CHECK_THROWS_AS(dfa_from_json(bad_symbol), InvalidSymbol);
  json bad_start = good;
  bad_start["start"] = 1;
  CHECK_THROWS_AS(dfa_from_json(bad_start), InvalidState);
  CHECK_THROWS_AS(dfa_from_json(json::parse("[1, 2]")), ValidationError);
}

TEST_CASE("config parsing rejects unknown and malformed keys") {
  CHECK_THROWS_AS(parse_config(json{{"alphabet", 2}, {"lenght", 10}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"alphabet", 2}, {"source", {{"kind", "mystery"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"alphabet", 2}, {"max_word_length", 17}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"alphabet", 2}, {"map", {{"kind", "bernoulli"}, {"weights", {0.5, 0.6}}}}}),
                  Error);
  const auto c = parse_config(json{{"alphabet", "infinite"}, {"map", {{"kind", "geometric"}, {"ratio", 0.5}}}});
  CHECK_FALSE(c.alphabet.is_finite());
  CHECK(c.max_word_length == 3);
  CHECK(c.rng == "splitmix64-ctr");
}

TEST_CASE("generate writes the sequence") {
  const auto r = run("generate", {{"alphabet", 2}, {"source", {{"kind", "periodic"}, {"pattern", "0.1"}}}, {"length", 8}});
  CHECK(r.code == kExitOk);
  CHECK(r.out == "0 1 0 1 0 1 0 1\n");
  const auto c = run("generate", {{"alphabet", 10}, {"source", {{"kind", "champernowne"}, {"base", 10}}}, {"length", 12}});
  CHECK(c.out == "1 2 3 4 5 6 7 8 9 1 0 1\n");
}

TEST_CASE("select reports the selection") {
  const json doc = {{"alphabet", 2},
                    {"source", {{"kind", "champernowne"}, {"base", 2}}},
                    {"selector", {{"kind", "postnikova"}, {"pattern", "0"}}},
                    {"length", 9}};
  const auto r = run("select", doc);
  CHECK(r.code == kExitOk);
  CHECK(field(r.out, "selection", "selected") == "3");
  CHECK(field(r.out, "run", "rng") == "splitmix64-ctr");
  CHECK(field(r.out, "run", "command") == "select");
}

TEST_CASE("verify-preservation verdicts") {
  json doc = {{"alphabet", 2},
              {"map", binary_half()},
              {"source", {{"kind", "bernoulli"}, {"seed", 1}}},
              {"selector", {{"kind", "parity"}}},
              {"length", 200000},
              {"max_word_length", 2},
              {"tolerance", 0.02}};
  const auto ok = run("verify-preservation", doc);
  CHECK(ok.code == kExitOk);
  CHECK(field(ok.out, "verdict", "result") == "preserved");

  doc["tolerance"] = 1e-9;
  CHECK(run("verify-preservation", doc).code == kExitVerdictFailed);

  json empty = doc;
  empty["selector"] = {{"kind", "postnikova"}, {"pattern", "0.1"}};
  empty["source"] = {{"kind", "periodic"}, {"pattern", "1"}};
  empty["tolerance"] = 0.02;
  CHECK(run("verify-preservation", empty).code == kExitEmptySelection);

  json too_short = doc;
  too_short["length"] = 1000;
  CHECK(run("verify-preservation", too_short).code == kExitUsage);

  json no_map = doc;
  no_map.erase("map");
  CHECK_THROWS_AS(parse_config(no_map), ConfigError);  // the sampled source has no distribution
  no_map["source"] = {{"kind", "periodic"}, {"pattern", "0.1"}};
  CHECK(run("verify-preservation", no_map).code == kExitUsage);
}

TEST_CASE("break-distribution pathways") {
  const json two = {{"alphabet", 2},
                    {"map", {{"kind", "period_two"}}},
                    {"source", {{"kind", "periodic"}, {"pattern", "0.1"}}},
                    {"length", 100000}};
  const auto r = run("break-distribution", two);
  CHECK(r.code == kExitOk);
  CHECK(field(r.out, "verdict", "result") == "broken");
  CHECK(field(r.out, "witness", "word") == "0.0");

  const json bern = {{"alphabet", 2},
                     {"map", binary_half()},
                     {"source", {{"kind", "bernoulli"}, {"seed", 4}}},
                     {"length", 4096}};
  CHECK(run("break-distribution", bern).code == kExitNoWitness);

  const json nonpos = {{"alphabet", 3},
                       {"map", {{"kind", "bernoulli"}, {"weights", {0.5, 0.5, 0.0}}}},
                       {"source", {{"kind", "bb_insertion"}, {"b", 2}, {"inner", {{"kind", "bernoulli"}, {"seed", 1}}}}},
                       {"length", 100000}};
  const auto np = run("break-distribution", nonpos);
  CHECK(np.code == kExitOk);
  CHECK(field(np.out, "run", "pathway") == "non-positive");
  CHECK(field(np.out, "verdict", "final_deviation") == "0.5");
}

TEST_CASE("predict and analyze-dfa") {
  const json doc = {{"alphabet", 2},
                    {"map", binary_half()},
                    {"source", {{"kind", "bernoulli"}, {"seed", 7}}},
                    {"selector", {{"kind", "postnikova"}, {"pattern", "0.0"}}},
                    {"length", 100000}};
  const auto p = run("predict", doc);
  CHECK(p.code == kExitOk);
  CHECK(field(p.out, "verdict", "predicted_rate") == "0.25");

  const auto a = run("analyze-dfa", doc);
  CHECK(a.code == kExitOk);
  CHECK(field(a.out, "run", "strongly_connected") == "true");
  CHECK(field(a.out, "chain", "irreducible") == "true");

  json no_selector = doc;
  no_selector.erase("selector");
  CHECK(run("predict", no_selector).code == kExitUsage);
}

TEST_CASE("reports are deterministic and seeds override") {
  const json doc = {{"alphabet", 2},
                    {"map", binary_half()},
                    {"source", {{"kind", "bernoulli"}, {"seed", 1}}},
                    {"selector", {{"kind", "even_positions"}}},
                    {"length", 5000}};
  const auto a = run("stats", doc);
  const auto b = run("stats", doc);
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  RunOptions seeded;
  seeded.seed = 99;
  const auto c = run("stats", doc, seeded);
  CHECK(c.out != a.out);
  json reseeded = doc;
  reseeded["source"]["seed"] = 99;
  CHECK(run("stats", reseeded).out == c.out);
}

TEST_CASE("human format and bad options") {
  const json doc = {{"alphabet", 2},
                    {"source", {{"kind", "periodic"}, {"pattern", "0.1"}}},
                    {"selector", {{"kind", "parity"}}},
                    {"length", 100}};
  RunOptions human;
  human.format = "human";
  const auto h = run("select", doc, human);
  CHECK(h.code == kExitOk);
  CHECK(h.out.find("[visits]") != std::string::npos);
  CHECK(h.out.find("record=") == std::string::npos);

  RunOptions bad;
  bad.format = "xml";
  CHECK(run("select", doc, bad).code == kExitUsage);
  CHECK(run("no-such-command", doc).code == kExitUsage);
}

TEST_CASE("machine values with spaces are quoted") {
  Report r;
  r.add("x").set("a", "two words").set("b", 1.5).set("c", std::uint64_t{3});
  std::ostringstream out;
  r.write_machine(out);
  CHECK(out.str() == "record=x a=\"two words\" b=1.5 c=3\n");
}
