#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fsel/automata.hpp"
#include "fsel/core.hpp"
#include "fsel/sequences.hpp"

namespace fsel::cli {

/// Raised for anything wrong with a config document; maps to exit code 2.
class ConfigError : public Error {
public:
  using Error::Error;
};

inline constexpr std::uint64_t kMinStatisticalLength = 1024;

struct WitnessParams {
  std::size_t depth = 4;
  double tolerance = 1e-9;
  std::size_t symbol_cut = 16;
};

struct OutputParams {
  std::optional<std::string> report;
  std::optional<std::string> sequence;
  /// "text" or "bytes"
  std::string sequence_format = "text";
};

/// Parsed experiment description. The spec sub-documents for the source and
/// the selector are kept as JSON and materialized on demand, so every command
/// builds fresh instances.
struct ExperimentConfig {
  std::string base_dir;  // relative DFA paths resolve against this
  Alphabet alphabet = Alphabet::finite(2);
  std::optional<ProbabilityMap> map;
  std::optional<nlohmann::json> source;
  std::optional<nlohmann::json> selector;
  std::uint64_t length = 0;
  std::size_t max_word_length = 3;
  std::vector<std::uint64_t> checkpoints;  // empty: default schedule
  std::optional<double> tolerance;
  WitnessParams witness;
  std::string rng = "splitmix64-ctr";
  OutputParams output;
  std::size_t keep_words = 0;
};

ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Replaces the seed of every sampled source in the spec, including inner ones.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

std::unique_ptr<SequenceSource> make_source(const ExperimentConfig& config);
Dfa make_selector(const ExperimentConfig& config);

/// Cross-field checks; statistical commands also require length >= 2^10.
void validate(const ExperimentConfig& config, bool statistical);

/// Checkpoints in increasing order ending at length.
std::vector<std::uint64_t> resolved_checkpoints(const ExperimentConfig& config);

/// Short description of the source spec, or "none".
std::string describe_source(const ExperimentConfig& config);
std::string describe_selector(const ExperimentConfig& config);

}  // namespace fsel::cli
