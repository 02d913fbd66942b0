#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cli/config.hpp"

namespace fsel::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitVerdictFailed = 3,
  kExitEmptySelection = 4,
  kExitNoWitness = 5,
};

/// Ordered key=value fields under a record name.
struct Record {
  std::string name;
  std::vector<std::pair<std::string, std::string>> fields;

  Record& set(const std::string& key, const std::string& value);
  Record& set(const std::string& key, const char* value) { return set(key, std::string(value)); }
  Record& set(const std::string& key, double value);
  Record& set(const std::string& key, std::uint64_t value);
  Record& set(const std::string& key, int value) { return set(key, static_cast<std::uint64_t>(value)); }
  Record& set(const std::string& key, bool value) { return set(key, std::string(value ? "true" : "false")); }
};

class Report {
public:
  Record& add(const std::string& name);
  const std::vector<Record>& records() const noexcept { return records_; }

  /// One line per record: record=NAME key=value ...
  void write_machine(std::ostream& out) const;
  /// Consecutive records with the same name and keys form one aligned table.
  void write_human(std::ostream& out) const;

private:
  std::vector<Record> records_;
};

std::string format_double(double v);

struct RunOptions {
  std::string format = "machine";
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"generate",           "select",  "stats",      "verify-preservation",
                                                 "break-distribution", "predict", "analyze-dfa"};
  return names;
}

/// Runs one subcommand and writes its report. Errors are reported on err and
/// mapped to exit codes; nothing is thrown.
int run_command(const std::string& command, ExperimentConfig config, const RunOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace fsel::cli
