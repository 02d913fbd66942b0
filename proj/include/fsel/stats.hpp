#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fsel/automata.hpp"
#include "fsel/core.hpp"

namespace fsel {

/// Exact overlapping occurrence counts #_w of every word of length
/// 1..max_len seen in a stream. Sparse: only observed words are stored.
///
/// The table is capped at `capacity` distinct words; past the cap the least
/// recently touched eighth is evicted and evicted() turns true, after which
/// counts are no longer exact.
class FrequencyCounter {
public:
  static constexpr std::size_t kDefaultCapacity = std::size_t{1} << 24;

  explicit FrequencyCounter(std::size_t max_len, std::size_t capacity = kDefaultCapacity);

  void push(Symbol a);
  void push(WordView w);

  std::size_t max_len() const noexcept { return max_len_; }
  /// Symbols consumed so far (N).
  std::uint64_t length() const noexcept { return length_; }
  /// Windows of length len: N + 1 - len, or 0.
  std::uint64_t windows(std::size_t len) const noexcept;

  std::uint64_t count(WordView w) const;
  /// count(w) / windows(|w|); 0 when there are no windows.
  double frequency(WordView w) const;

  std::size_t distinct() const noexcept { return table_.size(); }
  bool evicted() const noexcept { return evicted_; }

  /// Observed words of one length with their counts, lexicographic.
  std::vector<std::pair<Word, std::uint64_t>> words_of_length(std::size_t len) const;

  /// Appends the counts of `next`, which must cover the input immediately
  /// following this counter's input. Windows crossing the seam are recovered
  /// from the boundary symbols both counters retain.
  void merge(const FrequencyCounter& next);

private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t touched = 0;
  };

  static void encode(WordView w, std::string& key);
  static Word decode(const std::string& key);
  void bump(const std::string& key, std::uint64_t by);
  void evict();

  std::size_t max_len_;
  std::size_t capacity_;
  std::uint64_t length_ = 0;
  std::uint64_t clock_ = 0;
  bool evicted_ = false;
  Word head_;    // first max_len-1 symbols
  Word recent_;  // last max_len-1 symbols
  std::unordered_map<std::string, Entry> table_;
  std::string scratch_;
  Word window_;
};

/// Single pass over the stream.
FrequencyCounter count_words(WordView stream, std::size_t max_len);

/// Counts of the full length-n blocks of a stream; a trailing partial block
/// is discarded.
class BlockCounter {
public:
  explicit BlockCounter(std::size_t block_len);

  void push(Symbol a);
  void push(WordView w);

  std::size_t block_len() const noexcept { return block_len_; }
  std::uint64_t blocks_seen() const noexcept { return blocks_; }
  std::uint64_t count(WordView w) const;
  double frequency(WordView w) const;
  const std::map<Word, std::uint64_t>& counts() const noexcept { return counts_; }

private:
  std::size_t block_len_;
  std::uint64_t blocks_ = 0;
  Word current_;
  std::map<Word, std::uint64_t> counts_;
};

BlockCounter block_frequencies(WordView stream, std::size_t n);

// ---------------------------------------------------------------------------
// D / E / G classification of length-n words against a strongly connected
// selector.

enum class BlockClass { D, E, G };

std::string to_string(BlockClass c);

/// E: some start state selects at most b*n symbols. Otherwise G: some start
/// state selects a sequence whose symbol frequencies stray from p by at least
/// eps. Otherwise D. E takes precedence where E and G overlap.
///
/// The sup over symbols covers every symbol seen in the selection plus codes
/// below symbol_cut; on infinite alphabets the unseen tail contributes the
/// atom of its first symbol.
class BlockClassifier {
public:
  /// Throws NotStronglyConnected.
  BlockClassifier(const Dfa& dfa, double b, double eps, BernoulliDistribution p, std::size_t symbol_cut = 64);

  BlockClass classify(WordView w) const;

  /// Largest |#_a(sel)/|sel| - p(a)| over symbols; sel must be non-empty.
  double max_symbol_deviation(WordView selected) const;

private:
  const Dfa* dfa_;
  double b_;
  double eps_;
  BernoulliDistribution p_;
  std::size_t symbol_cut_;
};

BlockClass classify_block(WordView w, const Dfa& dfa, double b, double eps, const BernoulliDistribution& p,
                          std::size_t symbol_cut = 64);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// 95% Wilson score interval for successes out of trials.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials);

struct ClassEstimate {
  std::uint64_t samples = 0;
  std::uint64_t d = 0;
  std::uint64_t e = 0;
  std::uint64_t g = 0;

  double fraction_d() const { return samples ? static_cast<double>(d) / samples : 0.0; }
  double fraction_e() const { return samples ? static_cast<double>(e) / samples : 0.0; }
  double fraction_g() const { return samples ? static_cast<double>(g) / samples : 0.0; }
  Interval interval_d() const { return wilson_interval(d, samples); }
  Interval interval_e() const { return wilson_interval(e, samples); }
  Interval interval_g() const { return wilson_interval(g, samples); }
};

/// Monte-Carlo measure of D_n, E_n, G_n under mu_p: `samples` consecutive
/// length-n blocks of BernoulliSource(p, seed). Requires a strongly
/// connected selector with an accepting state.
ClassEstimate estimate_class_measures(const Dfa& dfa, std::size_t n, double b, double eps,
                                      const BernoulliDistribution& p, std::uint64_t samples, std::uint64_t seed,
                                      std::size_t symbol_cut = 64);

// ---------------------------------------------------------------------------
// Chernoff tail

/// 2 exp(-ell eps^2 / (3 p_a)).
double chernoff_bound(std::uint64_t ell, double eps, double p_a);

struct TailSample {
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  double bound = 0.0;

  double violation_fraction() const { return samples ? static_cast<double>(violations) / samples : 0.0; }
};

/// Fraction of sampled length-ell words (from mu_p) whose frequency of `a`
/// is at least eps away from p(a).
TailSample sample_chernoff_tail(const BernoulliDistribution& p, Symbol a, std::uint64_t ell, double eps,
                                std::uint64_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Deviation reports

struct WordDeviation {
  Word word;
  std::uint64_t count = 0;
  double frequency = 0.0;
  double mu = 0.0;
  double deviation = 0.0;
};

struct Checkpoint {
  /// Input prefix length at which the measurement was taken.
  std::uint64_t input_length = 0;
  /// Length of the measured stream (e.g. the selected subsequence).
  std::uint64_t sample_length = 0;
  /// Index L-1 holds the largest deviation over words of length L.
  std::vector<double> max_deviation_by_length;
  double max_deviation = 0.0;
  Word worst_word;
  /// Largest mu among words never observed (0 when all were observed).
  double unobserved_mass_bound = 0.0;
  /// Kept only when requested, sorted by decreasing deviation.
  std::vector<WordDeviation> words;
};

struct FrequencyReport {
  std::vector<Checkpoint> checkpoints;
  bool evicted = false;
};

/// Powers of two from 2^10 up to n, followed by n itself.
std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t n);

/// Deviations |freq(w) - mu(w)| for every word of length 1..max_len. Finite
/// alphabets are enumerated exhaustively when small; otherwise observed
/// words are scored and the unobserved ones bounded by their largest mu.
Checkpoint measure_deviations(const FrequencyCounter& counter, const ProbabilityMap& map,
                              std::uint64_t input_length, std::size_t keep_words = 0);

// ---------------------------------------------------------------------------
// Gap detection for the converse direction

struct CheckpointFrequency {
  std::uint64_t input_length = 0;
  std::uint64_t selected_length = 0;
  /// Frequency of the witness's last symbol in the selected sequence.
  double frequency = 0.0;
};

struct GammaReport {
  Word prefix;
  Symbol target = 0;
  double mu_prefix = 0.0;
  double mu_word = 0.0;
  double mu_target = 0.0;
  /// |mu(wa)/mu(w) - mu(a)|
  double gamma = 0.0;
  double threshold = 0.0;
  std::vector<double> deviations;
  double final_deviation = 0.0;
  /// Deviation at the final checkpoint exceeds gamma/2. A negative verdict at
  /// finite N proves nothing.
  bool broken = false;
};

/// Throws ZeroPrefixMass when mu(prefix) = 0.
GammaReport gamma_gap_report(const std::vector<CheckpointFrequency>& selected_freq_by_checkpoint,
                             const ProbabilityMap& map, const FirstWitness& witness);

}  // namespace fsel
