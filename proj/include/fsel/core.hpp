#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fsel/errors.hpp"

namespace fsel {

/// Dense 0-based code of an alphabet element.
using Symbol = std::uint64_t;

/// Finite sequence of symbols; the empty vector is the empty word.
using Word = std::vector<Symbol>;

using WordView = std::span<const Symbol>;

/// Either {0, ..., size-1} or the non-negative integers.
class Alphabet {
public:
  static Alphabet finite(std::uint64_t size);
  static Alphabet countably_infinite();

  bool is_finite() const noexcept { return size_ != 0; }
  /// Number of symbols; 0 encodes the countably infinite alphabet.
  std::uint64_t size() const noexcept { return size_; }

  bool contains(Symbol a) const noexcept { return size_ == 0 || a < size_; }
  void check(Symbol a) const;
  void check(WordView w) const;

  std::string to_string() const;

  friend bool operator==(const Alphabet&, const Alphabet&) = default;

private:
  explicit Alphabet(std::uint64_t size) : size_(size) {}
  std::uint64_t size_;
};

/// Dot-separated rendering ("0.1.1"); the empty word renders as "<empty>".
std::string format_word(WordView w);
/// Inverse of format_word. Throws ValidationError on malformed text.
Word parse_word(const std::string& text);

/// Shortest text that reads back as the same double.
std::string format_real(double v);

/// Calls fn on every word of length n over {0..k-1} in lexicographic order.
void for_each_word(std::uint64_t k, std::size_t n, const std::function<void(WordView)>& fn);

/// A distribution p on symbols. Explicit weights live on a finite alphabet;
/// the two parametric families live on the countably infinite one.
class BernoulliDistribution {
public:
  enum class Kind { Explicit, Geometric, InverseSquare };

  /// Weights must be non-negative and sum to 1 within 1e-12.
  static BernoulliDistribution explicit_weights(std::vector<double> weights);
  /// p(a) = (1 - ratio) * ratio^a, ratio in (0, 1).
  static BernoulliDistribution geometric(double ratio);
  /// p(a) = 6 / (pi^2 (a + 1)^2).
  static BernoulliDistribution inverse_square();

  Kind kind() const noexcept { return kind_; }
  const Alphabet& alphabet() const noexcept { return alphabet_; }

  double prob(Symbol a) const;
  double operator()(Symbol a) const { return prob(a); }

  bool is_positive() const noexcept;
  std::optional<Symbol> first_zero_atom() const noexcept;

  /// Upper bound on the mass of symbols >= cut. Exact for Explicit and
  /// Geometric; the Basel tail estimate for InverseSquare.
  double tail_bound(Symbol cut) const;

  /// True for the parametric families, whose atoms decrease with the code.
  bool is_decreasing() const noexcept { return kind_ != Kind::Explicit; }

  const std::vector<double>& weights() const noexcept { return weights_; }
  double ratio() const noexcept { return ratio_; }

  std::string to_string() const;

private:
  BernoulliDistribution(Kind kind, Alphabet alphabet) : kind_(kind), alphabet_(alphabet) {}

  Kind kind_;
  Alphabet alphabet_;
  std::vector<double> weights_;
  double ratio_ = 0.0;
};

/// mu(w) for finite words. mu of the empty word is always 1.
class ProbabilityMap {
public:
  enum class Kind { BernoulliInduced, Tabular, PeriodTwo };
  using Table = std::map<Word, double>;

  static ProbabilityMap bernoulli(BernoulliDistribution p);
  /// Entries missing from the table have probability 0. Every length
  /// 1..depth must sum to 1 within 1e-9.
  static ProbabilityMap tabular(std::uint64_t alphabet_size, std::size_t depth, Table table);
  /// mu(w) = 1/2 when w avoids 00 and 11, 0 otherwise; binary alphabet.
  static ProbabilityMap period_two();

  Kind kind() const noexcept;
  const Alphabet& alphabet() const noexcept { return alphabet_; }

  double mu(WordView w) const;
  double operator()(WordView w) const { return mu(w); }

  /// Largest supported word length; nullopt when unbounded.
  std::optional<std::size_t> max_depth() const noexcept;

  /// Non-null only for BernoulliInduced maps.
  const BernoulliDistribution* distribution() const noexcept;

  std::string to_string() const;

private:
  struct TabularData {
    std::size_t depth;
    Table table;
  };
  struct PeriodTwoData {};

  ProbabilityMap(Alphabet alphabet, std::variant<BernoulliDistribution, TabularData, PeriodTwoData> data)
      : alphabet_(alphabet), data_(std::move(data)) {}

  Alphabet alphabet_;
  std::variant<BernoulliDistribution, TabularData, PeriodTwoData> data_;
};

struct InvarianceEntry {
  Word word;
  double right_residual;  // |sum_a mu(wa) - mu(w)|
  double left_residual;   // |sum_a mu(aw) - mu(w)|
};

struct InvarianceReport {
  std::size_t depth_checked = 0;
  std::size_t tail_cut = 0;
  double tolerance = 0.0;
  double max_right_residual = 0.0;
  double max_left_residual = 0.0;
  bool invariant = false;
  std::vector<InvarianceEntry> entries;
};

/// Residuals of both shift-invariance sums for every word shorter than depth.
/// On infinite alphabets words and sums range over symbols < tail_cut and the
/// tolerance is widened by the distribution's tail bound. Depth is clamped to
/// a tabular map's depth.
InvarianceReport check_invariance(const ProbabilityMap& map, std::size_t depth, std::size_t tail_cut);

/// First word a_1..a_k (k ascending, then lexicographic) whose mass departs
/// from mu(a_1..a_{k-1}) * mu(a_k).
struct FirstWitness {
  Word word;
  double gap = 0.0;
  double mu_word = 0.0;
  double mu_product = 0.0;

  Word prefix() const { return Word(word.begin(), word.end() - 1); }
  Symbol last() const { return word.back(); }
};

/// Searches lengths 2..depth. Infinite alphabets are scanned over symbols
/// < symbol_cut. Throws WordTooLong when depth exceeds a tabular map.
std::optional<FirstWitness> is_bernoulli_within(const ProbabilityMap& map, std::size_t depth, double tol,
                                                std::size_t symbol_cut = 16);

}  // namespace fsel
