#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fsel/core.hpp"
#include "fsel/rng.hpp"

namespace fsel {

/// Deterministic, restartable producer of an infinite symbol stream.
/// Single consumer; use clone() for an independent cursor.
class SequenceSource {
public:
  virtual ~SequenceSource() = default;

  /// Symbol at the cursor; advances the cursor.
  virtual Symbol next() = 0;
  /// Rewinds to position 0. The stream replays identically.
  virtual void reset() = 0;
  /// Same parameters, cursor at 0.
  virtual std::unique_ptr<SequenceSource> clone() const = 0;
  virtual std::string describe() const = 0;

  const Alphabet& alphabet() const noexcept { return alphabet_; }
  std::uint64_t position() const noexcept { return position_; }

protected:
  explicit SequenceSource(Alphabet alphabet) : alphabet_(alphabet) {}

  Alphabet alphabet_;
  std::uint64_t position_ = 0;
};

/// Concatenated base-b expansions of 1, 2, 3, ... (most significant digit first).
class ChampernowneSource final : public SequenceSource {
public:
  explicit ChampernowneSource(unsigned base);

  Symbol next() override;
  void reset() override;
  std::unique_ptr<SequenceSource> clone() const override;
  std::string describe() const override;

private:
  void load_digits();

  unsigned base_;
  std::uint64_t number_ = 0;
  std::vector<Symbol> digits_;  // reversed digits of number_
  std::size_t remaining_ = 0;
};

/// pattern repeated forever.
class PeriodicSource final : public SequenceSource {
public:
  PeriodicSource(Word pattern, Alphabet alphabet);

  Symbol next() override;
  void reset() override;
  std::unique_ptr<SequenceSource> clone() const override;
  std::string describe() const override;

private:
  Word pattern_;
  std::size_t index_ = 0;
};

/// Inverse-CDF sampler for a Bernoulli distribution. Infinite families use a
/// cumulative table until the remaining mass drops below 2^-53 (or the table
/// cap is hit) and invert the analytic tail beyond it.
class InverseCdfSampler {
public:
  static constexpr std::size_t kMaxTable = std::size_t{1} << 16;

  explicit InverseCdfSampler(const BernoulliDistribution& p);

  /// u uniform in [0, 1).
  Symbol sample(double u) const;

  std::size_t table_size() const noexcept { return cumulative_.size(); }

private:
  BernoulliDistribution p_;
  std::vector<double> cumulative_;
  Symbol last_positive_ = 0;
};

/// i.i.d. draws from p; symbol i is sampler(CounterRng(seed).uniform(i)).
class BernoulliSource final : public SequenceSource {
public:
  BernoulliSource(BernoulliDistribution p, std::uint64_t seed);

  Symbol next() override;
  void reset() override { position_ = 0; }
  std::unique_ptr<SequenceSource> clone() const override;
  std::string describe() const override;

  const BernoulliDistribution& distribution() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return rng_.seed(); }

private:
  BernoulliDistribution p_;
  CounterRng rng_;
  InverseCdfSampler sampler_;
};

/// First-order Markov chain whose states are the symbols themselves. Row a of
/// `transition` is the law of the symbol following a.
class MarkovSource final : public SequenceSource {
public:
  MarkovSource(std::vector<std::vector<double>> transition, std::vector<double> initial, std::uint64_t seed);

  Symbol next() override;
  void reset() override;
  std::unique_ptr<SequenceSource> clone() const override;
  std::string describe() const override;

private:
  static Symbol pick(const std::vector<double>& cumulative, double u);

  std::vector<std::vector<double>> transition_;
  std::vector<double> initial_;
  std::vector<std::vector<double>> row_cdf_;
  std::vector<double> initial_cdf_;
  CounterRng rng_;
  Symbol last_ = 0;
};

/// Inner stream with the block `b b` inserted right after inner positions
/// 2, 4, 8, 16, ... (positions counted in the inner stream).
class BbInsertionSource final : public SequenceSource {
public:
  /// Throws InvalidSymbol at read time if the inner stream ever emits b.
  BbInsertionSource(std::unique_ptr<SequenceSource> inner, Symbol b, Alphabet alphabet);

  Symbol next() override;
  void reset() override;
  std::unique_ptr<SequenceSource> clone() const override;
  std::string describe() const override;

  std::uint64_t inner_consumed() const noexcept { return consumed_; }
  Symbol inserted_symbol() const noexcept { return b_; }

private:
  std::unique_ptr<SequenceSource> inner_;
  Symbol b_;
  std::uint64_t consumed_ = 0;
  int pending_ = 0;
};

std::unique_ptr<SequenceSource> bb_insertion_stream(std::unique_ptr<SequenceSource> inner, Symbol b,
                                                    Alphabet alphabet);

/// Resets src and returns its first n symbols.
Word sample_prefix(SequenceSource& src, std::uint64_t n);

/// Whitespace-separated decimal codes on one newline-terminated line.
void write_text(std::ostream& out, WordView w);
/// One byte per symbol; every symbol must be < 256.
void write_bytes(std::ostream& out, WordView w);
/// Reads whitespace-separated codes until end of stream.
Word read_text(std::istream& in);

}  // namespace fsel
