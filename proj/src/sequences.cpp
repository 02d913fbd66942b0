#include "fsel/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace fsel {

namespace {

constexpr double kTailResolution = 0x1.0p-53;

std::vector<double> cumulative_of(const std::vector<double>& weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  return cdf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Champernowne

ChampernowneSource::ChampernowneSource(unsigned base) : SequenceSource(Alphabet::finite(base)), base_(base) {
  if (base < 2) throw ValidationError("Champernowne base must be at least 2");
}

void ChampernowneSource::load_digits() {
  ++number_;
  digits_.clear();
  for (std::uint64_t v = number_; v != 0; v /= base_) digits_.push_back(v % base_);
  remaining_ = digits_.size();
}

Symbol ChampernowneSource::next() {
  if (remaining_ == 0) load_digits();
  ++position_;
  return digits_[--remaining_];
}

void ChampernowneSource::reset() {
  position_ = 0;
  number_ = 0;
  remaining_ = 0;
  digits_.clear();
}

std::unique_ptr<SequenceSource> ChampernowneSource::clone() const {
  return std::make_unique<ChampernowneSource>(base_);
}

std::string ChampernowneSource::describe() const { return "champernowne(base=" + std::to_string(base_) + ")"; }

// ---------------------------------------------------------------------------
// Periodic

PeriodicSource::PeriodicSource(Word pattern, Alphabet alphabet)
    : SequenceSource(alphabet), pattern_(std::move(pattern)) {
  if (pattern_.empty()) throw ValidationError("periodic pattern must be non-empty");
  alphabet_.check(pattern_);
}

Symbol PeriodicSource::next() {
  const Symbol a = pattern_[index_];
  if (++index_ == pattern_.size()) index_ = 0;
  ++position_;
  return a;
}

void PeriodicSource::reset() {
  position_ = 0;
  index_ = 0;
}

std::unique_ptr<SequenceSource> PeriodicSource::clone() const {
  return std::make_unique<PeriodicSource>(pattern_, alphabet_);
}

std::string PeriodicSource::describe() const { return "periodic(" + format_word(pattern_) + ")"; }

// ---------------------------------------------------------------------------
// Inverse-CDF sampling

InverseCdfSampler::InverseCdfSampler(const BernoulliDistribution& p) : p_(p) {
  if (p.kind() == BernoulliDistribution::Kind::Explicit) {
    cumulative_ = cumulative_of(p.weights());
    for (std::size_t a = 0; a < p.weights().size(); ++a) {
      if (p.weights()[a] > 0.0) last_positive_ = a;
    }
    return;
  }
  double acc = 0.0;
  for (Symbol a = 0; a < kMaxTable; ++a) {
    acc += p.prob(a);
    cumulative_.push_back(acc);
    if (p.tail_bound(a + 1) < kTailResolution) break;
  }
}

Symbol InverseCdfSampler::sample(double u) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (p_.kind() == BernoulliDistribution::Kind::Explicit) {
    if (it == cumulative_.end()) return last_positive_;
    return static_cast<Symbol>(it - cumulative_.begin());
  }
  if (it != cumulative_.end()) return static_cast<Symbol>(it - cumulative_.begin());

  // Remaining mass r = 1 - u is exact: u is a multiple of 2^-53.
  const double r = 1.0 - u;
  const double table_end = static_cast<double>(cumulative_.size());
  double n = table_end;
  if (p_.kind() == BernoulliDistribution::Kind::Geometric) {
    // smallest n with ratio^(n+1) < r
    n = std::floor(std::log(r) / std::log(p_.ratio()));
  } else {
    // sum_{k >= n} 6/(pi^2 (k+1)^2) ~ (6/pi^2) / (n + 1/2); smallest n with tail(n+1) < r
    const double c = 6.0 / (std::numbers::pi * std::numbers::pi);
    n = std::floor(c / r - 0.5);
  }
  return static_cast<Symbol>(std::max(n, table_end));
}

// ---------------------------------------------------------------------------
// Bernoulli

BernoulliSource::BernoulliSource(BernoulliDistribution p, std::uint64_t seed)
    : SequenceSource(p.alphabet()), p_(p), rng_(seed), sampler_(p) {}

Symbol BernoulliSource::next() { return sampler_.sample(rng_.uniform(position_++)); }

std::unique_ptr<SequenceSource> BernoulliSource::clone() const {
  return std::make_unique<BernoulliSource>(p_, rng_.seed());
}

std::string BernoulliSource::describe() const {
  return "bernoulli(" + p_.to_string() + ", seed=" + std::to_string(rng_.seed()) + ", rng=" +
         std::string(CounterRng::kAlgorithmId) + ")";
}

// ---------------------------------------------------------------------------
// Markov

MarkovSource::MarkovSource(std::vector<std::vector<double>> transition, std::vector<double> initial,
                           std::uint64_t seed)
    : SequenceSource(Alphabet::finite(std::max<std::size_t>(transition.size(), 1))),
      transition_(std::move(transition)),
      initial_(std::move(initial)),
      rng_(seed) {
  const std::size_t k = transition_.size();
  if (k == 0 || initial_.size() != k) throw ValidationError("Markov source needs a square matrix and matching initial law");
  auto check_row = [k](const std::vector<double>& row) {
    if (row.size() != k) throw ValidationError("Markov transition matrix must be square");
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0)) throw ValidationError("Markov probabilities must be non-negative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("Markov rows must sum to 1");
  };
  for (const auto& row : transition_) {
    check_row(row);
    row_cdf_.push_back(cumulative_of(row));
  }
  check_row(initial_);
  initial_cdf_ = cumulative_of(initial_);
}

Symbol MarkovSource::pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it != cumulative.end()) return static_cast<Symbol>(it - cumulative.begin());
  // u beyond a rounded-down total: take the last symbol with positive mass
  std::size_t a = cumulative.size() - 1;
  while (a > 0 && cumulative[a] == cumulative[a - 1]) --a;
  return a;
}

Symbol MarkovSource::next() {
  const double u = rng_.uniform(position_);
  last_ = position_ == 0 ? pick(initial_cdf_, u) : pick(row_cdf_[last_], u);
  ++position_;
  return last_;
}

void MarkovSource::reset() {
  position_ = 0;
  last_ = 0;
}

std::unique_ptr<SequenceSource> MarkovSource::clone() const {
  return std::make_unique<MarkovSource>(transition_, initial_, rng_.seed());
}

std::string MarkovSource::describe() const {
  std::ostringstream out;
  out << "markov(";
  for (std::size_t i = 0; i < transition_.size(); ++i) {
    out << (i ? ";" : "");
    for (std::size_t j = 0; j < transition_[i].size(); ++j) out << (j ? "," : "") << format_real(transition_[i][j]);
  }
  out << ", seed=" << rng_.seed() << ", rng=" << CounterRng::kAlgorithmId << ")";
  return out.str();
}

// ---------------------------------------------------------------------------
// bb insertion

BbInsertionSource::BbInsertionSource(std::unique_ptr<SequenceSource> inner, Symbol b, Alphabet alphabet)
    : SequenceSource(alphabet), inner_(std::move(inner)), b_(b) {
  if (!inner_) throw ValidationError("bb insertion needs an inner source");
  alphabet_.check(b_);
}

Symbol BbInsertionSource::next() {
  ++position_;
  if (pending_ > 0) {
    --pending_;
    return b_;
  }
  const Symbol x = inner_->next();
  if (x == b_) throw InvalidSymbol("inner stream emitted the inserted symbol " + std::to_string(b_));
  alphabet_.check(x);
  ++consumed_;
  // powers of two from 2 on
  if (consumed_ >= 2 && (consumed_ & (consumed_ - 1)) == 0) pending_ = 2;
  return x;
}

void BbInsertionSource::reset() {
  inner_->reset();
  position_ = 0;
  consumed_ = 0;
  pending_ = 0;
}

std::unique_ptr<SequenceSource> BbInsertionSource::clone() const {
  return std::make_unique<BbInsertionSource>(inner_->clone(), b_, alphabet_);
}

std::string BbInsertionSource::describe() const {
  return "bb_insertion(b=" + std::to_string(b_) + ", inner=" + inner_->describe() + ")";
}

std::unique_ptr<SequenceSource> bb_insertion_stream(std::unique_ptr<SequenceSource> inner, Symbol b,
                                                    Alphabet alphabet) {
  return std::make_unique<BbInsertionSource>(std::move(inner), b, alphabet);
}

// ---------------------------------------------------------------------------

Word sample_prefix(SequenceSource& src, std::uint64_t n) {
  src.reset();
  Word out;
  out.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) out.push_back(src.next());
  return out;
}

void write_text(std::ostream& out, WordView w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != 0) out << ' ';
    out << w[i];
  }
  out << '\n';
}

void write_bytes(std::ostream& out, WordView w) {
  for (Symbol a : w) {
    if (a > 255) throw InvalidSymbol("symbol " + std::to_string(a) + " does not fit in a byte");
    out.put(static_cast<char>(a));
  }
}

Word read_text(std::istream& in) {
  Word w;
  std::string token;
  while (in >> token) {
    if (token.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("sequence file contains non-numeric token '" + token + "'");
    }
    w.push_back(std::stoull(token));
  }
  return w;
}

}  // namespace fsel
