#include "fsel/core.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fsel {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kTableSumTolerance = 1e-9;
constexpr double kInvarianceTolerance = 1e-6;

const double kBaselNormalizer = 6.0 / (std::numbers::pi * std::numbers::pi);

bool contains_repeat(WordView w) {
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] == w[i - 1]) return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Alphabet

Alphabet Alphabet::finite(std::uint64_t size) {
  if (size == 0) throw ValidationError("finite alphabet must have at least one symbol");
  return Alphabet(size);
}

Alphabet Alphabet::countably_infinite() { return Alphabet(0); }

void Alphabet::check(Symbol a) const {
  if (!contains(a)) {
    throw InvalidSymbol("symbol " + std::to_string(a) + " outside alphabet of size " + std::to_string(size_));
  }
}

void Alphabet::check(WordView w) const {
  for (Symbol a : w) check(a);
}

std::string Alphabet::to_string() const {
  return is_finite() ? "finite(" + std::to_string(size_) + ")" : "countably_infinite";
}

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_word(WordView w) {
  if (w.empty()) return "<empty>";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != 0) out.push_back('.');
    out += std::to_string(w[i]);
  }
  return out;
}

Word parse_word(const std::string& text) {
  Word w;
  if (text == "<empty>" || text.empty()) return w;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dot = text.find('.', pos);
    const std::string part = text.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw ValidationError("malformed word '" + text + "'");
    }
    w.push_back(std::stoull(part));
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  return w;
}

void for_each_word(std::uint64_t k, std::size_t n, const std::function<void(WordView)>& fn) {
  Word w(n, 0);
  while (true) {
    fn(w);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++w[i] < k) break;
      w[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

// ---------------------------------------------------------------------------
// BernoulliDistribution

BernoulliDistribution BernoulliDistribution::explicit_weights(std::vector<double> weights) {
  if (weights.empty()) throw ValidationError("explicit distribution needs at least one weight");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || w > 1.0) throw ValidationError("weights must lie in [0, 1]");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "weights sum to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }
  BernoulliDistribution p(Kind::Explicit, Alphabet::finite(weights.size()));
  p.weights_ = std::move(weights);
  return p;
}

BernoulliDistribution BernoulliDistribution::geometric(double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("geometric ratio must lie in (0, 1)");
  BernoulliDistribution p(Kind::Geometric, Alphabet::countably_infinite());
  p.ratio_ = ratio;
  return p;
}

BernoulliDistribution BernoulliDistribution::inverse_square() {
  return BernoulliDistribution(Kind::InverseSquare, Alphabet::countably_infinite());
}

double BernoulliDistribution::prob(Symbol a) const {
  alphabet_.check(a);
  switch (kind_) {
    case Kind::Explicit:
      return weights_[a];
    case Kind::Geometric:
      return (1.0 - ratio_) * std::pow(ratio_, static_cast<double>(a));
    case Kind::InverseSquare: {
      const double n = static_cast<double>(a) + 1.0;
      return kBaselNormalizer / (n * n);
    }
  }
  return 0.0;
}

bool BernoulliDistribution::is_positive() const noexcept { return !first_zero_atom().has_value(); }

std::optional<Symbol> BernoulliDistribution::first_zero_atom() const noexcept {
  if (kind_ != Kind::Explicit) return std::nullopt;
  for (std::size_t a = 0; a < weights_.size(); ++a) {
    if (weights_[a] == 0.0) return a;
  }
  return std::nullopt;
}

double BernoulliDistribution::tail_bound(Symbol cut) const {
  switch (kind_) {
    case Kind::Explicit: {
      double tail = 0.0;
      for (std::size_t a = cut; a < weights_.size(); ++a) tail += weights_[a];
      return tail;
    }
    case Kind::Geometric:
      return std::pow(ratio_, static_cast<double>(cut));
    case Kind::InverseSquare:
      // sum_{n > N} n^-2 < 1/N
      return cut == 0 ? 1.0 : kBaselNormalizer / static_cast<double>(cut);
  }
  return 1.0;
}

std::string BernoulliDistribution::to_string() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::Explicit:
      out << "explicit(";
      for (std::size_t i = 0; i < weights_.size(); ++i) out << (i ? "," : "") << format_real(weights_[i]);
      out << ")";
      break;
    case Kind::Geometric:
      out << "geometric(" << format_real(ratio_) << ")";
      break;
    case Kind::InverseSquare:
      out << "inverse_square";
      break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// ProbabilityMap

ProbabilityMap ProbabilityMap::bernoulli(BernoulliDistribution p) {
  const Alphabet alphabet = p.alphabet();
  return ProbabilityMap(alphabet, std::move(p));
}

ProbabilityMap ProbabilityMap::tabular(std::uint64_t alphabet_size, std::size_t depth, Table table) {
  if (depth == 0) throw ValidationError("tabular map depth must be positive");
  const Alphabet alphabet = Alphabet::finite(alphabet_size);
  std::vector<double> sums(depth + 1, 0.0);
  for (const auto& [w, v] : table) {
    if (w.empty() || w.size() > depth) {
      throw ValidationError("tabular entry '" + format_word(w) + "' has length outside 1.." + std::to_string(depth));
    }
    alphabet.check(w);
    if (!(v >= 0.0) || v > 1.0) throw ValidationError("tabular entry '" + format_word(w) + "' outside [0, 1]");
    sums[w.size()] += v;
  }
  for (std::size_t n = 1; n <= depth; ++n) {
    if (std::abs(sums[n] - 1.0) > kTableSumTolerance) {
      throw ValidationError("tabular values of length " + std::to_string(n) + " sum to " + std::to_string(sums[n]));
    }
  }
  return ProbabilityMap(alphabet, TabularData{depth, std::move(table)});
}

ProbabilityMap ProbabilityMap::period_two() { return ProbabilityMap(Alphabet::finite(2), PeriodTwoData{}); }

ProbabilityMap::Kind ProbabilityMap::kind() const noexcept {
  switch (data_.index()) {
    case 0:
      return Kind::BernoulliInduced;
    case 1:
      return Kind::Tabular;
    default:
      return Kind::PeriodTwo;
  }
}

double ProbabilityMap::mu(WordView w) const {
  alphabet_.check(w);
  if (w.empty()) return 1.0;
  if (const auto* p = std::get_if<BernoulliDistribution>(&data_)) {
    double product = 1.0;
    for (Symbol a : w) product *= p->prob(a);
    return product;
  }
  if (const auto* t = std::get_if<TabularData>(&data_)) {
    if (w.size() > t->depth) {
      throw WordTooLong("word of length " + std::to_string(w.size()) + " exceeds tabular depth " +
                        std::to_string(t->depth));
    }
    const auto it = t->table.find(Word(w.begin(), w.end()));
    return it == t->table.end() ? 0.0 : it->second;
  }
  return contains_repeat(w) ? 0.0 : 0.5;
}

std::optional<std::size_t> ProbabilityMap::max_depth() const noexcept {
  if (const auto* t = std::get_if<TabularData>(&data_)) return t->depth;
  return std::nullopt;
}

const BernoulliDistribution* ProbabilityMap::distribution() const noexcept {
  return std::get_if<BernoulliDistribution>(&data_);
}

std::string ProbabilityMap::to_string() const {
  switch (kind()) {
    case Kind::BernoulliInduced:
      return "bernoulli[" + distribution()->to_string() + "]";
    case Kind::Tabular:
      return "tabular(depth=" + std::to_string(*max_depth()) + ")";
    case Kind::PeriodTwo:
      return "period_two";
  }
  return {};
}

// ---------------------------------------------------------------------------
// Invariance and Bernoulli witnesses

InvarianceReport check_invariance(const ProbabilityMap& map, std::size_t depth, std::size_t tail_cut) {
  InvarianceReport report;
  if (depth == 0) throw ValidationError("invariance depth must be positive");
  if (const auto max = map.max_depth()) depth = std::min(depth, *max);
  report.depth_checked = depth;
  report.tail_cut = tail_cut;

  const Alphabet& alphabet = map.alphabet();
  std::uint64_t k = alphabet.size();
  report.tolerance = kInvarianceTolerance;
  if (!alphabet.is_finite()) {
    if (tail_cut == 0) throw ValidationError("tail_cut must be positive on infinite alphabets");
    k = tail_cut;
    const BernoulliDistribution* p = map.distribution();
    report.tolerance += p != nullptr ? p->tail_bound(tail_cut) : 1.0;
  }

  Word extended;
  for (std::size_t n = 0; n < depth; ++n) {
    for_each_word(k, n, [&](WordView w) {
      const double base = map.mu(w);
      double right = 0.0;
      double left = 0.0;
      extended.assign(w.size() + 1, 0);
      for (Symbol a = 0; a < k; ++a) {
        std::copy(w.begin(), w.end(), extended.begin());
        extended.back() = a;
        right += map.mu(extended);
        extended.front() = a;
        std::copy(w.begin(), w.end(), extended.begin() + 1);
        left += map.mu(extended);
      }
      InvarianceEntry entry{Word(w.begin(), w.end()), std::abs(right - base), std::abs(left - base)};
      report.max_right_residual = std::max(report.max_right_residual, entry.right_residual);
      report.max_left_residual = std::max(report.max_left_residual, entry.left_residual);
      report.entries.push_back(std::move(entry));
    });
  }
  report.invariant =
      report.max_right_residual < report.tolerance && report.max_left_residual < report.tolerance;
  return report;
}

std::optional<FirstWitness> is_bernoulli_within(const ProbabilityMap& map, std::size_t depth, double tol,
                                                std::size_t symbol_cut) {
  if (depth < 2) throw ValidationError("witness search depth must be at least 2");
  if (const auto max = map.max_depth(); max && depth > *max) {
    throw WordTooLong("witness depth " + std::to_string(depth) + " exceeds tabular depth " + std::to_string(*max));
  }
  const std::uint64_t k = map.alphabet().is_finite() ? map.alphabet().size() : symbol_cut;

  std::optional<FirstWitness> found;
  for (std::size_t n = 2; n <= depth && !found; ++n) {
    for_each_word(k, n, [&](WordView w) {
      if (found) return;
      const double whole = map.mu(w);
      const double product = map.mu(w.first(n - 1)) * map.mu(w.last(1));
      const double gap = std::abs(whole - product);
      if (gap > tol) found = FirstWitness{Word(w.begin(), w.end()), gap, whole, product};
    });
  }
  return found;
}

}  // namespace fsel
