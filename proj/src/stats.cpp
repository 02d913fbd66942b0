#include "fsel/stats.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

#include "fsel/selection.hpp"
#include "fsel/sequences.hpp"

namespace fsel {

namespace {

constexpr double kWilsonZ = 1.959963984540054;
// Finite alphabets are enumerated exhaustively up to this many words per length.
constexpr std::uint64_t kMaxEnumeratedWords = std::uint64_t{1} << 20;

void put_varint(std::string& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>((v & 0x7F) | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

std::uint64_t get_varint(const std::string& in, std::size_t& pos) {
  std::uint64_t v = 0;
  int shift = 0;
  while (true) {
    const auto byte = static_cast<unsigned char>(in[pos++]);
    v |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
    if ((byte & 0x80) == 0) return v;
    shift += 7;
  }
}

std::optional<std::uint64_t> checked_power(std::uint64_t k, std::size_t n, std::uint64_t limit) {
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (v > limit / k) return std::nullopt;
    v *= k;
  }
  return v;
}

// Largest mu_p(w) over length-len words w absent from `observed`, for a
// distribution whose atoms decrease with the code. Best-first over index
// tuples; each tuple is generated once by incrementing positions at or after
// its last non-zero coordinate.
double max_unobserved_mu(const std::set<Word>& observed, std::size_t len, const BernoulliDistribution& p) {
  struct Item {
    double mu;
    Word w;
    std::size_t last;
    bool operator<(const Item& o) const { return mu < o.mu || (mu == o.mu && w > o.w); }
  };
  auto mass = [&p](const Word& w) {
    double m = 1.0;
    for (Symbol a : w) m *= p.prob(a);
    return m;
  };
  std::priority_queue<Item> queue;
  Word zero(len, 0);
  queue.push({mass(zero), zero, 0});
  while (!queue.empty()) {
    Item top = queue.top();
    queue.pop();
    if (!observed.contains(top.w)) return top.mu;
    for (std::size_t j = top.last; j < len; ++j) {
      Word child = top.w;
      ++child[j];
      queue.push({mass(child), std::move(child), j});
    }
  }
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// FrequencyCounter

FrequencyCounter::FrequencyCounter(std::size_t max_len, std::size_t capacity)
    : max_len_(max_len), capacity_(capacity) {
  if (max_len == 0) throw ValidationError("max word length must be positive");
  if (capacity < 8) throw ValidationError("counter capacity must be at least 8");
  window_.reserve(max_len);
}

void FrequencyCounter::encode(WordView w, std::string& key) {
  key.clear();
  key.push_back(static_cast<char>(w.size()));
  for (Symbol a : w) put_varint(key, a);
}

Word FrequencyCounter::decode(const std::string& key) {
  Word w(static_cast<unsigned char>(key[0]));
  std::size_t pos = 1;
  for (auto& a : w) a = get_varint(key, pos);
  return w;
}

void FrequencyCounter::evict() {
  std::vector<std::uint64_t> stamps;
  stamps.reserve(table_.size());
  for (const auto& [key, e] : table_) stamps.push_back(e.touched);
  const std::size_t drop = std::max<std::size_t>(1, table_.size() / 8);
  std::nth_element(stamps.begin(), stamps.begin() + static_cast<std::ptrdiff_t>(drop - 1), stamps.end());
  const std::uint64_t cutoff = stamps[drop - 1];
  std::erase_if(table_, [cutoff](const auto& kv) { return kv.second.touched <= cutoff; });
  evicted_ = true;
}

void FrequencyCounter::bump(const std::string& key, std::uint64_t by) {
  ++clock_;
  auto it = table_.find(key);
  if (it == table_.end()) {
    if (table_.size() >= capacity_) evict();
    it = table_.emplace(key, Entry{}).first;
  }
  it->second.count += by;
  it->second.touched = clock_;
}

void FrequencyCounter::push(Symbol a) {
  ++length_;
  window_.assign(recent_.begin(), recent_.end());
  window_.push_back(a);
  const WordView view(window_);
  for (std::size_t len = 1; len <= view.size(); ++len) {
    encode(view.last(len), scratch_);
    bump(scratch_, 1);
  }
  if (max_len_ > 1) {
    if (head_.size() < max_len_ - 1) head_.push_back(a);
    recent_.push_back(a);
    if (recent_.size() > max_len_ - 1) recent_.erase(recent_.begin());
  }
}

void FrequencyCounter::push(WordView w) {
  for (Symbol a : w) push(a);
}

std::uint64_t FrequencyCounter::windows(std::size_t len) const noexcept {
  return length_ + 1 > len ? length_ + 1 - len : 0;
}

std::uint64_t FrequencyCounter::count(WordView w) const {
  if (w.empty() || w.size() > max_len_) return 0;
  std::string key;
  encode(w, key);
  const auto it = table_.find(key);
  return it == table_.end() ? 0 : it->second.count;
}

double FrequencyCounter::frequency(WordView w) const {
  const std::uint64_t total = windows(w.size());
  return total == 0 ? 0.0 : static_cast<double>(count(w)) / static_cast<double>(total);
}

std::vector<std::pair<Word, std::uint64_t>> FrequencyCounter::words_of_length(std::size_t len) const {
  std::vector<std::pair<Word, std::uint64_t>> out;
  for (const auto& [key, e] : table_) {
    if (static_cast<unsigned char>(key[0]) == len) out.emplace_back(decode(key), e.count);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void FrequencyCounter::merge(const FrequencyCounter& next) {
  if (next.max_len_ != max_len_) throw ValidationError("cannot merge counters with different max lengths");
  for (const auto& [key, e] : next.table_) bump(key, e.count);
  evicted_ = evicted_ || next.evicted_;

  // Windows that start in our tail and end in next's head.
  Word seam(recent_);
  const std::size_t split = seam.size();
  seam.insert(seam.end(), next.head_.begin(), next.head_.end());
  for (std::size_t start = 0; start < split; ++start) {
    for (std::size_t end = split; end < seam.size() && end - start + 1 <= max_len_; ++end) {
      encode(WordView(seam).subspan(start, end - start + 1), scratch_);
      bump(scratch_, 1);
    }
  }

  if (max_len_ > 1) {
    const std::size_t keep = max_len_ - 1;
    if (head_.size() < keep) {
      // Our whole input is the head; extend it with next's head.
      for (Symbol a : next.head_) {
        if (head_.size() == keep) break;
        head_.push_back(a);
      }
    }
    if (next.length_ >= keep) {
      recent_ = next.recent_;
    } else {
      recent_ = seam;  // all of our tail followed by all of next
      if (recent_.size() > keep) recent_.erase(recent_.begin(), recent_.end() - static_cast<std::ptrdiff_t>(keep));
    }
  }
  length_ += next.length_;
}

FrequencyCounter count_words(WordView stream, std::size_t max_len) {
  FrequencyCounter counter(max_len);
  counter.push(stream);
  return counter;
}

// ---------------------------------------------------------------------------
// BlockCounter

BlockCounter::BlockCounter(std::size_t block_len) : block_len_(block_len) {
  if (block_len == 0) throw ValidationError("block length must be positive");
  current_.reserve(block_len);
}

void BlockCounter::push(Symbol a) {
  current_.push_back(a);
  if (current_.size() == block_len_) {
    ++counts_[current_];
    ++blocks_;
    current_.clear();
  }
}

void BlockCounter::push(WordView w) {
  for (Symbol a : w) push(a);
}

std::uint64_t BlockCounter::count(WordView w) const {
  const auto it = counts_.find(Word(w.begin(), w.end()));
  return it == counts_.end() ? 0 : it->second;
}

double BlockCounter::frequency(WordView w) const {
  return blocks_ == 0 ? 0.0 : static_cast<double>(count(w)) / static_cast<double>(blocks_);
}

BlockCounter block_frequencies(WordView stream, std::size_t n) {
  BlockCounter counter(n);
  counter.push(stream);
  return counter;
}

// ---------------------------------------------------------------------------
// D / E / G

std::string to_string(BlockClass c) {
  switch (c) {
    case BlockClass::D:
      return "D";
    case BlockClass::E:
      return "E";
    case BlockClass::G:
      return "G";
  }
  return "?";
}

BlockClassifier::BlockClassifier(const Dfa& dfa, double b, double eps, BernoulliDistribution p,
                                 std::size_t symbol_cut)
    : dfa_(&dfa), b_(b), eps_(eps), p_(std::move(p)), symbol_cut_(symbol_cut) {
  if (!(b > 0.0 && b <= 1.0)) throw ValidationError("b must lie in (0, 1]");
  if (!(eps > 0.0)) throw ValidationError("eps must be positive");
  if (!(dfa.alphabet() == p_.alphabet())) throw AlphabetMismatch("distribution and selector alphabets differ");
  if (!scc_analyze(dfa).strongly_connected()) throw NotStronglyConnected("D/E/G classes need a strongly connected selector");
}

double BlockClassifier::max_symbol_deviation(WordView selected) const {
  std::map<Symbol, std::uint64_t> counts;
  for (Symbol a : selected) ++counts[a];
  const double total = static_cast<double>(selected.size());
  double sup = 0.0;
  for (const auto& [a, c] : counts) sup = std::max(sup, std::abs(static_cast<double>(c) / total - p_.prob(a)));

  const std::uint64_t range = p_.alphabet().is_finite() ? p_.alphabet().size() : symbol_cut_;
  for (Symbol a = 0; a < range; ++a) {
    if (!counts.contains(a)) sup = std::max(sup, p_.prob(a));
  }
  if (!p_.alphabet().is_finite()) {
    Symbol a = symbol_cut_;
    while (counts.contains(a)) ++a;
    sup = std::max(sup, p_.prob(a));
  }
  return sup;
}

BlockClass BlockClassifier::classify(WordView w) const {
  const double limit = b_ * static_cast<double>(w.size());
  std::vector<Word> selections;
  selections.reserve(dfa_->state_count());
  for (StateId q = 0; q < dfa_->state_count(); ++q) {
    Word sel = select_word_from(*dfa_, q, w);
    if (static_cast<double>(sel.size()) <= limit) return BlockClass::E;
    selections.push_back(std::move(sel));
  }
  for (const Word& sel : selections) {
    if (max_symbol_deviation(sel) >= eps_) return BlockClass::G;
  }
  return BlockClass::D;
}

BlockClass classify_block(WordView w, const Dfa& dfa, double b, double eps, const BernoulliDistribution& p,
                          std::size_t symbol_cut) {
  return BlockClassifier(dfa, b, eps, p, symbol_cut).classify(w);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  // The bounds are exact at the ends; rounding would otherwise leave them a few ulps inside.
  const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

ClassEstimate estimate_class_measures(const Dfa& dfa, std::size_t n, double b, double eps,
                                      const BernoulliDistribution& p, std::uint64_t samples, std::uint64_t seed,
                                      std::size_t symbol_cut) {
  if (!dfa.has_accepting()) throw ValidationError("class estimation needs an accepting state");
  if (n == 0) throw ValidationError("block length must be positive");
  const BlockClassifier classifier(dfa, b, eps, p, symbol_cut);
  BernoulliSource source(p, seed);
  ClassEstimate est;
  Word block(n);
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (auto& a : block) a = source.next();
    switch (classifier.classify(block)) {
      case BlockClass::D:
        ++est.d;
        break;
      case BlockClass::E:
        ++est.e;
        break;
      case BlockClass::G:
        ++est.g;
        break;
    }
  }
  est.samples = samples;
  return est;
}

// ---------------------------------------------------------------------------
// Chernoff

double chernoff_bound(std::uint64_t ell, double eps, double p_a) {
  return 2.0 * std::exp(-static_cast<double>(ell) * eps * eps / (3.0 * p_a));
}

TailSample sample_chernoff_tail(const BernoulliDistribution& p, Symbol a, std::uint64_t ell, double eps,
                                std::uint64_t samples, std::uint64_t seed) {
  const double pa = p.prob(a);
  BernoulliSource source(p, seed);
  TailSample out;
  out.samples = samples;
  out.bound = chernoff_bound(ell, eps, pa);
  for (std::uint64_t s = 0; s < samples; ++s) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < ell; ++i) hits += source.next() == a ? 1 : 0;
    if (std::abs(pa - static_cast<double>(hits) / static_cast<double>(ell)) >= eps) ++out.violations;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Deviation reports

std::vector<std::uint64_t> checkpoint_schedule(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t c = 1024; c < n; c *= 2) out.push_back(c);
  out.push_back(n);
  return out;
}

Checkpoint measure_deviations(const FrequencyCounter& counter, const ProbabilityMap& map,
                              std::uint64_t input_length, std::size_t keep_words) {
  Checkpoint cp;
  cp.input_length = input_length;
  cp.sample_length = counter.length();
  cp.max_deviation_by_length.assign(counter.max_len(), 0.0);
  std::vector<WordDeviation> all;

  auto score = [&](const Word& w, std::uint64_t count) {
    WordDeviation d;
    d.word = w;
    d.count = count;
    d.frequency = counter.windows(w.size()) == 0
                      ? 0.0
                      : static_cast<double>(count) / static_cast<double>(counter.windows(w.size()));
    d.mu = map.mu(w);
    d.deviation = std::abs(d.frequency - d.mu);
    double& slot = cp.max_deviation_by_length[w.size() - 1];
    slot = std::max(slot, d.deviation);
    if (d.deviation > cp.max_deviation || cp.worst_word.empty()) {
      cp.max_deviation = std::max(cp.max_deviation, d.deviation);
      cp.worst_word = w;
    }
    if (keep_words > 0) all.push_back(std::move(d));
  };

  const Alphabet& alphabet = map.alphabet();
  for (std::size_t len = 1; len <= counter.max_len(); ++len) {
    if (const auto depth = map.max_depth(); depth && len > *depth) break;
    const auto observed = counter.words_of_length(len);
    const auto total = alphabet.is_finite() ? checked_power(alphabet.size(), len, kMaxEnumeratedWords) : std::nullopt;
    if (total) {
      std::size_t idx = 0;
      for_each_word(alphabet.size(), len, [&](WordView w) {
        std::uint64_t count = 0;
        if (idx < observed.size() && std::equal(w.begin(), w.end(), observed[idx].first.begin(), observed[idx].first.end())) {
          count = observed[idx++].second;
        }
        score(Word(w.begin(), w.end()), count);
      });
      continue;
    }
    for (const auto& [w, count] : observed) score(w, count);
    const BernoulliDistribution* p = map.distribution();
    if (p == nullptr || !p->is_decreasing()) {
      throw ValidationError("unobserved words can only be bounded for decreasing Bernoulli families");
    }
    std::set<Word> seen;
    for (const auto& entry : observed) seen.insert(entry.first);
    const double bound = max_unobserved_mu(seen, len, *p);
    cp.unobserved_mass_bound = std::max(cp.unobserved_mass_bound, bound);
    double& slot = cp.max_deviation_by_length[len - 1];
    slot = std::max(slot, bound);
    cp.max_deviation = std::max(cp.max_deviation, bound);
  }

  if (keep_words > 0) {
    std::stable_sort(all.begin(), all.end(),
                     [](const WordDeviation& x, const WordDeviation& y) { return x.deviation > y.deviation; });
    if (all.size() > keep_words) all.resize(keep_words);
    cp.words = std::move(all);
  }
  return cp;
}

// ---------------------------------------------------------------------------
// Gamma gap

GammaReport gamma_gap_report(const std::vector<CheckpointFrequency>& selected_freq_by_checkpoint,
                             const ProbabilityMap& map, const FirstWitness& witness) {
  if (witness.word.size() < 2) throw ValidationError("witness must have length at least 2");
  GammaReport r;
  r.prefix = witness.prefix();
  r.target = witness.last();
  r.mu_prefix = map.mu(r.prefix);
  if (r.mu_prefix == 0.0) {
    throw ZeroPrefixMass("witness prefix " + format_word(r.prefix) + " has zero mass");
  }
  r.mu_word = map.mu(witness.word);
  r.mu_target = map.mu(Word{r.target});
  r.gamma = std::abs(r.mu_word / r.mu_prefix - r.mu_target);
  r.threshold = r.gamma / 2.0;
  for (const CheckpointFrequency& c : selected_freq_by_checkpoint) {
    r.deviations.push_back(std::abs(c.frequency - r.mu_target));
  }
  if (!r.deviations.empty()) {
    r.final_deviation = r.deviations.back();
    r.broken = selected_freq_by_checkpoint.back().selected_length > 0 && r.final_deviation > r.threshold;
  }
  return r;
}

}  // namespace fsel
