#include "sisr/coalition.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "sisr/rng.hpp"

namespace sisr {

namespace {

void check_feature_count(int p, int max_p) {
  if (p < 1 || p > max_p) {
    fail(ErrorKind::kCapacity,
         "feature count " + std::to_string(p) + " outside supported range [1, " +
             std::to_string(max_p) + "] (full enumeration budget 2^" +
             std::to_string(max_p) + " = " + std::to_string(1ull << max_p) +
             " coalitions)");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// PayoffTable
// ---------------------------------------------------------------------------

PayoffTable PayoffTable::from_entries(int p, std::vector<PayoffEntry> entries,
                                      bool baseline_adjusted) {
  check_feature_count(p, kMaxFeatures);
  const std::uint32_t full = CoalitionMask::full_bits(p);
  for (auto& e : entries) {
    if (e.mask.bits > full) {
      fail(ErrorKind::kStructural, "mask " + std::to_string(e.mask.bits) +
                                       " has bits beyond feature count " +
                                       std::to_string(p));
    }
    e.mask.p = p;
  }
  std::sort(entries.begin(), entries.end(),
            [](const PayoffEntry& a, const PayoffEntry& b) {
              return a.mask.bits < b.mask.bits;
            });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].mask.bits == entries[i - 1].mask.bits) {
      fail(ErrorKind::kStructural,
           "duplicate mask " + std::to_string(entries[i].mask.bits));
    }
  }
  if (entries.empty() || entries.front().mask.bits != 0) {
    fail(ErrorKind::kStructural,
         "payoff table is missing the empty coalition (mask 0)");
  }
  if (entries.back().mask.bits != full) {
    fail(ErrorKind::kStructural,
         "payoff table is missing the grand coalition (mask " +
             std::to_string(full) + ")");
  }
  for (const auto& e : entries) {
    if (!std::isfinite(e.value)) {
      fail(ErrorKind::kData, "non-finite payoff at mask " +
                                 std::to_string(e.mask.bits));
    }
  }
  if (baseline_adjusted && entries.front().value != 0.0) {
    fail(ErrorKind::kStructural,
         "table flagged baseline-adjusted but empty payoff is nonzero");
  }

  PayoffTable table;
  table.p_ = p;
  table.full_enumeration_ =
      p <= kMaxEnumerationFeatures && entries.size() == (std::size_t{1} << p);
  table.entries_ = std::move(entries);
  table.baseline_adjusted_ = baseline_adjusted;
  return table;
}

PayoffTable PayoffTable::from_values(int p, std::span<const double> values) {
  check_feature_count(p, kMaxEnumerationFeatures);
  if (values.size() != (std::size_t{1} << p)) {
    fail(ErrorKind::kStructural,
         "expected " + std::to_string(1ull << p) + " payoffs for p = " +
             std::to_string(p) + ", got " + std::to_string(values.size()));
  }
  std::vector<PayoffEntry> entries(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    entries[i] = {CoalitionMask{static_cast<std::uint32_t>(i), p}, values[i]};
  }
  return from_entries(p, std::move(entries));
}

bool PayoffTable::has(std::uint32_t bits) const {
  if (full_enumeration_) return bits < entries_.size();
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), bits,
      [](const PayoffEntry& e, std::uint32_t b) { return e.mask.bits < b; });
  return it != entries_.end() && it->mask.bits == bits;
}

double PayoffTable::value(std::uint32_t bits) const {
  if (full_enumeration_) {
    if (bits >= entries_.size()) {
      fail(ErrorKind::kStructural, "mask " + std::to_string(bits) +
                                       " out of range");
    }
    return entries_[bits].value;
  }
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), bits,
      [](const PayoffEntry& e, std::uint32_t b) { return e.mask.bits < b; });
  if (it == entries_.end() || it->mask.bits != bits) {
    fail(ErrorKind::kStructural,
         "mask " + std::to_string(bits) + " not present in table");
  }
  return it->value;
}

Eigen::VectorXd PayoffTable::values() const {
  Eigen::VectorXd v(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) v[i] = entries_[i].value;
  return v;
}

std::vector<CoalitionMask> PayoffTable::masks() const {
  std::vector<CoalitionMask> m;
  m.reserve(entries_.size());
  for (const auto& e : entries_) m.push_back(e.mask);
  return m;
}

// ---------------------------------------------------------------------------
// IncidenceMatrix
// ---------------------------------------------------------------------------

Eigen::MatrixXd IncidenceMatrix::dense() const {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rows_.size(), p_);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for_each_member(rows_[i], [&](int j) { z(i, j) = 1.0; });
  }
  return z;
}

Eigen::VectorXd IncidenceMatrix::multiply(const Eigen::VectorXd& gamma,
                                          std::uint32_t support_bits) const {
  if (gamma.size() != p_) {
    fail(ErrorKind::kStructural, "incidence multiply: gamma length mismatch");
  }
  Eigen::VectorXd delta(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    double acc = 0.0;
    for_each_member(rows_[i] & support_bits, [&](int j) { acc += gamma[j]; });
    delta[i] = acc;
  }
  return delta;
}

Eigen::VectorXd IncidenceMatrix::multiply(const Eigen::VectorXd& gamma) const {
  return multiply(gamma, CoalitionMask::full_bits(p_));
}

Eigen::VectorXd IncidenceMatrix::weighted_transpose_multiply(
    const Eigen::VectorXd& w, const Eigen::VectorXd& t) const {
  if (static_cast<std::size_t>(w.size()) != rows_.size() ||
      static_cast<std::size_t>(t.size()) != rows_.size()) {
    fail(ErrorKind::kStructural, "incidence transpose multiply: length mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p_);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const double wt = w[i] * t[i];
    for_each_member(rows_[i], [&](int j) { out[j] += wt; });
  }
  return out;
}

Eigen::MatrixXd IncidenceMatrix::weighted_gram(const Eigen::VectorXd& w) const {
  if (static_cast<std::size_t>(w.size()) != rows_.size()) {
    fail(ErrorKind::kStructural, "incidence gram: weight length mismatch");
  }
  // Upper triangle only, mirrored at the end.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p_, p_);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const double wi = w[i];
    std::uint32_t bits = rows_[i];
    while (bits != 0) {
      const int j = std::countr_zero(bits);
      for_each_member(bits, [&](int k) { g(j, k) += wi; });
      bits &= bits - 1;
    }
  }
  g.triangularView<Eigen::StrictlyLower>() = g.transpose();
  return g;
}

// ---------------------------------------------------------------------------
// Free operations
// ---------------------------------------------------------------------------

std::vector<CoalitionMask> enumerate_masks(int p) {
  check_feature_count(p, kMaxEnumerationFeatures);
  const std::size_t n = std::size_t{1} << p;
  std::vector<CoalitionMask> masks(n);
  for (std::size_t i = 0; i < n; ++i) {
    masks[i] = CoalitionMask{static_cast<std::uint32_t>(i), p};
  }
  return masks;
}

IncidenceMatrix incidence_matrix(std::span<const CoalitionMask> masks) {
  if (masks.empty()) {
    fail(ErrorKind::kStructural, "incidence matrix needs at least one mask");
  }
  const int p = masks.front().p;
  std::vector<std::uint32_t> rows;
  rows.reserve(masks.size());
  for (const auto& m : masks) {
    if (m.p != p) {
      fail(ErrorKind::kStructural,
           "masks disagree on feature count (" + std::to_string(p) + " vs " +
               std::to_string(m.p) + ")");
    }
    if (m.bits > CoalitionMask::full_bits(p)) {
      fail(ErrorKind::kStructural, "mask " + std::to_string(m.bits) +
                                       " exceeds feature count");
    }
    rows.push_back(m.bits);
  }
  return IncidenceMatrix(p, std::move(rows));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double shapley_kernel_weight(int p, int k) {
  if (k < 1 || k > p - 1) {
    fail(ErrorKind::kDomain,
         "kernel weight undefined for coalition size " + std::to_string(k) +
             " with p = " + std::to_string(p) +
             " (empty/grand coalitions take the infinite-weight substitute)");
  }
  return (p - 1.0) / (binomial(p, k) * k * (p - k));
}

WeightVector weight_vector(const PayoffTable& table, double infinite_multiplier) {
  const int p = table.p();
  if (p < 2) {
    fail(ErrorKind::kDomain, "weights need p >= 2: no finite coalition sizes");
  }
  if (!(infinite_multiplier >= 1.0) || !std::isfinite(infinite_multiplier)) {
    fail(ErrorKind::kDomain, "infinite-weight multiplier must be >= 1");
  }
  std::vector<double> by_size(p + 1, 0.0);
  double max_finite = 0.0;
  for (int k = 1; k <= p - 1; ++k) {
    by_size[k] = shapley_kernel_weight(p, k);
    max_finite = std::max(max_finite, by_size[k]);
  }
  by_size[0] = by_size[p] = infinite_multiplier * max_finite;

  WeightVector w;
  w.infinite_multiplier = infinite_multiplier;
  w.weights.resize(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    w.weights[i] = by_size[table[i].mask.size()];
  }
  return w;
}

PayoffTable baseline_adjust(const PayoffTable& table) {
  if (table.size() == 0 || table[0].mask.bits != 0) {
    fail(ErrorKind::kStructural, "baseline adjustment needs the empty coalition");
  }
  if (table.baseline_adjusted()) return table;
  const double base = table.empty_value();
  std::vector<PayoffEntry> entries = table.entries();
  for (auto& e : entries) e.value -= base;
  entries.front().value = 0.0;
  return PayoffTable::from_entries(table.p(), std::move(entries), true);
}

std::vector<CoalitionMask> sample_coalitions(int p, std::size_t m,
                                             std::uint64_t seed) {
  if (p < 2 || m < 2) {
    fail(ErrorKind::kDomain, "coalition sampling needs p >= 2 and m >= 2");
  }
  check_feature_count(p, kMaxFeatures);
  if (p <= kMaxEnumerationFeatures && m >= (std::size_t{1} << p)) {
    return enumerate_masks(p);
  }
  constexpr std::size_t kMaxSample = std::size_t{1} << 22;
  if (m > kMaxSample) {
    fail(ErrorKind::kCapacity, "sample budget " + std::to_string(m) +
                                   " exceeds 2^22 coalitions");
  }

  // Size distribution proportional to C(p,k) w(p,k) = (p-1)/(k(p-k)).
  std::vector<double> cumulative(p, 0.0);
  double total = 0.0;
  for (int k = 1; k <= p - 1; ++k) {
    total += (p - 1.0) / (static_cast<double>(k) * (p - k));
    cumulative[k] = total;
  }

  Rng rng(seed);
  const std::uint32_t full = CoalitionMask::full_bits(p);
  std::unordered_set<std::uint32_t> seen{0u, full};
  std::vector<std::uint32_t> chosen{0u, full};
  std::vector<int> pool(p);
  while (chosen.size() < m) {
    const double u = rng.uniform() * total;
    int k = 1;
    while (k < p - 1 && cumulative[k] < u) ++k;
    // Partial Fisher-Yates: first k slots of the pool form the subset.
    for (int j = 0; j < p; ++j) pool[j] = j;
    std::uint32_t bits = 0;
    for (int i = 0; i < k; ++i) {
      const int r = i + static_cast<int>(rng.below(p - i));
      std::swap(pool[i], pool[r]);
      bits |= 1u << pool[i];
    }
    if (seen.insert(bits).second) chosen.push_back(bits);
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<CoalitionMask> out;
  out.reserve(chosen.size());
  for (auto b : chosen) out.push_back(CoalitionMask{b, p});
  return out;
}

}  // namespace sisr
