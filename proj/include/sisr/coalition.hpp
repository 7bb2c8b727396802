#pragma once

#include <Eigen/Core>

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "sisr/error.hpp"

namespace sisr {

// Largest feature count for which a full 2^p enumeration is materialized.
inline constexpr int kMaxEnumerationFeatures = 20;
// Largest feature count a mask can address at all (sampled tables).
inline constexpr int kMaxFeatures = 30;
inline constexpr double kDefaultInfiniteMultiplier = 10.0;

/// A feature subset A of {1..p}. Bit (j-1) is set iff feature j is in A.
struct CoalitionMask {
  std::uint32_t bits = 0;
  int p = 0;

  /// Zero-based membership test: feature j+1 is in the coalition.
  bool contains(int j) const { return (bits >> j) & 1u; }
  int size() const { return std::popcount(bits); }
  bool empty() const { return bits == 0; }
  bool grand() const { return bits == full_bits(p); }

  static constexpr std::uint32_t full_bits(int p) {
    return p >= 32 ? ~0u : ((1u << p) - 1u);
  }

  friend bool operator==(const CoalitionMask&, const CoalitionMask&) = default;
};

/// Calls fn(j) for every zero-based feature index j set in bits, ascending.
template <class Fn>
inline void for_each_member(std::uint32_t bits, Fn&& fn) {
  while (bits != 0) {
    fn(std::countr_zero(bits));
    bits &= bits - 1;
  }
}

struct PayoffEntry {
  CoalitionMask mask;
  double value = 0.0;
};

/// Coalition payoffs in lexicographic binary order. Construction validates
/// that masks are in range and unique and that the empty and grand
/// coalitions are both present.
class PayoffTable {
 public:
  PayoffTable() = default;

  /// Entries may arrive in any order; they are stored sorted by mask bits.
  static PayoffTable from_entries(int p, std::vector<PayoffEntry> entries,
                                  bool baseline_adjusted = false);

  /// Full enumeration from values indexed by mask bits (values.size() == 2^p).
  static PayoffTable from_values(int p, std::span<const double> values);

  int p() const { return p_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<PayoffEntry>& entries() const { return entries_; }
  const PayoffEntry& operator[](std::size_t i) const { return entries_[i]; }
  bool baseline_adjusted() const { return baseline_adjusted_; }
  bool full_enumeration() const { return full_enumeration_; }

  /// Payoff of the empty coalition.
  double empty_value() const { return entries_.front().value; }
  /// Payoff of the grand coalition.
  double grand_value() const { return entries_.back().value; }

  /// Value lookup by mask; throws kStructural if the mask is absent.
  double value(std::uint32_t bits) const;
  bool has(std::uint32_t bits) const;

  Eigen::VectorXd values() const;
  std::vector<CoalitionMask> masks() const;

 private:
  int p_ = 0;
  std::vector<PayoffEntry> entries_;
  bool baseline_adjusted_ = false;
  bool full_enumeration_ = false;
};

/// Per-entry regression weights; the empty and grand coalitions carry the
/// finite stand-in for an infinite weight.
struct WeightVector {
  Eigen::VectorXd weights;
  double infinite_multiplier = kDefaultInfiniteMultiplier;
};

/// 0/1 incidence structure. Stored as masks; rows are materialized on demand
/// since every product with Z is done by iterating set bits.
class IncidenceMatrix {
 public:
  IncidenceMatrix() = default;
  IncidenceMatrix(int p, std::vector<std::uint32_t> rows)
      : p_(p), rows_(std::move(rows)) {}

  int p() const { return p_; }
  std::size_t rows() const { return rows_.size(); }
  std::uint32_t row_bits(std::size_t i) const { return rows_[i]; }
  const std::vector<std::uint32_t>& row_masks() const { return rows_; }
  int operator()(std::size_t i, int j) const { return (rows_[i] >> j) & 1u; }

  Eigen::MatrixXd dense() const;

  /// delta = Z * gamma. Only coordinates set in support_bits are read.
  Eigen::VectorXd multiply(const Eigen::VectorXd& gamma,
                           std::uint32_t support_bits) const;
  Eigen::VectorXd multiply(const Eigen::VectorXd& gamma) const;
  /// Z^T * diag(w) * t.
  Eigen::VectorXd weighted_transpose_multiply(const Eigen::VectorXd& w,
                                              const Eigen::VectorXd& t) const;
  /// Z^T * diag(w) * Z.
  Eigen::MatrixXd weighted_gram(const Eigen::VectorXd& w) const;

 private:
  int p_ = 0;
  std::vector<std::uint32_t> rows_;
};

std::vector<CoalitionMask> enumerate_masks(int p);

IncidenceMatrix incidence_matrix(std::span<const CoalitionMask> masks);

/// Shapley kernel weight (p-1) / (C(p,k) k (p-k)) for 1 <= k <= p-1.
double shapley_kernel_weight(int p, int k);

double binomial(int n, int k);

WeightVector weight_vector(const PayoffTable& table,
                           double infinite_multiplier = kDefaultInfiniteMultiplier);

/// Subtracts the empty-coalition payoff from every entry. Idempotent.
PayoffTable baseline_adjust(const PayoffTable& table);

/// Deterministic coalition sample that always contains the empty and grand
/// coalitions. Sizes are drawn proportionally to C(p,k) * w(p,k), then a
/// uniform mask of that size; duplicates are rejected. Saturates to the full
/// enumeration when m >= 2^p.
std::vector<CoalitionMask> sample_coalitions(int p, std::size_t m,
                                             std::uint64_t seed);

}  // namespace sisr
