#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

namespace csflood {

/// Sensor identifier. `value` is 1-based (S_1..S_N); `index()` is the 0-based
/// position used for storage.
struct NodeId {
  int value = 0;

  constexpr int index() const noexcept { return value - 1; }
  static constexpr NodeId from_index(int i) noexcept { return NodeId{i + 1}; }

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct SensingParams {
  int n_nodes = 0;   ///< N
  int max_hops = 0;  ///< L, the time-to-live in hops
  int seq_len = 0;   ///< M, chips per packet
  std::uint64_t seed = 0;

  /// Q = N(L+1): one column per (origin, hop) with hop in 0..L.
  int columns() const noexcept { return n_nodes * (max_hops + 1); }

  /// Throws ParameterError unless N ≥ 2, L ≥ 1, M ≥ 1 and M < Q.
  void validate() const;
};

struct OriginHop {
  NodeId origin;
  int hop = 0;

  friend constexpr auto operator<=>(const OriginHop&, const OriginHop&) = default;
};

/// Column of the (origin, hop) signature: (origin-1)(L+1) + hop.
int column_index(const SensingParams& params, NodeId origin, int hop);

/// Inverse of column_index.
OriginHop column_origin_hop(const SensingParams& params, int column);

/// The M × N(L+1) Bernoulli ±1 matrix of signature sequences a_{n,l}.
///
/// Entry (r, c) is drawn from counter-mode SplitMix64 seeded with
/// `params.seed`, in row-major order: draw number r·Q + c, value +1 when the
/// top bit is set and −1 otherwise. Immutable once built.
class SignatureMatrix {
 public:
  /// Throws ParameterError on invalid params.
  static SignatureMatrix generate(const SensingParams& params);

  const SensingParams& params() const noexcept { return params_; }
  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  int rows() const noexcept { return static_cast<int>(entries_.rows()); }
  int cols() const noexcept { return static_cast<int>(entries_.cols()); }

  /// σ_max(A)², cached at construction for the ISTA step size.
  double lipschitz() const noexcept { return lipschitz_; }

  Eigen::VectorXd sequence_of(NodeId origin, int hop) const;

  /// One row per line, entries "1"/"-1" separated by single spaces.
  void write_text(std::ostream& out) const;

 private:
  SignatureMatrix(SensingParams params, Eigen::MatrixXd entries);

  SensingParams params_;
  Eigen::MatrixXd entries_;
  double lipschitz_ = 0.0;
};

}  // namespace csflood
