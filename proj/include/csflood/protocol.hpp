#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "csflood/sensing.hpp"
#include "csflood/solver.hpp"

namespace csflood {

/// Superimposed transmission p_k = Σ v·a_{j,l}.
struct Packet {
  Eigen::VectorXd payload;
  NodeId transmitter;
};

/// Per-node protocol state: the duplicate table and the measurements
/// queued for the next transmit slot (hop stamps already incremented).
struct NodeState {
  NodeId id;
  std::set<OriginHop> table;
  std::vector<DecodedMeasurement> outbound;

  /// Smallest hop recorded for `origin`, if any.
  std::optional<int> min_hop(NodeId origin) const;
};

/// Sink-side diversity accumulator.
struct SinkState {
  std::map<int, int> votes;       ///< origin id → Σ decoded ±1 values
  std::map<int, int> first_seen;  ///< origin id → slot of first decode
};

/// Σ v·a_{origin,hop} over `entries`. Length M.
Eigen::VectorXd superpose(std::span<const DecodedMeasurement> entries, const SignatureMatrix& a);

/// A new event at the node. Returns value·a_{id,0} and records (id, 0)
/// in the node's table. Throws ParameterError unless value is ±1.
Packet originate(NodeState& state, int value, const SignatureMatrix& a);

/// Receiver-side decoder. ISTA runs against the unit-norm columns A/√M, so λ
/// is measured on the scale of one normalized signature; the estimate is then
/// renormalized by 1/√M back to the ±1 measurement scale and quantized with
/// the dead zone `tau`.
class ReceiverDecoder {
 public:
  /// Throws ParameterError on an invalid config or tau ≤ 0.
  ReceiverDecoder(const SignatureMatrix& a, IstaConfig config, double tau);

  /// Estimate of x on the ±1 scale (before quantization).
  Eigen::VectorXd estimate(const Eigen::VectorXd& y, IstaTrace* trace = nullptr) const;

  std::vector<DecodedMeasurement> decode(const Eigen::VectorXd& y) const;

  const IstaConfig& config() const noexcept { return config_; }
  double tau() const noexcept { return tau_; }

 private:
  SensingParams params_;
  IstaConfig config_;
  double tau_;
  double scale_;  // 1/√M
  IstaSolver solver_;
};

/// One-shot ReceiverDecoder(a, config, tau).decode(y).
std::vector<DecodedMeasurement> decode_received(const Eigen::VectorXd& y, const SignatureMatrix& a,
                                                const IstaConfig& config, double tau);

/// Duplicate-table rule. A decoded (j, l) is dropped when the table already
/// holds (j, l') with l' ≤ l and kept otherwise; every decoded pair is then
/// recorded. Output keeps input order.
std::vector<DecodedMeasurement> filter_duplicates(NodeState& state,
                                                  std::span<const DecodedMeasurement> decoded);

/// Increments hops, drops anything past L, collapses repeated (origin, hop),
/// appends the survivors to `state.outbound` and returns their superposition.
/// Returns nullopt when nothing survives.
std::optional<Packet> build_forward_packet(NodeState& state,
                                           std::span<const DecodedMeasurement> kept,
                                           const SignatureMatrix& a);

void sink_ingest(SinkState& sink, std::span<const DecodedMeasurement> decoded, int slot);

/// x̂_j = sign(votes[j]); zero for ties and for origins never heard.
Eigen::VectorXd sink_finalize(const SinkState& sink, int n_nodes);

}  // namespace csflood
