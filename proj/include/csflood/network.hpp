#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "csflood/protocol.hpp"
#include "csflood/sensing.hpp"
#include "csflood/solver.hpp"

namespace csflood {

/// Square lattice, nodes numbered row-major from S_1 at the top-left corner.
/// Each node hears its 4-connected neighbors at distance d.
class LatticeTopology {
 public:
  /// Throws ParameterError unless n_nodes is a perfect square ≥ 4. The sink
  /// defaults to the center node (row and column (side-1)/2).
  explicit LatticeTopology(int n_nodes, std::optional<NodeId> sink = std::nullopt,
                           double spacing = 1.0);

  int side() const noexcept { return side_; }
  int n_nodes() const noexcept { return side_ * side_; }
  NodeId sink() const noexcept { return sink_; }
  double spacing() const noexcept { return spacing_; }

  /// Sorted ascending. Throws IndexError for an unknown node.
  const std::vector<NodeId>& neighbors(NodeId node) const;

  /// Manhattan distance in hops.
  int hop_distance(NodeId a, NodeId b) const;

  /// Largest hop distance from any corner to the sink.
  int farthest_corner_hops() const;

  /// (row + col) mod 2.
  int color(NodeId node) const;

  NodeId at(int row, int col) const { return NodeId::from_index(row * side_ + col); }

 private:
  void check(NodeId node) const;

  int side_ = 0;
  double spacing_ = 1.0;
  NodeId sink_;
  std::vector<std::vector<NodeId>> adjacency_;
};

struct ChannelModel {
  double snr_db = 10.0;

  /// σ² = 10^(−snr_db/10) per chip for a unit-amplitude transmitter.
  double noise_variance() const;
};

using SessionRng = std::mt19937_64;

/// Σ payloads + z with z ~ N(0, σ²) i.i.d. per chip. An empty list gives pure
/// noise of length `seq_len`.
Eigen::VectorXd superimpose_with_noise(std::span<const Packet> packets, int seq_len,
                                       const ChannelModel& channel, SessionRng& rng);

/// Event detected by a source node at a given slot.
struct SourceEvent {
  NodeId node;
  int slot = 0;
  int value = 1;
};

/// When a freshly detected event goes on the air.
enum class OriginationTiming {
  /// Hold the event until the first slot whose parity equals the source's
  /// lattice color ((row + col) mod 2). Forwarding on a bipartite lattice keeps
  /// that alignment, so every flood runs in the same phase and no node is
  /// transmitting while a neighbor sends it something new.
  kLatticeParity,
  /// Transmit in the detection slot.
  kImmediate,
};

struct SessionConfig {
  SensingParams sensing;
  int k_sources = 1;
  int t_out = 30;
  ChannelModel channel;
  IstaConfig ista;
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::optional<NodeId> sink;
  /// When non-empty, replaces the random draw of sources, slots and values.
  std::vector<SourceEvent> scripted_events;
  OriginationTiming origination = OriginationTiming::kLatticeParity;
  bool record_trace = false;

  void validate() const;
};

enum class TraceAction { kOriginate, kTransmit, kDecode, kDiscard, kForward, kSinkIngest };

std::string_view to_string(TraceAction action);

/// One protocol-trace line. `origin`/`hop` describe the measurement involved.
struct TraceEvent {
  int slot = 0;
  NodeId node;
  TraceAction action = TraceAction::kTransmit;
  NodeId origin;
  int hop = 0;
  int value = 0;
};

struct SlotStats {
  int transmitters = 0;
  int decodes = 0;             ///< receivers that ran the decoder
  int decoded_measurements = 0;
};

struct SessionResult {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd x0;
  long packets_sent = 0;
  int slots_run = 0;
  std::vector<SlotStats> per_slot;
  std::vector<SourceEvent> events;
  std::vector<TraceEvent> trace;  ///< filled only with record_trace
};

/// Runs one slotted flooding session. Throws ParameterError on invalid config
/// or when `a` does not match config.sensing.
SessionResult run_session(const SessionConfig& config, const SignatureMatrix& a);

/// CSV with header "slot,node,action,origin,hop,value".
void write_trace_csv(std::span<const TraceEvent> trace, std::ostream& out);

}  // namespace csflood
