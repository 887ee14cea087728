#pragma once

#include <span>

#include <Eigen/Dense>

#include "csflood/network.hpp"

namespace csflood {

/// Byte/bit constants of the AODV + MAC reference scheme.
struct OverheadModel {
  double b_rreq = 32.0;     ///< bytes per route request
  double b_rrep = 28.0;     ///< bytes per route reply
  double b_id_data = 11.0;  ///< bits of id + data per MAC frame
  double b_crc = 8.0;       ///< CRC bits per MAC frame
  /// MAC bytes per hop. (11 + 8) bits would be 2.375; the customary rounded
  /// 2.5 is used.
  double mac_bytes_per_hop = 2.5;
};

/// Length rule for orthogonal CDMA codes.
enum class CdmaCodeLength {
  kPerOriginHop,  ///< N(L+1), one code per (origin, hop 0..L)
  kLiteralNL,     ///< N·L
};

struct ExperimentSummary {
  double mean_error = 0.0;
  double error_std = 0.0;
  double mean_packets = 0.0;
  double mean_bytes_proposed = 0.0;
  double mean_bytes_cdma = 0.0;
  double mean_bytes_conv_min = 0.0;
  double mean_bytes_conv_max = 0.0;
  int sessions = 0;
};

/// ‖x̂ − x₀‖₂ / ‖x₀‖₂. Throws MetricError when x₀ = 0, ShapeError on length mismatch.
double reconstruction_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0);

/// B_AODV + B_MAC for one source measurement over h hops, in bytes.
double overhead_conventional(int n_nodes, int hops, const OverheadModel& model = {});

/// M·P/8 bytes.
double overhead_proposed(int seq_len, double packets_total);

/// code_length(N, L)·P/8 bytes.
double overhead_cdma(int n_nodes, int max_hops, double packets_total,
                     CdmaCodeLength rule = CdmaCodeLength::kPerOriginHop);

/// Means and (population) standard deviation over sessions. Conventional
/// bounds use h = 1 and h = farthest corner-to-sink distance, times K.
/// Throws ParameterError on an empty list.
ExperimentSummary summarize(std::span<const SessionResult> results, const SessionConfig& config,
                            const OverheadModel& model = {},
                            CdmaCodeLength rule = CdmaCodeLength::kPerOriginHop);

}  // namespace csflood
