#include "csflood/metrics.hpp"

#include <cmath>
#include <string>

#include "csflood/errors.hpp"

namespace csflood {

double reconstruction_error(const Eigen::VectorXd& x_hat, const Eigen::VectorXd& x0) {
  if (x_hat.size() != x0.size()) {
    throw ShapeError("x_hat and x0 differ in length");
  }
  const double ref = x0.norm();
  if (ref == 0.0) {
    throw MetricError("reconstruction error is undefined for x0 = 0");
  }
  return (x_hat - x0).norm() / ref;
}

double overhead_conventional(int n_nodes, int hops, const OverheadModel& model) {
  if (hops < 1) {
    throw ParameterError("hop count must be at least 1");
  }
  const double aodv = model.b_rreq * (n_nodes - 1) + model.b_rrep * hops;
  const double mac = model.mac_bytes_per_hop * hops;
  return aodv + mac;
}

double overhead_proposed(int seq_len, double packets_total) {
  return seq_len * packets_total / 8.0;
}

double overhead_cdma(int n_nodes, int max_hops, double packets_total, CdmaCodeLength rule) {
  const int code_len =
      rule == CdmaCodeLength::kPerOriginHop ? n_nodes * (max_hops + 1) : n_nodes * max_hops;
  return code_len * packets_total / 8.0;
}

ExperimentSummary summarize(std::span<const SessionResult> results, const SessionConfig& config,
                            const OverheadModel& model, CdmaCodeLength rule) {
  if (results.empty()) {
    throw ParameterError("cannot summarize an empty result list");
  }
  const SensingParams& sp = config.sensing;
  const LatticeTopology topo(sp.n_nodes, config.sink);

  ExperimentSummary s;
  s.sessions = static_cast<int>(results.size());
  double sum_sq = 0.0;
  double packets = 0.0;
  double sources = 0.0;
  for (const auto& r : results) {
    const double e = reconstruction_error(r.x_hat, r.x0);
    s.mean_error += e;
    sum_sq += e * e;
    packets += static_cast<double>(r.packets_sent);
    sources += static_cast<double>(r.events.size());
  }
  const double count = static_cast<double>(results.size());
  s.mean_error /= count;
  s.error_std = std::sqrt(std::max(0.0, sum_sq / count - s.mean_error * s.mean_error));
  s.mean_packets = packets / count;
  s.mean_bytes_proposed = overhead_proposed(sp.seq_len, s.mean_packets);
  s.mean_bytes_cdma = overhead_cdma(sp.n_nodes, sp.max_hops, s.mean_packets, rule);
  const double k = sources / count;
  s.mean_bytes_conv_min = k * overhead_conventional(sp.n_nodes, 1, model);
  s.mean_bytes_conv_max = k * overhead_conventional(sp.n_nodes, topo.farthest_corner_hops(), model);
  return s;
}

}  // namespace csflood
