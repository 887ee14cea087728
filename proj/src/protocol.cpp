#include "csflood/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "csflood/errors.hpp"

namespace csflood {

std::optional<int> NodeState::min_hop(NodeId origin) const {
  const auto it = table.lower_bound(OriginHop{origin, std::numeric_limits<int>::min()});
  if (it == table.end() || it->origin != origin) {
    return std::nullopt;
  }
  return it->hop;
}

Eigen::VectorXd superpose(std::span<const DecodedMeasurement> entries, const SignatureMatrix& a) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.rows());
  for (const auto& e : entries) {
    out += e.value * a.entries().col(column_index(a.params(), e.origin, e.hop));
  }
  return out;
}

Packet originate(NodeState& state, int value, const SignatureMatrix& a) {
  if (value != 1 && value != -1) {
    throw ParameterError("measurement value must be +1 or -1, got " + std::to_string(value));
  }
  state.table.insert(OriginHop{state.id, 0});
  return Packet{value * a.sequence_of(state.id, 0), state.id};
}

namespace {

IstaConfig checked(IstaConfig config, double tau) {
  config.validate();
  if (!(tau > 0.0)) {
    throw ParameterError("quantization threshold tau must be positive");
  }
  return config;
}

}  // namespace

ReceiverDecoder::ReceiverDecoder(const SignatureMatrix& a, IstaConfig config, double tau)
    : params_(a.params()),
      config_(checked(std::move(config), tau)),
      tau_(tau),
      scale_(1.0 / std::sqrt(static_cast<double>(a.rows()))),
      solver_(a.entries() * scale_, a.lipschitz() * scale_ * scale_) {}

Eigen::VectorXd ReceiverDecoder::estimate(const Eigen::VectorXd& y, IstaTrace* trace) const {
  return solver_.solve(y, config_, trace) * scale_;
}

std::vector<DecodedMeasurement> ReceiverDecoder::decode(const Eigen::VectorXd& y) const {
  return quantize_support(estimate(y), params_, tau_);
}

std::vector<DecodedMeasurement> decode_received(const Eigen::VectorXd& y, const SignatureMatrix& a,
                                                const IstaConfig& config, double tau) {
  return ReceiverDecoder(a, config, tau).decode(y);
}

std::vector<DecodedMeasurement> filter_duplicates(NodeState& state,
                                                  std::span<const DecodedMeasurement> decoded) {
  std::vector<DecodedMeasurement> kept;
  for (const auto& d : decoded) {
    const auto seen = state.min_hop(d.origin);
    if (!seen || *seen > d.hop) {
      kept.push_back(d);
    }
    state.table.insert(d.key());
  }
  return kept;
}

std::optional<Packet> build_forward_packet(NodeState& state,
                                           std::span<const DecodedMeasurement> kept,
                                           const SignatureMatrix& a) {
  const int ttl = a.params().max_hops;
  std::vector<DecodedMeasurement> fresh;
  for (const auto& k : kept) {
    DecodedMeasurement next{k.origin, k.hop + 1, k.value};
    if (next.hop > ttl) {
      continue;
    }
    const auto same_key = [&](const DecodedMeasurement& e) { return e.key() == next.key(); };
    if (std::ranges::any_of(fresh, same_key) || std::ranges::any_of(state.outbound, same_key)) {
      continue;
    }
    fresh.push_back(next);
  }
  if (fresh.empty()) {
    return std::nullopt;
  }
  state.outbound.insert(state.outbound.end(), fresh.begin(), fresh.end());
  return Packet{superpose(fresh, a), state.id};
}

void sink_ingest(SinkState& sink, std::span<const DecodedMeasurement> decoded, int slot) {
  for (const auto& d : decoded) {
    sink.votes[d.origin.value] += d.value;
    sink.first_seen.try_emplace(d.origin.value, slot);
  }
}

Eigen::VectorXd sink_finalize(const SinkState& sink, int n_nodes) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_nodes);
  for (const auto& [origin, total] : sink.votes) {
    if (origin < 1 || origin > n_nodes) {
      throw IndexError("sink vote for unknown origin " + std::to_string(origin));
    }
    if (total != 0) {
      x[origin - 1] = total > 0 ? 1.0 : -1.0;
    }
  }
  return x;
}

}  // namespace csflood
