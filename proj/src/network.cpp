#include "csflood/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <set>
#include <ostream>
#include <string>

#include "csflood/errors.hpp"

namespace csflood {

LatticeTopology::LatticeTopology(int n_nodes, std::optional<NodeId> sink, double spacing)
    : spacing_(spacing) {
  int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(n_nodes, 0)))));
  if (n_nodes < 4 || side * side != n_nodes) {
    throw ParameterError("lattice needs a perfect square of at least 4 nodes, got " +
                         std::to_string(n_nodes));
  }
  if (!(spacing > 0.0)) {
    throw ParameterError("lattice spacing must be positive");
  }
  side_ = side;
  sink_ = sink.value_or(at((side - 1) / 2, (side - 1) / 2));
  check(sink_);

  adjacency_.resize(n_nodes);
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      auto& nbrs = adjacency_[r * side + c];
      if (r > 0) nbrs.push_back(at(r - 1, c));
      if (c > 0) nbrs.push_back(at(r, c - 1));
      if (c + 1 < side) nbrs.push_back(at(r, c + 1));
      if (r + 1 < side) nbrs.push_back(at(r + 1, c));
    }
  }
}

void LatticeTopology::check(NodeId node) const {
  if (node.value < 1 || node.value > n_nodes()) {
    throw IndexError("node " + std::to_string(node.value) + " outside 1.." +
                     std::to_string(n_nodes()));
  }
}

const std::vector<NodeId>& LatticeTopology::neighbors(NodeId node) const {
  check(node);
  return adjacency_[node.index()];
}

int LatticeTopology::hop_distance(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return std::abs(a.index() / side_ - b.index() / side_) +
         std::abs(a.index() % side_ - b.index() % side_);
}

int LatticeTopology::farthest_corner_hops() const {
  const int last = side_ - 1;
  return std::max({hop_distance(at(0, 0), sink_), hop_distance(at(0, last), sink_),
                   hop_distance(at(last, 0), sink_), hop_distance(at(last, last), sink_)});
}

int LatticeTopology::color(NodeId node) const {
  check(node);
  return (node.index() / side_ + node.index() % side_) % 2;
}

double ChannelModel::noise_variance() const { return std::pow(10.0, -snr_db / 10.0); }

Eigen::VectorXd superimpose_with_noise(std::span<const Packet> packets, int seq_len,
                                       const ChannelModel& channel, SessionRng& rng) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(seq_len);
  for (const auto& p : packets) {
    if (p.payload.size() != seq_len) {
      throw ShapeError("packet payload length " + std::to_string(p.payload.size()) +
                       " differs from M = " + std::to_string(seq_len));
    }
    y += p.payload;
  }
  const double variance = channel.noise_variance();
  if (variance > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(variance));
    for (int i = 0; i < seq_len; ++i) {
      y[i] += noise(rng);
    }
  }
  return y;
}

void SessionConfig::validate() const {
  sensing.validate();
  ista.validate();
  if (t_out < 1) {
    throw ParameterError("t_out must be at least 1");
  }
  if (!(tau > 0.0)) {
    throw ParameterError("tau must be positive");
  }
  if (std::isnan(channel.snr_db) || channel.snr_db == -std::numeric_limits<double>::infinity()) {
    throw ParameterError("snr_db must be a number above -inf");
  }
  const LatticeTopology topo(sensing.n_nodes, sink);
  if (scripted_events.empty()) {
    if (k_sources < 1 || k_sources > sensing.n_nodes - 1) {
      throw ParameterError("k_sources must lie in 1..N-1, got " + std::to_string(k_sources));
    }
    return;
  }
  std::set<NodeId> seen;
  for (const auto& e : scripted_events) {
    if (e.node.value < 1 || e.node.value > sensing.n_nodes) {
      throw ParameterError("scripted source " + std::to_string(e.node.value) + " is not a node");
    }
    if (e.node == topo.sink()) {
      throw ParameterError("the sink cannot be an event source");
    }
    if (!seen.insert(e.node).second) {
      throw ParameterError("scripted sources must be distinct");
    }
    if (e.slot < 0 || e.slot >= t_out) {
      throw ParameterError("scripted event slot outside the session");
    }
    if (e.value != 1 && e.value != -1) {
      throw ParameterError("scripted event value must be +1 or -1");
    }
  }
}

std::string_view to_string(TraceAction action) {
  switch (action) {
    case TraceAction::kOriginate: return "originate";
    case TraceAction::kTransmit: return "transmit";
    case TraceAction::kDecode: return "decode";
    case TraceAction::kDiscard: return "discard";
    case TraceAction::kForward: return "forward";
    case TraceAction::kSinkIngest: return "sink_ingest";
  }
  return "unknown";
}

namespace {

std::vector<SourceEvent> draw_events(const SessionConfig& config, NodeId sink, SessionRng& rng) {
  std::vector<NodeId> candidates;
  for (int i = 0; i < config.sensing.n_nodes; ++i) {
    if (NodeId::from_index(i) != sink) {
      candidates.push_back(NodeId::from_index(i));
    }
  }
  // Partial Fisher-Yates: the first K entries become the sources.
  std::vector<SourceEvent> events;
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> when(0, config.t_out / 2);
  for (int k = 0; k < config.k_sources; ++k) {
    std::uniform_int_distribution<int> pick(k, static_cast<int>(candidates.size()) - 1);
    std::swap(candidates[k], candidates[pick(rng)]);
    const int value = coin(rng) == 1 ? 1 : -1;
    events.push_back(SourceEvent{candidates[k], when(rng), value});
  }
  return events;
}

}  // namespace

SessionResult run_session(const SessionConfig& config, const SignatureMatrix& a) {
  config.validate();
  const SensingParams& sp = config.sensing;
  if (a.params().n_nodes != sp.n_nodes || a.params().max_hops != sp.max_hops ||
      a.params().seq_len != sp.seq_len) {
    throw ParameterError("signature matrix does not match the session's sensing params");
  }
  const LatticeTopology topo(sp.n_nodes, config.sink);
  const int n = sp.n_nodes;
  const NodeId sink_id = topo.sink();
  SessionRng rng(config.seed);

  SessionResult result;
  result.events = config.scripted_events.empty() ? draw_events(config, sink_id, rng)
                                                 : config.scripted_events;
  result.x0 = Eigen::VectorXd::Zero(n);
  std::vector<std::vector<const SourceEvent*>> events_at(config.t_out);
  for (const auto& e : result.events) {
    result.x0[e.node.index()] = e.value;
    int fire = e.slot;
    if (config.origination == OriginationTiming::kLatticeParity && fire % 2 != topo.color(e.node)) {
      ++fire;
    }
    // An event detected in the final slot with the wrong parity never goes out.
    if (fire < config.t_out) {
      events_at[fire].push_back(&e);
    }
  }
  const ReceiverDecoder decoder(a, config.ista, config.tau);

  std::vector<NodeState> nodes(n);
  for (int i = 0; i < n; ++i) {
    nodes[i].id = NodeId::from_index(i);
  }
  SinkState sink;
  auto log = [&](int slot, NodeId node, TraceAction action, const DecodedMeasurement& m) {
    if (config.record_trace) {
      result.trace.push_back(TraceEvent{slot, node, action, m.origin, m.hop, m.value});
    }
  };

  std::vector<std::optional<Packet>> on_air(n);
  for (int slot = 0; slot < config.t_out; ++slot) {
    SlotStats stats;

    // Transmit phase. Queued forwards and a freshly fired event share one packet.
    for (const SourceEvent* e : events_at[slot]) {
      NodeState& src = nodes[e->node.index()];
      originate(src, e->value, a);
      DecodedMeasurement own{src.id, 0, e->value};
      src.outbound.push_back(own);
      log(slot, src.id, TraceAction::kOriginate, own);
    }
    for (int i = 0; i < n; ++i) {
      on_air[i].reset();
      NodeState& node = nodes[i];
      if (node.id == sink_id || node.outbound.empty()) {
        continue;
      }
      for (const auto& m : node.outbound) {
        log(slot, node.id, TraceAction::kTransmit, m);
      }
      on_air[i] = Packet{superpose(node.outbound, a), node.id};
      node.outbound.clear();
      ++stats.transmitters;
      ++result.packets_sent;
    }

    // Receive phase: half-duplex, so only silent nodes listen.
    std::vector<Packet> heard;
    for (int i = 0; i < n; ++i) {
      if (on_air[i]) {
        continue;
      }
      NodeState& node = nodes[i];
      heard.clear();
      for (NodeId nb : topo.neighbors(node.id)) {
        if (on_air[nb.index()]) {
          heard.push_back(*on_air[nb.index()]);
        }
      }
      if (heard.empty()) {
        continue;
      }
      const Eigen::VectorXd y = superimpose_with_noise(heard, sp.seq_len, config.channel, rng);
      const auto decoded = decoder.decode(y);
      ++stats.decodes;
      stats.decoded_measurements += static_cast<int>(decoded.size());
      for (const auto& d : decoded) {
        log(slot, node.id, TraceAction::kDecode, d);
      }

      if (node.id == sink_id) {
        sink_ingest(sink, decoded, slot);
        for (const auto& d : decoded) {
          log(slot, node.id, TraceAction::kSinkIngest, d);
        }
        continue;
      }
      const auto kept = filter_duplicates(node, decoded);
      if (config.record_trace) {
        for (const auto& d : decoded) {
          if (std::ranges::find(kept, d) == kept.end()) {
            log(slot, node.id, TraceAction::kDiscard, d);
          }
        }
      }
      const std::size_t before = node.outbound.size();
      build_forward_packet(node, kept, a);
      for (std::size_t k = before; k < node.outbound.size(); ++k) {
        log(slot, node.id, TraceAction::kForward, node.outbound[k]);
      }
    }
    result.per_slot.push_back(stats);
  }

  result.slots_run = config.t_out;
  result.x_hat = sink_finalize(sink, n);
  return result;
}

void write_trace_csv(std::span<const TraceEvent> trace, std::ostream& out) {
  out << "slot,node,action,origin,hop,value\n";
  for (const auto& e : trace) {
    out << e.slot << ',' << e.node.value << ',' << to_string(e.action) << ',' << e.origin.value
        << ',' << e.hop << ',' << e.value << '\n';
  }
}

}  // namespace csflood
