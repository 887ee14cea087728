#include "csflood/sensing.hpp"

#include <ostream>
#include <string>

#include "csflood/errors.hpp"
#include "csflood/linalg.hpp"
#include "csflood/rng.hpp"

namespace csflood {

void SensingParams::validate() const {
  if (n_nodes < 2) {
    throw ParameterError("n_nodes must be at least 2, got " + std::to_string(n_nodes));
  }
  if (max_hops < 1) {
    throw ParameterError("max_hops must be at least 1, got " + std::to_string(max_hops));
  }
  if (seq_len < 1) {
    throw ParameterError("seq_len must be at least 1, got " + std::to_string(seq_len));
  }
  if (seq_len >= columns()) {
    throw ParameterError("seq_len " + std::to_string(seq_len) +
                         " must be below N(L+1) = " + std::to_string(columns()));
  }
}

int column_index(const SensingParams& params, NodeId origin, int hop) {
  if (origin.value < 1 || origin.value > params.n_nodes) {
    throw IndexError("origin " + std::to_string(origin.value) + " outside 1.." +
                     std::to_string(params.n_nodes));
  }
  if (hop < 0 || hop > params.max_hops) {
    throw IndexError("hop " + std::to_string(hop) + " outside 0.." +
                     std::to_string(params.max_hops));
  }
  return origin.index() * (params.max_hops + 1) + hop;
}

OriginHop column_origin_hop(const SensingParams& params, int column) {
  if (column < 0 || column >= params.columns()) {
    throw IndexError("column " + std::to_string(column) + " outside 0.." +
                     std::to_string(params.columns() - 1));
  }
  const int per_node = params.max_hops + 1;
  return OriginHop{NodeId::from_index(column / per_node), column % per_node};
}

SignatureMatrix::SignatureMatrix(SensingParams params, Eigen::MatrixXd entries)
    : params_(params), entries_(std::move(entries)), lipschitz_(spectral_norm_sq(entries_)) {}

SignatureMatrix SignatureMatrix::generate(const SensingParams& params) {
  params.validate();
  const int m = params.seq_len;
  const int q = params.columns();
  Eigen::MatrixXd a(m, q);
  SplitMix64 gen(params.seed);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < q; ++c) {
      a(r, c) = (gen() >> 63) != 0 ? 1.0 : -1.0;
    }
  }
  return SignatureMatrix(params, std::move(a));
}

Eigen::VectorXd SignatureMatrix::sequence_of(NodeId origin, int hop) const {
  return entries_.col(column_index(params_, origin, hop));
}

void SignatureMatrix::write_text(std::ostream& out) const {
  for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
      if (c != 0) {
        out << ' ';
      }
      out << (entries_(r, c) > 0 ? "1" : "-1");
    }
    out << '\n';
  }
}

}  // namespace csflood
