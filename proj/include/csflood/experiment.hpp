#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csflood/metrics.hpp"
#include "csflood/network.hpp"

namespace csflood {

/// Cartesian product of parameter lists. Cells are enumerated with `n` as the
/// outermost loop, then m, l_ttl, k, lambda, t_out, snr_db, tau.
struct GridBlock {
  std::vector<int> n;
  std::vector<int> m;
  std::vector<int> l_ttl;
  std::vector<int> k;
  std::vector<double> lambda{0.5};
  std::vector<int> t_out{30};
  std::vector<double> snr_db{10.0};
  std::vector<double> tau{0.5};
};

struct ExperimentSpec {
  std::vector<GridBlock> grids;
  int sessions_per_cell = 300;
  std::string output;
  std::uint64_t master_seed = 1;
  /// Seed of the signature matrices; defaults to master_seed.
  std::optional<std::uint64_t> matrix_seed;
  /// Draw a fresh signature matrix for every session instead of one per (N, M, L).
  bool redraw_signatures = false;
  std::optional<int> sink;
  int max_iters = 2000;
  double tol = 1e-5;
  CdmaCodeLength cdma_rule = CdmaCodeLength::kPerOriginHop;
};

/// Parses the JSON experiment document and fills defaults. Throws SpecError
/// naming the offending field on malformed input or invalid ranges.
///
/// Numeric grid entries accept a scalar, an array, a {"from", "to", "step"}
/// object, or a "from..to" / "from..to:step" string.
ExperimentSpec parse_spec(std::string_view document);

/// One SessionConfig per grid cell, in cell order. Session seeds are left 0.
std::vector<SessionConfig> expand_cells(const ExperimentSpec& spec);

struct CellSummary {
  SessionConfig config;
  ExperimentSummary summary;
  std::vector<double> errors;  ///< per-session reconstruction errors, session order
};

struct RunOptions {
  int parallelism = 0;  ///< 0 = hardware concurrency
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Runs every cell for sessions_per_cell sessions with seeds
/// derive_seed(master_seed, cell, session). Output is in cell order and does
/// not depend on the worker count. Throws ParameterError on an empty grid.
std::vector<CellSummary> run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Column order of the summary CSV.
inline constexpr std::string_view kSummaryHeader =
    "n,m,l_ttl,k,lambda,t_out,snr_db,mean_error,std_error,bytes_prop,bytes_cdma,"
    "bytes_conv_min,bytes_conv_max,packets_total_mean";

/// Writes the header, optionally preceded by a "# generated <UTC time>" line,
/// then one row per cell.
void write_summary_csv(std::span<const CellSummary> cells, std::ostream& out,
                       bool timestamp_line);

}  // namespace csflood
