// csflood: experiment runner and small inspection tools.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "csflood/errors.hpp"
#include "csflood/experiment.hpp"
#include "csflood/metrics.hpp"
#include "csflood/network.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct RunArgs {
  std::string spec_path;
  std::string output;
  int sessions = 0;
  bool no_timestamp = false;
  int parallelism = 0;
  bool quiet = false;
};

struct MatrixArgs {
  int n = 25;
  int l = 5;
  int m = 30;
  std::uint64_t seed = 1;
  std::string output;
};

struct SessionArgs {
  int n = 25;
  int l = 5;
  int m = 30;
  int k = 2;
  int t_out = 30;
  double lambda = 0.5;
  double snr_db = 10.0;
  double tau = 0.5;
  std::uint64_t seed = 0;
  std::uint64_t matrix_seed = 1;
  int sink = 0;
  bool immediate = false;
  std::string trace;
};

// Thrown for failures that are not the user's configuration.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw RuntimeFailure("cannot open spec file '" + path + "'");
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename Fn>
void with_output(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    if (!std::cout) throw RuntimeFailure("failed writing to stdout");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw RuntimeFailure("cannot open output file '" + path + "'");
  }
  write(out);
  out.close();
  if (!out) {
    throw RuntimeFailure("failed writing '" + path + "'");
  }
}

void cmd_run(const RunArgs& args) {
  csflood::ExperimentSpec spec = csflood::parse_spec(read_file(args.spec_path));
  if (args.sessions > 0) spec.sessions_per_cell = args.sessions;
  const std::string output = args.output.empty() ? spec.output : args.output;

  csflood::RunOptions options;
  options.parallelism = args.parallelism;
  if (!args.quiet) {
    options.progress = [](std::size_t done, std::size_t total) {
      if (done == total || done % 50 == 0) {
        std::fprintf(stderr, "\r%zu/%zu sessions", done, total);
        if (done == total) std::fputc('\n', stderr);
      }
    };
  }
  const auto cells = csflood::run_experiment(spec, options);
  with_output(output, [&](std::ostream& out) {
    csflood::write_summary_csv(cells, out, !args.no_timestamp);
  });
}

void cmd_matrix(const MatrixArgs& args) {
  const auto a = csflood::SignatureMatrix::generate({args.n, args.l, args.m, args.seed});
  with_output(args.output, [&](std::ostream& out) { a.write_text(out); });
}

void cmd_session(const SessionArgs& args) {
  csflood::SessionConfig c;
  c.sensing = {args.n, args.l, args.m, args.matrix_seed};
  c.k_sources = args.k;
  c.t_out = args.t_out;
  c.ista.lambda = args.lambda;
  c.channel.snr_db = args.snr_db;
  c.tau = args.tau;
  c.seed = args.seed;
  if (args.sink > 0) c.sink = csflood::NodeId{args.sink};
  if (args.immediate) c.origination = csflood::OriginationTiming::kImmediate;
  c.record_trace = !args.trace.empty();
  c.validate();

  const auto a = csflood::SignatureMatrix::generate(c.sensing);
  const auto r = csflood::run_session(c, a);
  std::cout << "sources:";
  for (const auto& e : r.events) {
    std::cout << ' ' << e.node.value << (e.value > 0 ? "+" : "-") << '@' << e.slot;
  }
  std::cout << "\nerror: " << csflood::reconstruction_error(r.x_hat, r.x0)
            << "\npackets: " << r.packets_sent << '\n';
  if (!args.trace.empty()) {
    with_output(args.trace, [&](std::ostream& out) { csflood::write_trace_csv(r.trace, out); });
  }
}

void add_sensing_options(CLI::App* cmd, int& n, int& l, int& m) {
  cmd->add_option("--n", n, "number of nodes (perfect square)")->capture_default_str();
  cmd->add_option("--l", l, "maximum hop count L")->capture_default_str();
  cmd->add_option("--m", m, "signature length M")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressed-sensing flooding simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run an experiment grid and write the summary CSV");
  run_cmd->add_option("spec", run.spec_path, "JSON experiment spec")->required();
  run_cmd->add_option("-o,--output", run.output, "CSV path (overrides the spec; '-' = stdout)");
  run_cmd->add_option("--sessions", run.sessions, "override sessions per cell")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-header-timestamp", run.no_timestamp, "omit the '# generated' line");
  run_cmd->add_option("--parallelism", run.parallelism, "worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("-q,--quiet", run.quiet, "no progress on stderr");

  MatrixArgs matrix;
  auto* matrix_cmd = app.add_subcommand("matrix", "print the signature matrix as text");
  add_sensing_options(matrix_cmd, matrix.n, matrix.l, matrix.m);
  matrix_cmd->add_option("--seed", matrix.seed, "matrix seed")->capture_default_str();
  matrix_cmd->add_option("-o,--output", matrix.output, "output path (default stdout)");

  SessionArgs session;
  auto* session_cmd = app.add_subcommand("session", "run one session, optionally dumping a trace");
  add_sensing_options(session_cmd, session.n, session.l, session.m);
  session_cmd->add_option("--k", session.k, "event sources")->capture_default_str();
  session_cmd->add_option("--t-out", session.t_out, "slots per session")->capture_default_str();
  session_cmd->add_option("--lambda", session.lambda, "ISTA weight")->capture_default_str();
  session_cmd->add_option("--snr-db", session.snr_db, "per-link SNR")->capture_default_str();
  session_cmd->add_option("--tau", session.tau, "quantizer dead zone")->capture_default_str();
  session_cmd->add_option("--seed", session.seed, "session seed")->capture_default_str();
  session_cmd->add_option("--matrix-seed", session.matrix_seed, "signature matrix seed")
      ->capture_default_str();
  session_cmd->add_option("--sink", session.sink, "sink node id (default: center)");
  session_cmd->add_flag("--immediate", session.immediate,
                        "transmit events in their detection slot");
  session_cmd->add_option("--trace", session.trace, "write the protocol trace CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) cmd_run(run);
    if (*matrix_cmd) cmd_matrix(matrix);
    if (*session_cmd) cmd_session(session);
  } catch (const csflood::SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kConfigError;
  } catch (const csflood::ParameterError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
