#include "csflood/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "csflood/errors.hpp"
#include "csflood/rng.hpp"

namespace csflood {

namespace {

using nlohmann::json;

template <typename T>
T number_as(const json& v, const std::string& field) {
  if (!v.is_number()) {
    throw SpecError(field, "expected a number");
  }
  if constexpr (std::is_integral_v<T>) {
    const double d = v.get<double>();
    if (d != std::floor(d)) {
      throw SpecError(field, "expected an integer, got " + v.dump());
    }
    return static_cast<T>(d);
  } else {
    return v.get<T>();
  }
}

template <typename T>
std::vector<T> range_values(T from, T to, T step, const std::string& field) {
  if (!(step > T{0})) {
    throw SpecError(field, "range step must be positive");
  }
  if (to < from) {
    throw SpecError(field, "range end is below its start");
  }
  std::vector<T> out;
  if constexpr (std::is_integral_v<T>) {
    for (T v = from; v <= to; v += step) out.push_back(v);
  } else {
    // Index-based so 0.4..0.9:0.1 yields exactly six values.
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      out.push_back(std::round((from + i * step) * 1e12) / 1e12);
    }
  }
  return out;
}

template <typename T>
T parse_scalar_text(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_integral_v<T>) {
      v = static_cast<T>(std::stol(text, &used));
    } else {
      v = std::stod(text, &used);
    }
    if (used != text.size()) {
      throw SpecError(field, "cannot parse '" + text + "'");
    }
    return v;
  } catch (const std::logic_error&) {
    throw SpecError(field, "cannot parse '" + text + "'");
  }
}

template <typename T>
std::vector<T> parse_list(const json& v, const std::string& field) {
  if (v.is_number()) {
    return {number_as<T>(v, field)};
  }
  if (v.is_array()) {
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number_as<T>(v[i], field + "[" + std::to_string(i) + "]"));
    }
    if (out.empty()) {
      throw SpecError(field, "list is empty");
    }
    return out;
  }
  if (v.is_object()) {
    for (const auto& [key, _] : v.items()) {
      if (key != "from" && key != "to" && key != "step") {
        throw SpecError(field + "." + key, "unknown range key");
      }
    }
    if (!v.contains("from") || !v.contains("to")) {
      throw SpecError(field, "range object needs 'from' and 'to'");
    }
    const T from = number_as<T>(v.at("from"), field + ".from");
    const T to = number_as<T>(v.at("to"), field + ".to");
    const T step = v.contains("step") ? number_as<T>(v.at("step"), field + ".step") : T{1};
    return range_values<T>(from, to, step, field);
  }
  if (v.is_string()) {
    const std::string text = v.get<std::string>();
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
      return {parse_scalar_text<T>(text, field)};
    }
    const auto colon = text.find(':', dots);
    const T from = parse_scalar_text<T>(text.substr(0, dots), field);
    const T to = parse_scalar_text<T>(
        text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2),
        field);
    const T step = colon == std::string::npos ? T{1}
                                              : parse_scalar_text<T>(text.substr(colon + 1), field);
    return range_values<T>(from, to, step, field);
  }
  throw SpecError(field, "expected a number, list, range object or range string");
}

void check_each(bool ok, const std::string& field, const std::string& message) {
  if (!ok) {
    throw SpecError(field, message);
  }
}

GridBlock parse_grid(const json& g, const std::string& prefix) {
  if (!g.is_object()) {
    throw SpecError(prefix, "grid must be an object");
  }
  GridBlock block;
  const auto field = [&](const std::string& key) { return prefix + "." + key; };
  for (const auto& [key, value] : g.items()) {
    if (key == "n") block.n = parse_list<int>(value, field(key));
    else if (key == "m") block.m = parse_list<int>(value, field(key));
    else if (key == "l_ttl" || key == "l") block.l_ttl = parse_list<int>(value, field(key));
    else if (key == "k" || key == "s") block.k = parse_list<int>(value, field(key));
    else if (key == "lambda") block.lambda = parse_list<double>(value, field(key));
    else if (key == "t_out") block.t_out = parse_list<int>(value, field(key));
    else if (key == "snr_db") block.snr_db = parse_list<double>(value, field(key));
    else if (key == "tau") block.tau = parse_list<double>(value, field(key));
    else throw SpecError(field(key), "unknown grid parameter");
  }
  for (const char* required : {"n", "m", "l_ttl", "k"}) {
    const std::vector<int>& list = std::string(required) == "n"   ? block.n
                                   : std::string(required) == "m" ? block.m
                                   : std::string(required) == "k" ? block.k
                                                                  : block.l_ttl;
    check_each(!list.empty(), field(required), "is required");
  }

  for (int n : block.n) {
    const int side = static_cast<int>(std::lround(std::sqrt(std::max(n, 0))));
    check_each(n >= 4 && side * side == n, field("n"),
               "must be a perfect square of at least 4, got " + std::to_string(n));
  }
  for (int l : block.l_ttl) check_each(l >= 1, field("l_ttl"), "must be at least 1");
  for (int m : block.m) check_each(m >= 1, field("m"), "must be at least 1");
  for (int n : block.n) {
    for (int l : block.l_ttl) {
      for (int m : block.m) {
        check_each(m < n * (l + 1), field("m"),
                   "M = " + std::to_string(m) + " must be below N(L+1) = " +
                       std::to_string(n * (l + 1)));
      }
    }
    for (int k : block.k) {
      check_each(k >= 1 && k <= n - 1, field("k"),
                 "must lie in 1..N-1, got " + std::to_string(k));
    }
  }
  for (double v : block.lambda) check_each(v >= 0.0, field("lambda"), "must be nonnegative");
  for (int v : block.t_out) check_each(v >= 1, field("t_out"), "must be at least 1");
  for (double v : block.tau) check_each(v > 0.0, field("tau"), "must be positive");
  for (double v : block.snr_db) check_each(!std::isnan(v), field("snr_db"), "must be a number");
  return block;
}

std::uint64_t parse_seed(const json& v, const std::string& field) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw SpecError(field, "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

}  // namespace

ExperimentSpec parse_spec(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw SpecError("", std::string("malformed document: ") + e.what());
  }
  if (!doc.is_object()) {
    throw SpecError("", "document must be a JSON object");
  }

  ExperimentSpec spec;
  for (const auto& [key, value] : doc.items()) {
    if (key == "grid") {
      spec.grids.push_back(parse_grid(value, "grid"));
    } else if (key == "grids") {
      if (!value.is_array()) throw SpecError("grids", "expected a list of grid objects");
      for (std::size_t i = 0; i < value.size(); ++i) {
        spec.grids.push_back(parse_grid(value[i], "grids[" + std::to_string(i) + "]"));
      }
    } else if (key == "sessions_per_cell") {
      spec.sessions_per_cell = number_as<int>(value, key);
      check_each(spec.sessions_per_cell >= 1, key, "must be at least 1");
    } else if (key == "output") {
      if (!value.is_string()) throw SpecError(key, "expected a path string");
      spec.output = value.get<std::string>();
    } else if (key == "seed") {
      spec.master_seed = parse_seed(value, key);
    } else if (key == "matrix_seed") {
      spec.matrix_seed = parse_seed(value, key);
    } else if (key == "redraw_signatures") {
      if (!value.is_boolean()) throw SpecError(key, "expected true or false");
      spec.redraw_signatures = value.get<bool>();
    } else if (key == "sink") {
      spec.sink = number_as<int>(value, key);
    } else if (key == "max_iters") {
      spec.max_iters = number_as<int>(value, key);
      check_each(spec.max_iters >= 1, key, "must be at least 1");
    } else if (key == "tol") {
      spec.tol = number_as<double>(value, key);
      check_each(spec.tol >= 0.0, key, "must be nonnegative");
    } else if (key == "cdma_code_length") {
      const std::string rule = value.is_string() ? value.get<std::string>() : "";
      if (rule == "n_l_plus_1") spec.cdma_rule = CdmaCodeLength::kPerOriginHop;
      else if (rule == "n_l") spec.cdma_rule = CdmaCodeLength::kLiteralNL;
      else throw SpecError(key, "expected \"n_l_plus_1\" or \"n_l\"");
    } else {
      throw SpecError(key, "unknown field");
    }
  }
  if (spec.grids.empty()) {
    throw SpecError("grid", "experiment has no grid");
  }
  if (spec.sink) {
    for (const auto& g : spec.grids) {
      for (int n : g.n) {
        check_each(*spec.sink >= 1 && *spec.sink <= n, "sink", "must name a node of every lattice");
      }
    }
  }
  return spec;
}

std::vector<SessionConfig> expand_cells(const ExperimentSpec& spec) {
  std::vector<SessionConfig> cells;
  const std::uint64_t matrix_seed = spec.matrix_seed.value_or(spec.master_seed);
  for (const auto& g : spec.grids) {
    for (int n : g.n)
      for (int m : g.m)
        for (int l : g.l_ttl)
          for (int k : g.k)
            for (double lambda : g.lambda)
              for (int t_out : g.t_out)
                for (double snr : g.snr_db)
                  for (double tau : g.tau) {
                    SessionConfig c;
                    c.sensing = SensingParams{n, l, m, matrix_seed};
                    c.k_sources = k;
                    c.t_out = t_out;
                    c.channel.snr_db = snr;
                    c.ista.lambda = lambda;
                    c.ista.max_iters = spec.max_iters;
                    c.ista.tol = spec.tol;
                    c.tau = tau;
                    if (spec.sink) c.sink = NodeId{*spec.sink};
                    cells.push_back(c);
                  }
  }
  return cells;
}

std::vector<CellSummary> run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  const std::vector<SessionConfig> cells = expand_cells(spec);
  if (cells.empty()) {
    throw ParameterError("experiment grid is empty");
  }
  if (spec.sessions_per_cell < 1) {
    throw ParameterError("sessions_per_cell must be at least 1");
  }
  for (const auto& c : cells) {
    c.validate();
  }

  // One shared matrix per (N, L, M) unless every session redraws its own.
  std::map<std::tuple<int, int, int>, std::shared_ptr<const SignatureMatrix>> matrices;
  if (!spec.redraw_signatures) {
    for (const auto& c : cells) {
      auto key = std::make_tuple(c.sensing.n_nodes, c.sensing.max_hops, c.sensing.seq_len);
      if (!matrices.contains(key)) {
        matrices.emplace(key, std::make_shared<const SignatureMatrix>(
                                  SignatureMatrix::generate(c.sensing)));
      }
    }
  }

  const std::size_t per_cell = static_cast<std::size_t>(spec.sessions_per_cell);
  const std::size_t total = cells.size() * per_cell;
  std::vector<std::vector<SessionResult>> results(cells.size(),
                                                  std::vector<SessionResult>(per_cell));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::mutex progress_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= total) {
        return;
      }
      const std::size_t cell = task / per_cell;
      const std::size_t session = task % per_cell;
      try {
        SessionConfig config = cells[cell];
        config.seed = derive_seed(spec.master_seed, cell, session);
        if (spec.redraw_signatures) {
          SensingParams sp = config.sensing;
          sp.seed = splitmix64(config.seed ^ sp.seed);
          results[cell][session] = run_session(config, SignatureMatrix::generate(sp));
        } else {
          const auto key = std::make_tuple(config.sensing.n_nodes, config.sensing.max_hops,
                                           config.sensing.seq_len);
          results[cell][session] = run_session(config, *matrices.at(key));
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (options.progress) {
        std::lock_guard lock(progress_mutex);
        options.progress(finished, total);
      }
    }
  };

  int workers = options.parallelism > 0 ? options.parallelism
                                        : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, static_cast<int>(std::min<std::size_t>(total, 256)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  std::vector<CellSummary> out;
  out.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellSummary cs;
    cs.config = cells[c];
    cs.summary = summarize(results[c], cells[c], OverheadModel{}, spec.cdma_rule);
    for (const auto& r : results[c]) {
      cs.errors.push_back(reconstruction_error(r.x_hat, r.x0));
    }
    out.push_back(std::move(cs));
  }
  return out;
}

void write_summary_csv(std::span<const CellSummary> cells, std::ostream& out,
                       bool timestamp_line) {
  if (timestamp_line) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    out << "# generated " << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ") << '\n';
  }
  out << kSummaryHeader << '\n';
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(10);
  for (const auto& cell : cells) {
    const SessionConfig& c = cell.config;
    const ExperimentSummary& s = cell.summary;
    out << c.sensing.n_nodes << ',' << c.sensing.seq_len << ',' << c.sensing.max_hops << ','
        << c.k_sources << ',' << c.ista.lambda << ',' << c.t_out << ',' << c.channel.snr_db << ','
        << s.mean_error << ',' << s.error_std << ',' << s.mean_bytes_proposed << ','
        << s.mean_bytes_cdma << ',' << s.mean_bytes_conv_min << ',' << s.mean_bytes_conv_max << ','
        << s.mean_packets << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace csflood
