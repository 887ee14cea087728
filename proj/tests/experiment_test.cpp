#include "csflood/experiment.hpp"

#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "csflood/errors.hpp"
#include "csflood/rng.hpp"

namespace csflood {
namespace {

std::string field_of(std::string_view doc) {
  try {
    parse_spec(doc);
  } catch (const SpecError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(ParseSpec, MinimalDocumentFillsDefaults) {
  const auto spec = parse_spec(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": "2..10"}})");
  ASSERT_EQ(spec.grids.size(), 1u);
  const auto& g = spec.grids[0];
  EXPECT_EQ(g.k, (std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9, 10}));
  EXPECT_EQ(g.lambda, std::vector<double>{0.5});
  EXPECT_EQ(g.snr_db, std::vector<double>{10.0});
  EXPECT_EQ(g.tau, std::vector<double>{0.5});
  EXPECT_EQ(g.t_out, std::vector<int>{30});
  EXPECT_EQ(spec.sessions_per_cell, 300);
  EXPECT_EQ(spec.master_seed, 1u);
  EXPECT_EQ(expand_cells(spec).size(), 9u);
}

TEST(ParseSpec, LambdaSweepGrid) {
  const auto spec = parse_spec(R"({
    "grid": {"n": 49, "m": 40, "l": 7, "s": [6, 8, 10],
             "lambda": {"from": 0.4, "to": 0.9, "step": 0.1}}})");
  const auto& g = spec.grids[0];
  ASSERT_EQ(g.lambda.size(), 6u);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(g.lambda[i], 0.4 + 0.1 * i, 1e-12);
  EXPECT_EQ(g.k, (std::vector<int>{6, 8, 10}));
  const auto cells = expand_cells(spec);
  ASSERT_EQ(cells.size(), 18u);
  // k is outside lambda in the enumeration order.
  EXPECT_EQ(cells[0].k_sources, 6);
  EXPECT_NEAR(cells[1].ista.lambda, 0.5, 1e-12);
  EXPECT_EQ(cells[6].k_sources, 8);
}

TEST(ParseSpec, RangeStringWithStep) {
  const auto spec = parse_spec(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": "2..10:2"}})");
  EXPECT_EQ(spec.grids[0].k, (std::vector<int>{2, 4, 6, 8, 10}));
}

TEST(ParseSpec, ErrorsNameTheField) {
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": 0}})"), "grid.k");
  EXPECT_EQ(field_of(R"({"grid": {"n": 24, "m": 30, "l_ttl": 5, "k": 2}})"), "grid.n");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 150, "l_ttl": 5, "k": 2}})"), "grid.m");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "k": 2}})"), "grid.l_ttl");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": 2, "bogus": 1}})"),
            "grid.bogus");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": 2}, "sessions": 3})"),
            "sessions");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": 2, "tau": 0}})"),
            "grid.tau");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": "10..2"}})"), "grid.k");
  EXPECT_EQ(field_of(R"({"sessions_per_cell": 3})"), "grid");
  EXPECT_EQ(field_of(R"({"grid": {"n": 25, "m": 30, "l_ttl": 5, "k": 2},)"), "");
  EXPECT_EQ(field_of(R"([1, 2])"), "");
}

ExperimentSpec tiny() {
  auto spec = parse_spec(R"({
    "grids": [{"n": 16, "m": 20, "l_ttl": 4, "k": [1, 3]},
              {"n": 25, "m": 30, "l_ttl": 5, "k": 2, "t_out": [10, 20]}],
    "sessions_per_cell": 6, "seed": 77})");
  return spec;
}

TEST(RunExperiment, RowCountAndOrder) {
  const auto spec = tiny();
  const auto cells = run_experiment(spec, {1, {}});
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].config.sensing.n_nodes, 16);
  EXPECT_EQ(cells[1].config.k_sources, 3);
  EXPECT_EQ(cells[3].config.t_out, 20);
  for (const auto& c : cells) {
    EXPECT_EQ(c.errors.size(), 6u);
    EXPECT_EQ(c.summary.sessions, 6);
  }
  std::ostringstream out;
  write_summary_csv(cells, out, false);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kSummaryHeader);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(RunExperiment, IndependentOfWorkerCount) {
  const auto spec = tiny();
  std::ostringstream a, b;
  write_summary_csv(run_experiment(spec, {1, {}}), a, false);
  write_summary_csv(run_experiment(spec, {3, {}}), b, false);
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunExperiment, SessionSeedsFollowDerivation) {
  auto spec = tiny();
  spec.sessions_per_cell = 3;
  const auto cells = run_experiment(spec, {1, {}});
  const auto a = SignatureMatrix::generate(cells[1].config.sensing);
  for (int s = 0; s < 3; ++s) {
    SessionConfig c = cells[1].config;
    c.seed = derive_seed(77, 1, static_cast<std::uint64_t>(s));
    const auto r = run_session(c, a);
    EXPECT_DOUBLE_EQ(cells[1].errors[s], reconstruction_error(r.x_hat, r.x0));
  }
}

TEST(RunExperiment, TimestampLineIsOptional) {
  auto spec = tiny();
  spec.sessions_per_cell = 1;
  const auto cells = run_experiment(spec, {1, {}});
  std::ostringstream with;
  write_summary_csv(cells, with, true);
  EXPECT_EQ(with.str().rfind("# generated ", 0), 0u);
}

TEST(RunExperiment, RejectsEmptyGrid) {
  ExperimentSpec spec;
  EXPECT_THROW(run_experiment(spec), ParameterError);
  spec.grids.push_back(GridBlock{});
  EXPECT_THROW(run_experiment(spec), ParameterError);
}

TEST(DeriveSeed, MatchesDocumentedMixing) {
  // Reference SplitMix64 finalizer written out independently.
  const auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::set<std::uint64_t> seen;
  for (std::uint64_t cell = 0; cell < 5; ++cell) {
    for (std::uint64_t s = 0; s < 50; ++s) {
      const std::uint64_t d = derive_seed(1, cell, s);
      EXPECT_EQ(d, mix(mix(mix(1) ^ cell) ^ s));
      seen.insert(d);
    }
  }
  EXPECT_EQ(seen.size(), 250u);
}

}  // namespace
}  // namespace csflood
