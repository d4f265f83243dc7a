#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sttcube/cube.hpp"
#include "sttcube/materialize.hpp"
#include "sttcube/query.hpp"

namespace sttcube {

enum class SuiteFlavor { Dense, Volatile };

struct BenchQuery {
  std::string name;  // Q1..Q9
  int instance = 0;
  QuerySpec spec;
};

struct BenchConfig {
  std::vector<Strategy> strategies{Strategy::NM, Strategy::PAM, Strategy::PEM, Strategy::FM};
  int repetitions = 10;
  int instances = 3;  // parameter draws per query template
  SuiteFlavor flavor = SuiteFlavor::Dense;
  std::uint64_t seed = 7;
  double budget_fraction = 0.2;  // extra rows allowed over the base
  bool strict_budget = true;
  std::uint32_t top_k = kDefaultTopK;
  std::vector<std::uint32_t> k_sweep{10, 20, 50, 100, 200, 500, 1000};
  int k_samples = 100;

  void check() const;
};

struct LatencyRow {
  std::string query;
  int instance = 0;
  Strategy strategy = Strategy::NM;
  std::vector<double> samples_ms;
  std::string source;
  bool approximate = false;
  std::uint64_t digest = 0;

  double mean() const;
  double stddev() const;
  double median() const;
};

struct StorageRow {
  Strategy strategy = Strategy::NM;
  std::uint64_t base_rows = 0;
  std::uint64_t extra_rows = 0;
  std::size_t cuboids = 0;
};

struct AccuracyRow {
  std::string query;
  int instance = 0;
  std::size_t k = 0;
  bool approximate = false;
  double precision = 1.0;       // |approx top-k ∩ exact top-k| / k, averaged over groups
  double position_match = 1.0;  // matching positions / k, averaged over groups
  std::size_t groups = 0;
  std::size_t guaranteed_groups = 0;          // groups with δ = k
  std::size_t guaranteed_mismatches = 0;      // of those, groups whose precision < 1
};

struct BenefitPoint {
  std::size_t views = 0;  // including the base
  std::uint64_t cumulative_benefit = 0;
  std::uint64_t rows = 0;
  std::string picked;
};

struct KSweepRow {
  std::uint32_t stored_k = 0;
  double answerable = 0.0;  // share of sampled k below the stored K
  std::uint64_t extra_rows = 0;
  std::vector<double> samples_ms;
};

struct BenchReport {
  std::vector<LatencyRow> latency;
  std::vector<StorageRow> storage;
  std::vector<AccuracyRow> accuracy;
  std::vector<BenefitPoint> benefit_curve;
  std::vector<KSweepRow> k_sweep;
};

/// Q1..Q9 with members, k and time spans drawn from the cube. Under the
/// majority and custom schemes only the theme, topic and concept queries
/// are produced.
std::vector<BenchQuery> generate_suite(const SttCube& cube, std::uint64_t seed, int instances = 1,
                                       SuiteFlavor flavor = SuiteFlavor::Dense);

/// Materializes `strategy` over a cube holding only the base.
SttCube build_strategy(const SttCube& nm, Strategy strategy, const BenchConfig& cfg);

/// Times every query under every cube. Throws std::runtime_error when an
/// exact plan disagrees with the first cube's result.
std::vector<LatencyRow> run_suite(const std::vector<std::pair<Strategy, const SttCube*>>& cubes,
                                  const std::vector<BenchQuery>& suite, int repetitions);

/// Compares rankings against exact ground truth. Top-ALL queries are skipped.
std::vector<AccuracyRow> accuracy_eval(const SttCube& approx, const SttCube& exact,
                                       const std::vector<BenchQuery>& suite);

/// Cumulative greedy benefit for the first `max_views` picks.
std::vector<BenefitPoint> benefit_curve(const SttCube& nm, std::size_t max_views = 10);

/// Gamma-distributed k values clamped to [1, 1000].
std::vector<std::size_t> gamma_k_values(std::uint64_t seed, int n, double shape = 2.0, double scale = 15.0);

std::vector<KSweepRow> k_sweep(const SttCube& nm, const BenchQuery& probe, const BenchConfig& cfg);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares; r2 is 0 when the latencies do not vary.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CostPoint {
  std::uint64_t rows = 0;
  double median_ms = 0.0;
};

/// Median latency of a full base scan for cubes over growing prefixes of
/// `objects`. Needs at least three sizes.
std::vector<CostPoint> cost_model_microbench(const std::vector<SttObject>& objects, const Taxonomies& tax,
                                             const CubeConfig& config, const std::vector<std::size_t>& sizes,
                                             int repetitions = 15);

BenchReport run_bench(const SttCube& nm, const BenchConfig& cfg);

/// latency.csv, storage.csv, accuracy.csv, benefit_curve.csv, k_sweep.csv.
void emit_report(const BenchReport& report, const std::filesystem::path& dir);

}  // namespace sttcube
