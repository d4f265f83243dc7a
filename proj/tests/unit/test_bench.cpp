#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "sttcube/bench.hpp"
#include "sttcube/synth.hpp"

using namespace sttcube;

namespace {

SttCube synth_cube(TextualScheme t, std::size_t n = 3000) {
  SynthConfig sc;
  sc.objects = n;
  sc.days = 7;
  const auto ds = synthesize(sc);
  CubeConfig cfg;
  cfg.textual_scheme = t;
  return construct(ds.objects, ds.taxonomies(), cfg).cube;
}

std::set<std::string> names(const std::vector<BenchQuery>& s) {
  std::set<std::string> out;
  for (const auto& q : s) out.insert(q.name);
  return out;
}

}  // namespace

TEST_CASE("suite generation") {
  const auto cube = synth_cube(TextualScheme::Replication);
  const auto a = generate_suite(cube, 3, 2);
  const auto b = generate_suite(cube, 3, 2);
  REQUIRE(a.size() == 18);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].spec.members == b[i].spec.members);
    CHECK(a[i].spec.k == b[i].spec.k);
  }
  for (const auto& q : a) {
    if (q.name == "Q9") {
      CHECK_FALSE(q.spec.k.has_value());
      CHECK(q.spec.group_by_spatial_level == kRegion);
    } else {
      REQUIRE(q.spec.k.has_value());
      CHECK(*q.spec.k < kDefaultTopK);
    }
  }
  const auto majority = synth_cube(TextualScheme::Majority);
  CHECK(names(generate_suite(majority, 3)) == std::set<std::string>{"Q2", "Q3", "Q5", "Q6", "Q9"});
  for (const auto& q : generate_suite(cube, 4, 1, SuiteFlavor::Volatile)) {
    CHECK(q.spec.measure == Measure::TopKVolatile);
    REQUIRE(q.spec.range.has_value());
  }
}

TEST_CASE("line fits") {
  const auto f = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(fit_line({1, 2, 3}, {4, 4, 4}).r2 == 0.0);
  CHECK(fit_line({1, 2, 3}, {1, 3, 2}).r2 < 0.5);
}

TEST_CASE("gamma k values stay in range") {
  const auto ks = gamma_k_values(1, 500);
  REQUIRE(ks.size() == 500);
  for (auto k : ks) {
    CHECK(k >= 1);
    CHECK(k <= 1000);
  }
  CHECK(gamma_k_values(1, 50) == gamma_k_values(1, 50));
}

TEST_CASE("cost model needs three sizes") {
  SynthConfig sc;
  sc.objects = 500;
  const auto ds = synthesize(sc);
  CHECK_THROWS_AS(cost_model_microbench(ds.objects, ds.taxonomies(), CubeConfig{}, {100, 200}),
                  std::invalid_argument);
  const auto pts = cost_model_microbench(ds.objects, ds.taxonomies(), CubeConfig{}, {100, 200, 400}, 3);
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].rows < pts[2].rows);
}

TEST_CASE("a small bench run") {
  const auto nm = synth_cube(TextualScheme::Replication, 2000);
  BenchConfig cfg;
  cfg.repetitions = 2;
  cfg.instances = 1;
  cfg.k_sweep = {5, 50};
  cfg.k_samples = 20;
  const auto r = run_bench(nm, cfg);
  REQUIRE(r.storage.size() == 4);
  CHECK(r.storage[0].strategy == Strategy::NM);
  CHECK(r.storage[1].strategy == Strategy::PAM);
  CHECK(r.storage[2].strategy == Strategy::PEM);
  CHECK(r.storage[3].strategy == Strategy::FM);
  CHECK(r.storage[0].extra_rows == 0);
  CHECK(r.storage[3].cuboids == 500);
  CHECK(r.latency.size() == 9 * 4);
  for (const auto& a : r.accuracy) CHECK(a.guaranteed_mismatches == 0);
  CHECK(r.k_sweep.size() == 2);
  REQUIRE_FALSE(r.benefit_curve.empty());
  for (std::size_t i = 1; i < r.benefit_curve.size(); ++i) {
    CHECK(r.benefit_curve[i].cumulative_benefit >= r.benefit_curve[i - 1].cumulative_benefit);
  }
}

TEST_CASE("an empty report writes headers only") {
  const auto dir = std::filesystem::temp_directory_path() / "sttcube_test_report";
  std::filesystem::remove_all(dir);
  emit_report(BenchReport{}, dir);
  for (const char* f : {"latency.csv", "storage.csv", "accuracy.csv", "benefit_curve.csv", "k_sweep.csv"}) {
    std::ifstream in(dir / f);
    REQUIRE(in);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench configuration checks") {
  BenchConfig cfg;
  CHECK_NOTHROW(cfg.check());
  cfg.repetitions = 0;
  CHECK_THROWS(cfg.check());
}
