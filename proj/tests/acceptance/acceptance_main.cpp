// Acceptance checks. One line per criterion: PASS or FAIL, a short summary
// and the wall time. Exits non-zero when any criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle/compare.hpp"
#include "sttcube/bench.hpp"
#include "sttcube/lattice.hpp"
#include "sttcube/materialize.hpp"
#include "sttcube/query.hpp"
#include "sttcube/synth.hpp"

using namespace sttcube;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

RankedList list(std::string member, double area, std::vector<std::pair<std::string, std::uint64_t>> entries,
                std::uint64_t boundary = 0, int interval = 0) {
  return {std::move(member), area, interval, std::move(entries), boundary};
}

std::vector<RankedList> r1_r2() {
  return {list("r1", 10, {{"apple", 5}, {"orange", 5}, {"potato", 4}, {"strawberry", 3}, {"carrot", 2}}),
          list("r2", 100, {{"carrot", 40}, {"apple", 30}, {"banana", 20}, {"strawberry", 19}, {"orange", 11}})};
}

Outcome density_example() {
  const double r1 = keyword_density(5, 10.0);
  const double r2 = keyword_density(30, 100.0);
  const auto single = exact_ranking({r1_r2()[0]}, 1, 1, MergeScore::Density);
  const bool ok = r1 == 0.5 && r2 == 0.3 && single.size() == 1 && single[0].keyword == "apple" &&
                  single[0].score == 0.5;
  return {ok, "rho1=" + fmt("%.6g", r1) + " rho2=" + fmt("%.6g", r2)};
}

Outcome merge_example() {
  const auto exact = exact_ranking(r1_r2(), 1, std::nullopt, MergeScore::Density);
  const std::vector<std::pair<std::string, double>> want{{"carrot", 0.38}, {"apple", 0.32}, {"strawberry", 0.20},
                                                         {"banana", 0.18}, {"orange", 0.15}, {"potato", 0.04}};
  bool ok = exact.size() == want.size();
  for (std::size_t i = 0; ok && i < want.size(); ++i) {
    ok = exact[i].keyword == want[i].first && std::abs(exact[i].score - want[i].second) <= 0.005;
  }
  const std::vector<RankedList> top3{list("r1", 10, {{"apple", 5}, {"orange", 5}, {"potato", 4}}, 3),
                                     list("r2", 100, {{"carrot", 40}, {"apple", 30}, {"banana", 20}}, 19)};
  const auto a = topk_merge(top3, 1, 3, MergeScore::Density);
  std::map<std::string, std::uint64_t> f(a.merged_frequencies.begin(), a.merged_frequencies.end());
  const double carrot = f["carrot"] / a.area, straw = f["strawberry"] / a.area, orange = f["orange"] / a.area;
  ok = ok && a.area == 110.0 && std::abs(carrot - 0.36) <= 0.005 && straw == 0.0 &&
       std::abs(orange - 0.05) <= 0.005 && a.delta < 3;
  return {ok, "truncated carrot=" + fmt("%.3f", carrot) + " strawberry=" + fmt("%.2f", straw) +
                  " orange=" + fmt("%.3f", orange) + " delta=" + std::to_string(a.delta)};
}

Outcome benefit_example() {
  Lattice l({2, 2, 2, 1}, {{"D", "*"}, {"L", "*"}, {"T", "*"}, {"-"}});
  const std::vector<std::pair<Coord, std::uint64_t>> rows{
      {{0, 0, 0, 0}, 100'000'000}, {{0, 0, 1, 0}, 15'000'000}, {{0, 1, 0, 0}, 4'000'000},
      {{1, 0, 0, 0}, 96'000'000},  {{0, 1, 1, 0}, 37},         {{1, 0, 1, 0}, 14'000'000},
      {{1, 1, 0, 0}, 2'000'000},   {{1, 1, 1, 0}, 1}};
  for (const auto& [c, r] : rows) l.set_rows(l.index(c), r);
  l.set_materialized(0, true);
  const auto dt = l.benefit(l.index({0, 1, 0, 0}));
  const auto lt = l.benefit(l.index({1, 0, 0, 0}));
  const auto steps = greedy_plan(l, kUnknownRows, false, 1);
  const bool first_dt = steps.size() == 1 && l.coord(steps[0].node) == Coord{0, 1, 0, 0};
  return {dt == 384'000'000 && lt == 16'000'000 && first_dt,
          "DT=" + std::to_string(dt) + " LT=" + std::to_string(lt) + (first_dt ? " first=DT" : " first!=DT")};
}

Outcome oracle_equivalence() {
  std::size_t queries = 0, failures = 0;
  std::string first;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed * 7919);
    SynthConfig sc;
    sc.seed = seed;
    sc.objects = std::uniform_int_distribution<std::size_t>(1000, 10000)(rng);
    sc.days = 6;
    const auto ds = synthesize(sc);
    const auto tax = ds.taxonomies();
    for (auto spatial : {SpatialScheme::Semantic, SpatialScheme::Grid}) {
      for (auto textual : {TextualScheme::Replication, TextualScheme::Majority}) {
        CubeConfig cfg;
        cfg.spatial_scheme = spatial;
        cfg.textual_scheme = textual;
        const oracle::BruteForce bf(ds.objects, tax, cfg);
        auto nm = construct(ds.objects, tax, cfg).cube;
        std::vector<std::pair<std::string, SttCube>> cubes;
        for (Strategy s : {Strategy::PEM, Strategy::FM}) {
          MaterializationConfig m;
          m.strategy = s;
          m.budget = nm.total_rows() * 3 / 2;
          cubes.emplace_back(std::string(to_string(s)), apply_strategy(nm, m));
        }
        cubes.emplace_back("nm", std::move(nm));
        for (int i = 0; i < 8; ++i) {
          const QuerySpec q = oracle::random_query(rng, bf, ds.objects, cfg);
          const auto want = bf.run(q);
          for (const auto& [name, cube] : cubes) {
            ++queries;
            const auto d = oracle::diff(evaluate(cube, q), want);
            if (!d.empty() && failures++ == 0) {
              first = name + " seed " + std::to_string(seed) + ": " + d;
            }
          }
        }
      }
    }
  }
  return {failures == 0, std::to_string(queries) + " queries, " + std::to_string(failures) + " mismatches" +
                             (first.empty() ? "" : " (" + first + ")")};
}

// Independent exact ranking: sum per interval, rank by the integer numerator
// and then by keyword.
std::vector<std::string> reference_order(const std::vector<RankedList>& full, int intervals, MergeScore score) {
  std::map<std::string, std::vector<std::uint64_t>> per;
  for (const auto& l : full) {
    for (const auto& [kw, f] : l.entries) {
      auto& v = per[kw];
      v.resize(static_cast<std::size_t>(intervals));
      v[static_cast<std::size_t>(l.interval)] += f;
    }
  }
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  for (const auto& [kw, v] : per) {
    std::uint64_t n = 0, prev = 0;
    for (auto f : v) {
      n += score == MergeScore::Volatility ? (f > prev ? f - prev : prev - f) : f;
      prev = f;
    }
    ranked.emplace_back(n, kw);
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  std::vector<std::string> out;
  for (auto& r : ranked) out.push_back(r.second);
  return out;
}

Outcome delta_soundness() {
  std::mt19937_64 rng(2024);
  int ok_trials = 0;
  std::size_t positive = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int members = std::uniform_int_distribution<int>(1, 5)(rng);
    const int intervals = std::uniform_int_distribution<int>(1, 4)(rng);
    const std::size_t K = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 10)(rng);
    const auto score = static_cast<MergeScore>(trial % 3);
    std::vector<RankedList> full, cut;
    for (int m = 0; m < members; ++m) {
      for (int z = 0; z < intervals; ++z) {
        std::vector<std::pair<std::string, std::uint64_t>> e;
        for (int w = 0; w < 15; ++w) {
          const auto v = std::uniform_int_distribution<std::uint64_t>(0, 8)(rng);
          if (v) e.emplace_back("w" + std::to_string(w), v * (1 + (w % 3 == 0 ? 4 : 0)));
        }
        std::stable_sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
          return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        const std::string name = "m" + std::to_string(m);
        full.push_back(list(name, 1.0 + m, e, 0, z));
        const std::uint64_t boundary = e.size() > K ? e[K].second : 0;
        if (e.size() > K) e.resize(K);
        cut.push_back(list(name, 1.0 + m, e, boundary, z));
      }
    }
    const auto want = reference_order(full, intervals, score);
    const auto got = topk_merge(cut, intervals, k, score);
    bool ok = got.delta <= std::min(k, want.size()) && got.delta <= got.ranking.size();
    for (std::size_t i = 0; ok && i < got.delta; ++i) ok = got.ranking[i].keyword == want[i];
    ok_trials += ok;
    positive += got.delta > 0;
  }
  return {ok_trials == 50, std::to_string(ok_trials) + "/50 trials sound, " + std::to_string(positive) +
                               " with delta > 0"};
}

// The 100k-object cubes shared by the accuracy, latency and storage checks.
struct Shared {
  SttCube nm;
  std::map<Strategy, SttCube> cubes;
  BenchConfig cfg;
};

Shared& shared() {
  static std::unique_ptr<Shared> s;
  if (!s) {
    s = std::make_unique<Shared>();
    SynthConfig sc;
    sc.objects = 100000;
    const auto ds = synthesize(sc);
    s->nm = construct(ds.objects, ds.taxonomies(), CubeConfig{}).cube;
    compute_sizes(s->nm);
    s->cfg.top_k = kDefaultTopK;
    for (Strategy st : {Strategy::NM, Strategy::PAM, Strategy::PEM, Strategy::FM}) {
      s->cubes.emplace(st, build_strategy(s->nm, st, s->cfg));
    }
  }
  return *s;
}

Outcome pam_accuracy() {
  auto& s = shared();
  const auto suite = generate_suite(s.nm, 31, 5);
  const auto rows = accuracy_eval(s.cubes.at(Strategy::PAM), s.cubes.at(Strategy::NM), suite);
  double sum = 0.0, approx_sum = 0.0;
  std::size_t n = 0, approx = 0, mismatches = 0;
  for (const auto& r : rows) {
    if (r.query == "Q9") continue;
    sum += r.precision;
    ++n;
    if (r.approximate) {
      approx_sum += r.precision;
      ++approx;
    }
    mismatches += r.guaranteed_mismatches;
  }
  const double mean = n ? sum / static_cast<double>(n) : 0.0;
  return {n > 0 && mean >= 0.9 && mismatches == 0,
          "precision@k " + fmt("%.3f", mean) + " over " + std::to_string(n) + " queries (" + std::to_string(approx) +
              " approximate, mean " + fmt("%.3f", approx ? approx_sum / static_cast<double>(approx) : 1.0) +
              "), guaranteed mismatches " + std::to_string(mismatches)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

Outcome q1_latency() {
  auto& s = shared();
  std::vector<BenchQuery> q1;
  for (auto& q : generate_suite(s.nm, 17, 5)) {
    if (q.name == "Q1") q1.push_back(q);
  }
  std::vector<std::pair<Strategy, const SttCube*>> cubes;
  for (Strategy st : {Strategy::NM, Strategy::PEM, Strategy::PAM, Strategy::FM}) cubes.emplace_back(st, &s.cubes.at(st));
  const auto rows = run_suite(cubes, q1, 25);
  std::map<Strategy, std::vector<double>> samples;
  for (const auto& r : rows) samples[r.strategy].insert(samples[r.strategy].end(), r.samples_ms.begin(), r.samples_ms.end());
  const double nm = median(samples[Strategy::NM]), pem = median(samples[Strategy::PEM]);
  const double pam = median(samples[Strategy::PAM]), fm = median(samples[Strategy::FM]);
  const std::size_t pem_cuboids = s.cubes.at(Strategy::PEM).cuboids().size() - 1;
  const bool ok = pem_cuboids >= 3 && nm >= 5 * pem && pem >= pam && pam >= fm;
  return {ok, "median ms NM " + fmt("%.4f", nm) + ", PEM " + fmt("%.4f", pem) + ", PAM " + fmt("%.4f", pam) +
                  ", FM " + fmt("%.4f", fm) + "; PEM stores " + std::to_string(pem_cuboids) + " extra cuboids"};
}

Outcome storage_order() {
  auto& s = shared();
  const std::uint64_t base = s.nm.data().base.row_count();
  const auto extra = [&](Strategy st) { return s.cubes.at(st).total_rows() - base; };
  const auto pam = extra(Strategy::PAM), pem = extra(Strategy::PEM), fm = extra(Strategy::FM);
  const double b = static_cast<double>(base);
  const bool ok = pam < pem && pem < fm && pam < 0.25 * b && pem < 0.25 * b;
  return {ok, "base " + std::to_string(base) + ", extra PAM " + std::to_string(pam) + " (" +
                  fmt("%.1f%%", 100.0 * pam / b) + "), PEM " + std::to_string(pem) + " (" +
                  fmt("%.1f%%", 100.0 * pem / b) + "), FM " + std::to_string(fm)};
}

Outcome update_equivalence() {
  SynthConfig sc;
  sc.objects = 4000;
  sc.days = 10;
  const auto ds = synthesize(sc);
  const auto tax = ds.taxonomies();
  const std::vector<Coord> plan{{kMonth, kCity, kTerm, kTodAll}, {kDay, kRegion, kTheme, kHour},
                                {kDateAll, kCountry, kTopic, kTodAll}, {kDay, kLocation, kTerm, kMinute}};
  std::mt19937_64 rng(99);
  int equal = 0;
  std::string first;
  for (int split = 0; split < 10; ++split) {
    std::vector<SttObject> a, b;
    for (const auto& o : ds.objects) (rng() % 3 == 0 ? b : a).push_back(o);
    std::vector<SttObject> all = a;
    all.insert(all.end(), b.begin(), b.end());
    CubeConfig cfg;
    cfg.spatial_scheme = split % 2 ? SpatialScheme::Grid : SpatialScheme::Semantic;
    cfg.textual_scheme = split % 4 >= 2 ? TextualScheme::Majority : TextualScheme::Replication;
    std::vector<Coord> coords = plan;
    if (cfg.textual_scheme != TextualScheme::Replication) {
      for (auto& c : coords) c[kTextDim] = static_cast<std::uint8_t>(c[kTextDim] > 0 ? c[kTextDim] - 1 : 0);
    }
    if (cfg.spatial_scheme == SpatialScheme::Grid) {
      for (auto& c : coords) c[kSpatialDim] = std::min<std::uint8_t>(c[kSpatialDim], 3);
    }
    const std::optional<std::uint32_t> top_k = split % 3 == 0 ? std::optional<std::uint32_t>(5) : std::nullopt;
    const auto once = materialize_plan(construct(all, tax, cfg).cube, coords, top_k);
    const auto inc = update(materialize_plan(construct(a, tax, cfg).cube, coords, top_k), b).cube;
    bool same = once.cuboids().size() == inc.cuboids().size();
    for (const auto& [c, p] : once.cuboids()) {
      const Cuboid* q = inc.cuboid(c);
      if (!q || !(*q == *p)) {
        same = false;
        if (first.empty()) first = "split " + std::to_string(split) + " at " + coord_name(once.schema(), c);
        break;
      }
    }
    equal += same;
  }
  return {equal == 10, std::to_string(equal) + "/10 splits identical" + (first.empty() ? "" : " (first diff " + first + ")")};
}

Outcome cost_linearity() {
  SynthConfig sc;
  sc.objects = 320000;
  sc.seed = 11;
  const auto ds = synthesize(sc);
  const auto pts =
      cost_model_microbench(ds.objects, ds.taxonomies(), CubeConfig{}, {20000, 40000, 80000, 160000, 320000}, 15);
  std::vector<double> x, y;
  std::string detail;
  for (const auto& p : pts) {
    x.push_back(static_cast<double>(p.rows));
    y.push_back(p.median_ms);
    detail += std::to_string(p.rows) + ":" + fmt("%.2f", p.median_ms) + "ms ";
  }
  const auto f = fit_line(x, y);
  return {f.r2 >= 0.95, "R2 " + fmt("%.4f", f.r2) + " over " + detail};
}

Outcome lattice_size() {
  const auto n = Lattice::enumerate(make_schema(SpatialScheme::Semantic, TextualScheme::Replication)).size();
  return {n == 500, std::to_string(n) + " cuboids"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sttcube acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "density example", 1, density_example},
      {2, "merge example", 1, merge_example},
      {3, "benefit arithmetic", 1, benefit_example},
      {4, "oracle equivalence", 600, oracle_equivalence},
      {5, "delta soundness", 60, delta_soundness},
      {6, "approximate accuracy", 600, pam_accuracy},
      {7, "query latency order", 900, q1_latency},
      {8, "storage order", 900, storage_order},
      {9, "incremental update", 300, update_equivalence},
      {10, "cost linearity", 600, cost_linearity},
      {11, "lattice size", 1, lattice_size},
  };
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += "; over the " + fmt("%.0f", c.limit_s) + " s limit";
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
