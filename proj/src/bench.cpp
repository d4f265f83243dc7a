#include "sttcube/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace sttcube {

void BenchConfig::check() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  if (instances < 1) throw std::invalid_argument("instances must be at least 1");
  if (strategies.empty()) throw std::invalid_argument("at least one strategy is required");
  if (top_k == 0) throw std::invalid_argument("top-K must be positive");
  if (k_samples < 1) throw std::invalid_argument("k_samples must be positive");
  if (budget_fraction < 0.0) throw std::invalid_argument("budget fraction must be non-negative");
}

double LatencyRow::mean() const {
  if (samples_ms.empty()) return 0.0;
  return std::accumulate(samples_ms.begin(), samples_ms.end(), 0.0) / static_cast<double>(samples_ms.size());
}

double LatencyRow::stddev() const {
  if (samples_ms.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double s : samples_ms) ss += (s - m) * (s - m);
  return std::sqrt(ss / static_cast<double>(samples_ms.size() - 1));
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t i = std::min(v.size() - 1, static_cast<std::size_t>(std::ceil(p * v.size())) - (p > 0 ? 1 : 0));
  return v[i];
}

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Template {
  const char* name;
  int text_level;
  int select;  // 1 city, 2 region, 3 country
  bool group_by_region;
  bool top_all;
};

constexpr Template kTemplates[] = {
    {"Q1", kTerm, 1, false, false},    {"Q2", kTopic, 1, false, false},  {"Q3", kConcept, 3, false, false},
    {"Q4", kTerm, 2, false, false},    {"Q5", kConcept, 2, false, false}, {"Q6", kTheme, 2, false, false},
    {"Q7", kTerm, 3, false, false},    {"Q8", kTerm, 3, true, false},    {"Q9", kTopic, 3, true, true},
};

/// Members of `level` that occur in the base cuboid, excluding UNKNOWN.
std::vector<std::string> populated(const SttCube& cube, int level) {
  const Dimension& d = cube.dimension(kSpatialDim);
  const auto& lift = d.lift_table(0, level);
  std::set<MemberId> ids;
  for (const auto& k : cube.data().base.keys) ids.insert(lift[k.spatial]);
  std::vector<std::string> out;
  for (MemberId id : ids) {
    if (d.key(level, id) != kUnknownMember) out.push_back(d.key(level, id));
  }
  return out;
}

}  // namespace

double LatencyRow::median() const { return median_of(samples_ms); }

std::vector<BenchQuery> generate_suite(const SttCube& cube, std::uint64_t seed, int instances, SuiteFlavor flavor) {
  std::mt19937_64 rng(seed);
  const auto& cfg = cube.config();
  const bool terms = cfg.textual_scheme == TextualScheme::Replication;
  // Grid levels stand in for city, region and country.
  const int spatial_top = cube.dimension(kSpatialDim).level_count() - 1;
  const auto level_for = [&](int select) { return std::min(select, spatial_top - 1); };

  const Dimension& date = cube.data().date;
  std::int64_t first_day = 0, last_day = -1;
  for (MemberId id = 0; id < date.size(kDay); ++id) {
    const std::int64_t day = date.lo(kDay, id);
    if (last_day < first_day) {
      first_day = last_day = day;
    } else {
      first_day = std::min(first_day, day);
      last_day = std::max(last_day, day);
    }
  }
  const std::int64_t span_days = std::max<std::int64_t>(1, std::min<std::int64_t>(7, last_day - first_day + 1));

  std::vector<BenchQuery> out;
  for (const auto& t : kTemplates) {
    if (!terms && t.text_level == kTerm) continue;
    const int select = level_for(t.select);
    const auto members = populated(cube, select);
    for (int i = 0; i < instances; ++i) {
      BenchQuery b;
      b.name = t.name;
      b.instance = i;
      QuerySpec& q = b.spec;
      q.measure = flavor == SuiteFlavor::Dense ? Measure::TopKDense : Measure::TopKVolatile;
      q.spatial_level = select;
      q.textual_level = t.text_level;
      q.spatial_scheme = cfg.spatial_scheme;
      q.textual_scheme = cfg.textual_scheme;
      if (!members.empty()) {
        q.members = {members[std::uniform_int_distribution<std::size_t>(0, members.size() - 1)(rng)]};
      }
      if (t.group_by_region) q.group_by_spatial_level = level_for(2);
      if (!t.top_all) q.k = std::uniform_int_distribution<std::size_t>(3, kDefaultTopK - 1)(rng);
      if (flavor == SuiteFlavor::Volatile && last_day >= first_day) {
        const std::int64_t start =
            std::uniform_int_distribution<std::int64_t>(first_day, last_day - span_days + 1)(rng);
        q.range = TimeRange{Instant{start * kSecondsPerDay}, Instant{(start + span_days) * kSecondsPerDay}};
        q.intervals = static_cast<int>(span_days);
      }
      out.push_back(std::move(b));
    }
  }
  return out;
}

SttCube build_strategy(const SttCube& nm, Strategy strategy, const BenchConfig& cfg) {
  MaterializationConfig m;
  m.strategy = strategy;
  m.strict_budget = cfg.strict_budget;
  const double base = static_cast<double>(nm.data().base.row_count());
  m.budget = static_cast<std::uint64_t>(base * (1.0 + cfg.budget_fraction));
  if (strategy == Strategy::PAM) m.top_k = cfg.top_k;
  return apply_strategy(nm, m);
}

std::vector<LatencyRow> run_suite(const std::vector<std::pair<Strategy, const SttCube*>>& cubes,
                                  const std::vector<BenchQuery>& suite, int repetitions) {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  std::vector<LatencyRow> out;
  for (const auto& b : suite) {
    std::optional<std::uint64_t> reference;
    for (const auto& [strategy, cube] : cubes) {
      LatencyRow row;
      row.query = b.name;
      row.instance = b.instance;
      row.strategy = strategy;
      for (int r = 0; r < repetitions; ++r) {
        const auto t0 = Clock::now();
        const QueryPlan plan = rewrite(*cube, b.spec);
        const QueryResult res = evaluate(*cube, b.spec, plan);
        row.samples_ms.push_back(elapsed_ms(t0));
        if (r == 0) {
          row.source = coord_name(cube->schema(), plan.source);
          row.approximate = plan.approximate;
          row.digest = res.digest();
        }
      }
      if (!row.approximate) {
        if (!reference) {
          reference = row.digest;
        } else if (*reference != row.digest) {
          throw std::runtime_error(b.name + ": " + std::string(to_string(strategy)) +
                                   " disagrees with the exact result");
        }
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::vector<AccuracyRow> accuracy_eval(const SttCube& approx, const SttCube& exact,
                                       const std::vector<BenchQuery>& suite) {
  std::vector<AccuracyRow> out;
  for (const auto& b : suite) {
    if (!b.spec.k) continue;
    const QueryResult a = evaluate(approx, b.spec);
    const QueryResult e = evaluate(exact, b.spec);
    AccuracyRow row;
    row.query = b.name;
    row.instance = b.instance;
    row.k = *b.spec.k;
    row.approximate = a.plan.approximate;
    double precision = 0.0, positions = 0.0;
    for (const auto& eg : e.groups) {
      const auto it = std::find_if(a.groups.begin(), a.groups.end(), [&](const GroupResult& g) {
        return g.member == eg.member && g.interval == eg.interval;
      });
      const std::size_t want = std::min(row.k, eg.ranking.size());
      double p = 1.0, m = 1.0;
      if (want > 0) {
        std::set<std::string> truth;
        for (std::size_t i = 0; i < want; ++i) truth.insert(eg.ranking[i].keyword);
        std::size_t hits = 0, same = 0;
        if (it != a.groups.end()) {
          for (std::size_t i = 0; i < std::min(want, it->ranking.size()); ++i) {
            hits += truth.count(it->ranking[i].keyword);
            same += it->ranking[i].keyword == eg.ranking[i].keyword;
          }
        }
        p = static_cast<double>(hits) / static_cast<double>(want);
        m = static_cast<double>(same) / static_cast<double>(want);
      }
      if (it != a.groups.end() && it->delta >= want) {
        ++row.guaranteed_groups;
        if (p < 1.0) ++row.guaranteed_mismatches;
      }
      precision += p;
      positions += m;
      ++row.groups;
    }
    if (row.groups) {
      row.precision = precision / static_cast<double>(row.groups);
      row.position_match = positions / static_cast<double>(row.groups);
    }
    out.push_back(row);
  }
  return out;
}

std::vector<BenefitPoint> benefit_curve(const SttCube& nm, std::size_t max_views) {
  SttCube sized = nm;
  compute_sizes(sized);
  const Lattice& lat = sized.lattice();
  std::vector<BenefitPoint> out;
  out.push_back({1, 0, lat.materialized_rows(), coord_name(sized.schema(), sized.base_coord())});
  if (max_views < 2) return out;
  std::uint64_t total = 0;
  for (const auto& s : greedy_plan(lat, kUnknownRows, false, max_views - 1)) {
    total += s.benefit;
    out.push_back({out.size() + 1, total, s.total_rows, coord_name(sized.schema(), lat.coord(s.node))});
  }
  return out;
}

std::vector<std::size_t> gamma_k_values(std::uint64_t seed, int n, double shape, double scale) {
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(shape, scale);
  std::vector<std::size_t> out;
  for (int i = 0; i < n; ++i) {
    const double v = std::ceil(gamma(rng));
    out.push_back(static_cast<std::size_t>(std::clamp(v, 1.0, 1000.0)));
  }
  return out;
}

std::vector<KSweepRow> k_sweep(const SttCube& nm, const BenchQuery& probe, const BenchConfig& cfg) {
  const auto ks = gamma_k_values(cfg.seed, cfg.k_samples);
  std::vector<KSweepRow> out;
  for (std::uint32_t stored : cfg.k_sweep) {
    BenchConfig c = cfg;
    c.top_k = stored;
    const SttCube pam = build_strategy(nm, Strategy::PAM, c);
    KSweepRow row;
    row.stored_k = stored;
    row.extra_rows = pam.total_rows() - pam.data().base.row_count();
    std::size_t answerable = 0;
    for (std::size_t k : ks) {
      QuerySpec q = probe.spec;
      q.k = k;
      const auto t0 = Clock::now();
      const QueryResult r = evaluate(pam, q);
      row.samples_ms.push_back(elapsed_ms(t0));
      answerable += r.plan.approximate ? 1 : 0;
    }
    row.answerable = static_cast<double>(answerable) / static_cast<double>(ks.size());
    out.push_back(std::move(row));
  }
  return out;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("need at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 0.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

std::vector<CostPoint> cost_model_microbench(const std::vector<SttObject>& objects, const Taxonomies& tax,
                                             const CubeConfig& config, const std::vector<std::size_t>& sizes,
                                             int repetitions) {
  if (sizes.size() < 3) throw std::invalid_argument("the cost model needs at least three sizes");
  if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
  std::vector<CostPoint> out;
  for (std::size_t n : sizes) {
    if (n > objects.size()) throw std::invalid_argument("size exceeds the dataset");
    const std::vector<SttObject> part(objects.begin(), objects.begin() + static_cast<std::ptrdiff_t>(n));
    const SttCube cube = construct(part, tax, config).cube;
    QuerySpec q;
    q.measure = Measure::TopKDense;
    q.spatial_scheme = config.spatial_scheme;
    q.textual_scheme = config.textual_scheme;
    q.spatial_level = cube.dimension(kSpatialDim).level_count() - 2;
    q.textual_level = text_base_level(config.textual_scheme);
    q.k = 10;
    std::vector<double> samples;
    evaluate(cube, q);  // warm-up
    for (int r = 0; r < repetitions; ++r) {
      const auto t0 = Clock::now();
      evaluate(cube, q);
      samples.push_back(elapsed_ms(t0));
    }
    out.push_back({cube.data().base.row_count(), median_of(samples)});
  }
  return out;
}

BenchReport run_bench(const SttCube& nm_in, const BenchConfig& cfg) {
  cfg.check();
  SttCube sized = nm_in;
  sized.drop_cuboids();
  compute_sizes(sized);

  std::vector<std::pair<Strategy, SttCube>> built;
  for (Strategy s : cfg.strategies) built.emplace_back(s, build_strategy(sized, s, cfg));
  std::stable_sort(built.begin(), built.end(), [](const auto& a, const auto& b) {
    static constexpr int order[] = {0, 2, 1, 3, 4};  // NM, PAM, PEM, FM, greedy
    return order[static_cast<int>(a.first)] < order[static_cast<int>(b.first)];
  });

  BenchReport report;
  std::vector<std::pair<Strategy, const SttCube*>> cubes;
  for (const auto& [s, c] : built) {
    cubes.emplace_back(s, &c);
    report.storage.push_back({s, c.data().base.row_count(), c.total_rows() - c.data().base.row_count(),
                              c.cuboids().size()});
  }
  // Exact strategies first so the reference digest is exact.
  std::stable_partition(cubes.begin(), cubes.end(), [](const auto& p) { return p.first != Strategy::PAM; });

  const auto suite = generate_suite(sized, cfg.seed, cfg.instances, cfg.flavor);
  report.latency = run_suite(cubes, suite, cfg.repetitions);

  const SttCube* pam = nullptr;
  const SttCube* nm = nullptr;
  for (const auto& [s, c] : built) {
    if (s == Strategy::PAM) pam = &c;
    if (s == Strategy::NM) nm = &c;
  }
  if (pam && nm) report.accuracy = accuracy_eval(*pam, *nm, suite);
  report.benefit_curve = benefit_curve(sized);
  if (!cfg.k_sweep.empty() && !suite.empty()) {
    const auto probe = std::find_if(suite.begin(), suite.end(), [](const BenchQuery& b) { return b.spec.k.has_value(); });
    if (probe != suite.end()) report.k_sweep = k_sweep(sized, *probe, cfg);
  }
  return report;
}

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& dir, const std::string& name, std::vector<std::filesystem::path>& written)
      : final_(dir / name), tmp_(dir / (name + ".tmp")), out_(tmp_) {
    if (!out_) throw std::runtime_error("cannot write " + tmp_.string());
    written.push_back(tmp_);
    out_.precision(10);
  }
  std::ofstream& out() { return out_; }
  void commit() {
    out_.close();
    if (!out_) throw std::runtime_error("write failed for " + final_.string());
    std::filesystem::rename(tmp_, final_);
  }

 private:
  std::filesystem::path final_, tmp_;
  std::ofstream out_;
};

}  // namespace

void emit_report(const BenchReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  try {
    {
      CsvFile f(dir, "latency.csv", written);
      f.out() << "query,instance,strategy,n,mean_ms,stddev_ms,median_ms,source,approximate\n";
      for (const auto& r : report.latency) {
        f.out() << r.query << ',' << r.instance << ',' << to_string(r.strategy) << ',' << r.samples_ms.size() << ','
                << r.mean() << ',' << r.stddev() << ',' << r.median() << ',' << r.source << ','
                << (r.approximate ? 1 : 0) << '\n';
      }
      f.commit();
    }
    {
      CsvFile f(dir, "storage.csv", written);
      f.out() << "strategy,base_rows,extra_rows,total_rows,cuboids,extra_share\n";
      for (const auto& r : report.storage) {
        f.out() << to_string(r.strategy) << ',' << r.base_rows << ',' << r.extra_rows << ','
                << r.base_rows + r.extra_rows << ',' << r.cuboids << ','
                << (r.base_rows ? static_cast<double>(r.extra_rows) / static_cast<double>(r.base_rows) : 0.0)
                << '\n';
      }
      f.commit();
    }
    {
      CsvFile f(dir, "accuracy.csv", written);
      f.out() << "query,instance,k,approximate,precision_at_k,position_match,groups,guaranteed_groups,"
                 "guaranteed_mismatches\n";
      for (const auto& r : report.accuracy) {
        f.out() << r.query << ',' << r.instance << ',' << r.k << ',' << (r.approximate ? 1 : 0) << ','
                << r.precision << ',' << r.position_match << ',' << r.groups << ',' << r.guaranteed_groups << ','
                << r.guaranteed_mismatches << '\n';
      }
      f.commit();
    }
    {
      CsvFile f(dir, "benefit_curve.csv", written);
      f.out() << "views,cumulative_benefit,rows,picked\n";
      for (const auto& p : report.benefit_curve) {
        f.out() << p.views << ',' << p.cumulative_benefit << ',' << p.rows << ',' << p.picked << '\n';
      }
      f.commit();
    }
    {
      CsvFile f(dir, "k_sweep.csv", written);
      f.out() << "stored_k,answerable,extra_rows,n,mean_ms,median_ms,p90_ms\n";
      for (const auto& r : report.k_sweep) {
        const double mean = r.samples_ms.empty() ? 0.0
                                                 : std::accumulate(r.samples_ms.begin(), r.samples_ms.end(), 0.0) /
                                                       static_cast<double>(r.samples_ms.size());
        f.out() << r.stored_k << ',' << r.answerable << ',' << r.extra_rows << ',' << r.samples_ms.size() << ','
                << mean << ',' << median_of(r.samples_ms) << ',' << percentile(r.samples_ms, 0.9) << '\n';
      }
      f.commit();
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    for (const char* name : {"latency.csv", "storage.csv", "accuracy.csv", "benefit_curve.csv", "k_sweep.csv"}) {
      std::filesystem::remove(dir / name, ec);
    }
    throw;
  }
}

}  // namespace sttcube
