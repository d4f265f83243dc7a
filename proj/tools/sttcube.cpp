#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "sttcube/bench.hpp"
#include "sttcube/cube.hpp"
#include "sttcube/hierarchy.hpp"
#include "sttcube/ingest.hpp"
#include "sttcube/materialize.hpp"
#include "sttcube/persist.hpp"
#include "sttcube/query.hpp"
#include "sttcube/synth.hpp"

namespace fs = std::filesystem;
using namespace sttcube;

namespace {

struct Inputs {
  std::string data;
  std::string format = "auto";
  std::string geo;
  std::string text_taxonomy;
  std::string scores;
  std::string stopwords;
};

void add_inputs(CLI::App* app, Inputs& in, bool data_required) {
  auto* d = app->add_option("--data", in.data, "JSON-lines or CSV records");
  if (data_required) d->required();
  app->add_option("--format", in.format, "jsonl, csv or auto")->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  app->add_option("--geo", in.geo, "geographic taxonomy TSV");
  app->add_option("--text-taxonomy", in.text_taxonomy, "textual taxonomy TSV");
  app->add_option("--scores", in.scores, "theme importance scores TSV");
  app->add_option("--stopwords", in.stopwords, "one stopword per line");
}

std::vector<SttObject> read_objects(const Inputs& in, std::size_t& rejected) {
  RecordFormat fmt = RecordFormat::Jsonl;
  if (in.format == "csv" || (in.format == "auto" && fs::path(in.data).extension() == ".csv")) {
    fmt = RecordFormat::Csv;
  }
  std::ifstream f(in.data);
  if (!f) throw std::runtime_error("cannot open " + in.data);
  const StopwordList stops = in.stopwords.empty() ? StopwordList::builtin() : StopwordList::load(in.stopwords);
  std::vector<SttObject> out;
  for (auto& r : parse_records(f, fmt, stops)) {
    if (r.object) {
      out.push_back(std::move(*r.object));
    } else {
      ++rejected;
    }
  }
  return out;
}

Taxonomies read_taxonomies(const Inputs& in) {
  if (in.geo.empty()) throw std::runtime_error("--geo is required");
  Taxonomies t;
  t.geo = std::make_shared<const GeoTaxonomy>(GeoTaxonomy::load(in.geo));
  if (!in.text_taxonomy.empty()) t.text = std::make_shared<const TextTaxonomy>(TextTaxonomy::load(in.text_taxonomy));
  if (!in.scores.empty()) t.scores = std::make_shared<const ImportanceScores>(ImportanceScores::load(in.scores));
  return t;
}

struct MatOptions {
  std::string strategy = "nm";
  std::uint64_t budget_rows = 0;
  std::uint32_t top_k = 0;
  bool strict = false;
};

void add_mat(CLI::App* app, MatOptions& m) {
  app->add_option("--strategy", m.strategy, "nm, pem, pam, fm or greedy");
  app->add_option("--budget-rows", m.budget_rows, "row budget; 0 means 1.2 times the base");
  app->add_option("--top-k", m.top_k, "stored list length for pam");
  app->add_flag("--strict", m.strict, "never exceed the budget");
}

MaterializationConfig mat_config(const MatOptions& m, const SttCube* cube) {
  MaterializationConfig c;
  const auto s = parse_strategy(m.strategy);
  if (!s) throw std::runtime_error("unknown strategy '" + m.strategy + "'");
  c.strategy = *s;
  c.strict_budget = m.strict;
  c.budget = m.budget_rows;
  if (c.budget == 0 && cube) c.budget = cube->data().base.row_count() * 6 / 5;
  if (m.top_k) {
    c.top_k = m.top_k;
  } else if (c.strategy == Strategy::PAM) {
    c.top_k = kDefaultTopK;
  }
  c.check();
  return c;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

int level_index(const HierarchySchema& h, const std::string& name) {
  const auto it = std::find(h.levels.begin(), h.levels.end(), name);
  if (it == h.levels.end()) throw std::runtime_error("unknown " + h.name + " level '" + name + "'");
  return static_cast<int>(it - h.levels.begin());
}

Instant parse_instant(const std::string& s) {
  auto t = parse_rfc3339(s);
  if (!t && s.size() == 10) t = parse_rfc3339(s + "T00:00:00Z");
  if (!t) throw std::runtime_error("bad timestamp '" + s + "'");
  return *t;
}

void save_or_replace(const SttCube& cube, const std::string& out) {
  save_cube(cube, out);
  std::cerr << "saved " << cube.cuboids().size() << " cuboids, " << cube.total_rows() << " rows to " << out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-textual-temporal OLAP cube"};
  app.require_subcommand(1);

  // synth
  SynthConfig sc;
  std::string synth_out = "synth.jsonl";
  std::string synth_tax;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with its taxonomies");
  synth->add_option("--objects", sc.objects);
  synth->add_option("--seed", sc.seed);
  synth->add_option("--days", sc.days);
  synth->add_option("--cities", sc.cities);
  synth->add_option("--regions", sc.regions);
  synth->add_option("--vocabulary", sc.vocabulary);
  synth->add_option("--zipf", sc.zipf_exponent);
  synth->add_option("--out", synth_out, "records file");
  synth->add_option("--taxonomy-dir", synth_tax, "where geo.tsv, text_taxonomy.tsv and scores.tsv go");

  // build
  Inputs build_in;
  MatOptions build_mat;
  std::string build_out;
  std::string spatial_scheme = "semantic", textual_scheme = "replication";
  bool hashtags_only = false;
  auto* build = app.add_subcommand("build", "Construct a cube from records");
  add_inputs(build, build_in, true);
  add_mat(build, build_mat);
  build->add_option("--spatial-scheme", spatial_scheme)->check(CLI::IsMember({"semantic", "grid"}));
  build->add_option("--textual-scheme", textual_scheme)->check(CLI::IsMember({"replication", "majority", "custom"}));
  build->add_flag("--hashtags-only", hashtags_only, "keywords are hashtags only");
  build->add_option("--out", build_out, "cube directory")->required();

  // update
  Inputs upd_in;
  std::string upd_cube, upd_out;
  bool full_rebuild = false;
  auto* upd = app.add_subcommand("update", "Append records to a stored cube");
  upd->add_option("--cube", upd_cube)->required();
  upd->add_option("--data", upd_in.data)->required();
  upd->add_option("--format", upd_in.format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  upd->add_option("--stopwords", upd_in.stopwords);
  upd->add_flag("--full-rebuild", full_rebuild, "recompute every cuboid from the base");
  upd->add_option("--out", upd_out, "defaults to the input cube");

  // materialize
  std::string mat_cube, mat_out;
  MatOptions mat_opts;
  auto* mat = app.add_subcommand("materialize", "Re-plan the materialized cuboids of a stored cube");
  mat->add_option("--cube", mat_cube)->required();
  add_mat(mat, mat_opts);
  mat->add_option("--out", mat_out, "defaults to the input cube");

  // query
  std::string q_cube, q_measure = "topk-dense", q_spatial = "city", q_text = "term", q_members, q_keywords;
  std::string q_from, q_to, q_group_by, q_scheme;
  int q_intervals = 1;
  std::size_t q_k = 0;
  bool q_group_time = false;
  MatOptions q_mat;
  q_mat.strategy.clear();
  auto* qry = app.add_subcommand("query", "Evaluate a query and print a TSV ranking");
  qry->add_option("--cube", q_cube)->required();
  qry->add_option("--measure", q_measure);
  qry->add_option("--spatial-level", q_spatial);
  qry->add_option("--members", q_members, "comma-separated");
  qry->add_option("--textual-level", q_text);
  qry->add_option("--keywords", q_keywords, "comma-separated filter");
  qry->add_option("--from", q_from);
  qry->add_option("--to", q_to);
  qry->add_option("--intervals", q_intervals);
  qry->add_option("--k", q_k, "0 returns every keyword");
  qry->add_option("--group-by", q_group_by, "spatial level");
  qry->add_flag("--group-by-time", q_group_time);
  qry->add_option("--scheme", q_scheme, "spatial,textual");
  add_mat(qry, q_mat);

  // lattice
  std::string lat_cube;
  bool lat_sizes = false;
  auto* lat = app.add_subcommand("lattice", "Print the lattice as TSV");
  lat->add_option("--cube", lat_cube)->required();
  lat->add_flag("--sizes", lat_sizes, "compute every row count first");

  // bench
  Inputs bench_in;
  BenchConfig bc;
  std::size_t bench_objects = 100000;
  std::string strategies = "nm,pam,pem,fm", flavor = "dense", bench_out = "reports";
  std::string cost_sizes;
  auto* bench = app.add_subcommand("bench", "Run the query suite and write CSV reports");
  add_inputs(bench, bench_in, false);
  bench->add_option("--objects", bench_objects, "synthetic object count when --data is absent");
  bench->add_option("--strategies", strategies);
  bench->add_option("--reps", bc.repetitions);
  bench->add_option("--instances", bc.instances);
  bench->add_option("--seed", bc.seed);
  bench->add_option("--flavor", flavor)->check(CLI::IsMember({"dense", "volatile"}));
  bench->add_option("--budget-fraction", bc.budget_fraction);
  bench->add_option("--top-k", bc.top_k);
  bench->add_option("--k-samples", bc.k_samples);
  bench->add_option("--cost-sizes", cost_sizes, "comma-separated prefix sizes for the cost model");
  bench->add_option("--out", bench_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const SynthDataset ds = synthesize(sc);
      const fs::path out(synth_out);
      const fs::path dir = synth_tax.empty() ? (out.has_parent_path() ? out.parent_path() : fs::path(".")) : fs::path(synth_tax);
      fs::create_directories(dir);
      std::ofstream f(out);
      write_jsonl(f, ds.objects);
      std::ofstream g(dir / "geo.tsv"), t(dir / "text_taxonomy.tsv"), s(dir / "scores.tsv");
      write_geo_tsv(g, ds.geo);
      write_text_taxonomy_tsv(t, ds.text_links);
      write_scores_tsv(s, ds.scores);
      if (!f || !g || !t || !s) throw std::runtime_error("write failed");
      std::cerr << "wrote " << ds.objects.size() << " objects to " << out << "\n";
    } else if (*build) {
      std::size_t parse_rejected = 0;
      const auto objects = read_objects(build_in, parse_rejected);
      CubeConfig cfg;
      cfg.spatial_scheme = *parse_spatial_scheme(spatial_scheme);
      cfg.textual_scheme = *parse_textual_scheme(textual_scheme);
      if (hashtags_only) cfg.keywords.kind = KeywordSet::Kind::HashtagsOnly;
      auto r = construct(objects, read_taxonomies(build_in), cfg);
      if (build_mat.strategy != "nm") r.cube = apply_strategy(r.cube, mat_config(build_mat, &r.cube));
      std::cerr << "accepted " << r.accepted << ", rejected " << r.rejected + parse_rejected << "\n";
      save_or_replace(r.cube, build_out);
    } else if (*upd) {
      const SttCube cube = load_cube(upd_cube);
      std::size_t parse_rejected = 0;
      const auto objects = read_objects(upd_in, parse_rejected);
      const auto r = update(cube, objects, full_rebuild);
      std::cerr << "accepted " << r.accepted << ", rejected " << r.rejected + parse_rejected << "\n";
      save_or_replace(r.cube, upd_out.empty() ? upd_cube : upd_out);
    } else if (*mat) {
      SttCube cube = load_cube(mat_cube);
      cube.drop_cuboids();
      const SttCube out = apply_strategy(cube, mat_config(mat_opts, &cube));
      save_or_replace(out, mat_out.empty() ? mat_cube : mat_out);
    } else if (*qry) {
      SttCube cube = load_cube(q_cube);
      if (!q_mat.strategy.empty()) {
        const auto c = mat_config(q_mat, &cube);
        const auto& cur = cube.materialization();
        if (c.strategy != cur.strategy || c.top_k != cur.top_k || c.budget != cur.budget) {
          cube.drop_cuboids();
          cube = apply_strategy(cube, c);
        }
      }
      const auto& schema = cube.schema();
      QuerySpec q;
      const auto m = parse_measure(q_measure);
      if (!m) throw std::runtime_error("unknown measure '" + q_measure + "'");
      q.measure = *m;
      q.spatial_scheme = schema.spatial;
      q.textual_scheme = schema.textual;
      if (!q_scheme.empty()) {
        for (const auto& part : split(q_scheme, ',')) {
          if (auto s = parse_spatial_scheme(part)) {
            q.spatial_scheme = *s;
          } else if (auto t = parse_textual_scheme(part)) {
            q.textual_scheme = *t;
          } else {
            throw std::runtime_error("unknown scheme '" + part + "'");
          }
        }
      }
      const HierarchySchema spatial = make_schema(q.spatial_scheme, q.textual_scheme,
                                                  cube.config().grid.level_count).hierarchies[kSpatialDim];
      q.spatial_level = level_index(spatial, q_spatial);
      if (!q_group_by.empty()) q.group_by_spatial_level = level_index(spatial, q_group_by);
      HierarchySchema text;
      text.name = "text";
      text.levels = {"term", "theme", "topic", "concept", "all"};
      q.textual_level = level_index(text, q_text);
      q.members = split(q_members, ',');
      q.keywords = split(q_keywords, ',');
      if (!q_from.empty() || !q_to.empty()) {
        if (q_from.empty() || q_to.empty()) throw std::runtime_error("--from and --to go together");
        q.range = TimeRange{parse_instant(q_from), parse_instant(q_to)};
      }
      q.intervals = q_intervals;
      if (q_k) q.k = q_k;
      q.group_by_time = q_group_time;

      const QueryResult r = evaluate(cube, q);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cerr << "source " << (r.plan.fact_scan ? std::string("facts") : coord_name(schema, r.plan.source))
                << (r.plan.approximate ? " (approximate)" : "") << "\n";
      std::cout << std::setprecision(10);
      for (const auto& g : r.groups) {
        std::cout << "# member=" << g.member;
        if (g.interval >= 0) std::cout << " interval=" << g.interval;
        std::cout << " facts=" << g.fact_count << " area=" << g.area << " epsilon=" << g.epsilon
                  << " delta=" << g.delta << "\n";
        std::cout << "rank\tmember_or_keyword\tscore\tguaranteed\n";
        if (q.measure == Measure::FactCount) {
          std::cout << 1 << '\t' << g.member << '\t' << g.fact_count << '\t' << 1 << '\n';
          continue;
        }
        for (std::size_t i = 0; i < g.ranking.size(); ++i) {
          const auto& k = g.ranking[i];
          std::cout << i + 1 << '\t' << k.keyword << '\t' << k.score << '\t' << (k.guaranteed ? 1 : 0) << '\n';
        }
      }
    } else if (*lat) {
      SttCube cube = load_cube(lat_cube);
      if (lat_sizes) compute_sizes(cube);
      cube.lattice().dump(std::cout);
    } else if (*bench) {
      bc.flavor = flavor == "dense" ? SuiteFlavor::Dense : SuiteFlavor::Volatile;
      bc.strategies.clear();
      for (const auto& s : split(strategies, ',')) {
        const auto p = parse_strategy(s);
        if (!p || *p == Strategy::Greedy) throw std::runtime_error("bench strategies are nm, pem, pam and fm");
        bc.strategies.push_back(*p);
      }
      bc.check();
      std::vector<SttObject> objects;
      Taxonomies tax;
      if (bench_in.data.empty()) {
        SynthConfig cfg;
        cfg.objects = bench_objects;
        cfg.seed = bc.seed;
        SynthDataset ds = synthesize(cfg);
        tax = ds.taxonomies();
        objects = std::move(ds.objects);
      } else {
        std::size_t rejected = 0;
        objects = read_objects(bench_in, rejected);
        tax = read_taxonomies(bench_in);
      }
      const SttCube nm = construct(objects, tax, CubeConfig{}).cube;
      const BenchReport report = run_bench(nm, bc);
      emit_report(report, bench_out);
      if (!cost_sizes.empty()) {
        std::vector<std::size_t> sizes;
        for (const auto& s : split(cost_sizes, ',')) sizes.push_back(std::stoul(s));
        const auto pts = cost_model_microbench(objects, tax, CubeConfig{}, sizes);
        std::vector<double> x, y;
        std::ofstream f(fs::path(bench_out) / "cost_model.csv");
        f << "rows,median_ms\n";
        for (const auto& p : pts) {
          f << p.rows << ',' << p.median_ms << '\n';
          x.push_back(static_cast<double>(p.rows));
          y.push_back(p.median_ms);
        }
        const LinearFit fit = fit_line(x, y);
        std::cerr << "cost model: slope " << fit.slope << " ms/row, r2 " << fit.r2 << "\n";
      }
      std::cerr << "reports written to " << bench_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
