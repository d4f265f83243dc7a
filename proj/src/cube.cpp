#include "sttcube/cube.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>
#include <stdexcept>

namespace sttcube {

void CubeConfig::check() const {
  grid.check();
  if (!(location_area_km2 > 0.0)) throw std::invalid_argument("location area must be positive");
  if (!(geocode_cutoff_km > 0.0)) throw std::invalid_argument("geocode cutoff must be positive");
}

Taxonomies Taxonomies::resolved() const {
  if (!geo || geo->empty()) throw std::invalid_argument("a geo taxonomy is required");
  Taxonomies out = *this;
  if (!out.text) out.text = std::make_shared<const TextTaxonomy>();
  if (!out.scores) out.scores = std::make_shared<const ImportanceScores>();
  return out;
}

namespace {

constexpr std::int64_t kMinTime = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kMaxTime = std::numeric_limits<std::int64_t>::max();

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string location_key(GeoPoint p) { return format_double(p.lat) + "," + format_double(p.lon); }

void init_dimensions(CubeData& d) {
  d.date = Dimension("date", {"day", "month", "quarter", "year", "all"});
  d.date.set_range(kDateAll, 0, kMinTime, kMaxTime);
  d.tod = Dimension("timeofday", {"second", "minute", "hour", "all"});
  d.tod.set_range(kTodAll, 0, 0, kSecondsPerDay);
  d.text = Dimension("text", {"term", "theme", "topic", "concept", "all"});

  std::vector<std::string> grid_levels;
  for (int l = 0; l < d.config.grid.level_count; ++l) grid_levels.push_back("cell" + std::to_string(l));
  grid_levels.push_back("all");
  d.grid = Dimension("grid", std::move(grid_levels));

  d.semantic = Dimension("semantic", {"location", "city", "region", "country", "all"});
  const GeoTaxonomy& geo = *d.taxonomies.geo;
  double all_area = 0.0;
  for (auto i : geo.level_members("country")) {
    const auto& m = geo.members()[i];
    d.semantic.add(kCountry, m.id, 0, m.area_km2);
    all_area += m.area_km2;
  }
  for (auto i : geo.level_members("region")) {
    const auto& m = geo.members()[i];
    d.semantic.add(kRegion, m.id, d.semantic.find(kCountry, m.parent), m.area_km2);
  }
  for (auto i : geo.level_members("city")) {
    const auto& m = geo.members()[i];
    d.semantic.add(kCity, m.id, d.semantic.find(kRegion, m.parent), m.area_km2);
  }
  // UNKNOWN spans the whole known territory so its densities stay small.
  const double unknown_area = geo.known_city_area();
  const MemberId uc = d.semantic.add(kCountry, kUnknownMember, 0, unknown_area);
  const MemberId ur = d.semantic.add(kRegion, kUnknownMember, uc, unknown_area);
  d.semantic.add(kCity, kUnknownMember, ur, unknown_area);
  all_area += unknown_area;
  d.semantic.set_area(kSemanticAll, 0, all_area);
}

void add_fact(CubeData& d, const SttObject& obj) {
  // Time.
  const std::int64_t day = day_number(obj.timestamp);
  const CivilDate c = civil_from_days(day);
  const TemporalMembers tm = build_temporal(obj.timestamp);
  const unsigned q0 = (c.month - 1) / 3 * 3 + 1;
  const auto start = [](int y, unsigned m) { return days_from_civil({y, m, 1}); };
  const auto next_month = [&](int y, unsigned m, unsigned span) {
    unsigned nm = m + span;
    while (nm > 12) {
      nm -= 12;
      ++y;
    }
    return start(y, nm);
  };
  const MemberId year = d.date.add(kYear, tm.year, 0, 0, start(c.year, 1), start(c.year + 1, 1));
  const MemberId quarter =
      d.date.add(kQuarter, tm.quarter, year, 0, start(c.year, q0), next_month(c.year, q0, 3));
  const MemberId month =
      d.date.add(kMonth, tm.month, quarter, 0, start(c.year, c.month), next_month(c.year, c.month, 1));
  const MemberId day_id = d.date.add(kDay, tm.day, month, 0, day, day + 1);

  const std::int64_t sod = second_of_day(obj.timestamp);
  const std::int64_t h0 = sod / 3600 * 3600;
  const std::int64_t m0 = sod / 60 * 60;
  const MemberId hour = d.tod.add(kHour, tm.hour, 0, 0, h0, h0 + 3600);
  const MemberId minute = d.tod.add(kMinute, tm.minute, hour, 0, m0, m0 + 60);
  const MemberId second = d.tod.add(kSecond, tm.second, minute, 0, sod, sod + 1);

  // Space: semantic location point and grid cell chain.
  const std::string lkey = location_key(obj.location);
  MemberId loc = d.semantic.find(kLocation, lkey);
  if (loc == kNoMember) {
    const std::string city =
        reverse_geocode(obj.location, *d.taxonomies.geo, d.config.geocode_cutoff_km);
    loc = d.semantic.add(kLocation, lkey, d.semantic.find(kCity, city), d.config.location_area_km2);
  }
  const GridConfig& g = d.config.grid;
  std::vector<GridCell> cells{grid_cell_of(obj.location, g, 0)};
  for (int l = 1; l < g.level_count; ++l) cells.push_back(grid_parent(cells.back(), g));
  MemberId parent = 0;
  for (int l = g.level_count - 1; l >= 0; --l) {
    const std::size_t before = d.grid.size(l);
    parent = d.grid.add(l, cells[l].key(), parent, g.cell_area_km2(l));
    if (l == g.level_count - 1 && d.grid.size(l) != before) {
      d.grid.set_area(g.level_count, 0, d.grid.area(g.level_count, 0) + g.cell_area_km2(l));
    }
  }
  const MemberId cell = parent;

  // Text.
  const TextTaxonomy& tax = *d.taxonomies.text;
  FactStore& f = d.facts;
  std::map<MemberId, int> support;
  std::vector<MemberId> keyword_themes;
  for (const auto& term : obj.terms) {
    MemberId t = d.text.find(kTerm, term);
    if (t == kNoMember) {
      const std::string theme = tax.parent(term, kTerm);
      const std::string topic = tax.parent(theme, kTheme);
      const std::string concept_key = tax.parent(topic, kTopic);
      const MemberId cid = d.text.add(kConcept, concept_key, 0);
      const MemberId pid = d.text.add(kTopic, topic, cid);
      const MemberId hid = d.text.add(kTheme, theme, pid);
      t = d.text.add(kTerm, term, hid, 0.0, d.config.keywords.contains(term) ? 1 : 0);
    }
    f.terms.push_back(t);
    if (d.text.lo(kTerm, t) != 0) {
      const MemberId th = d.text.parent(kTerm, t);
      ++support[th];
      keyword_themes.push_back(th);
    }
  }
  f.term_offsets.push_back(f.terms.size());

  MemberId majority = kNoMember, custom = kNoMember;
  int best_support = 0;
  double best_score = 0.0;
  for (const auto& [th, n] : support) {
    const std::string& key = d.text.key(kTheme, th);
    if (majority == kNoMember || n > best_support ||
        (n == best_support && key < d.text.key(kTheme, majority))) {
      majority = th;
      best_support = n;
    }
    const double s = d.taxonomies.scores->get(key);
    if (custom == kNoMember || s > best_score ||
        (s == best_score && key < d.text.key(kTheme, custom))) {
      custom = th;
      best_score = s;
    }
  }

  f.date.push_back(day_id);
  f.tod.push_back(second);
  f.location.push_back(loc);
  f.cell.push_back(cell);
  f.majority_theme.push_back(majority);
  f.custom_theme.push_back(custom);
}

void refresh_all(CubeData& d) {
  d.date.refresh();
  d.tod.refresh();
  d.semantic.refresh();
  d.grid.refresh();
  d.text.refresh();
}

std::size_t ingest(CubeData& d, const std::vector<SttObject>& objects) {
  std::size_t accepted = 0;
  for (const auto& obj : objects) {
    if (!validate(obj).accepted) {
      ++d.rejected;
      continue;
    }
    add_fact(d, obj);
    ++accepted;
  }
  refresh_all(d);
  return accepted;
}

Cuboid base_of(const CubeData& d, const Cuboid& groups) {
  const int text_level = text_base_level(d.config.textual_scheme);
  LiftSpec spec;
  spec.text_members = d.text.size(text_level);
  spec.name_rank = &d.text.name_rank(text_level);
  return aggregate_parallel(groups, spec);
}

}  // namespace

Cuboid fact_groups(const CubeData& data, std::size_t first, std::size_t last,
                   SpatialScheme spatial, TextualScheme textual) {
  const FactStore& f = data.facts;
  Cuboid out;
  out.keys.reserve(last - first);
  std::vector<Entry> list;
  for (std::size_t i = first; i < last; ++i) {
    list.clear();
    if (textual == TextualScheme::Replication) {
      for (MemberId t : f.terms_of(i)) {
        if (data.is_keyword(t)) list.push_back({t, 1});
      }
    } else {
      const MemberId th = textual == TextualScheme::Majority ? f.majority_theme[i] : f.custom_theme[i];
      if (th != kNoMember) list.push_back({th, 1});
    }
    const MemberId s = spatial == SpatialScheme::Grid ? f.cell[i] : f.location[i];
    out.append_group({s, f.date[i], f.tod[i]}, 1, 0, list);
  }
  return out;
}

SttCube::SttCube(std::shared_ptr<const CubeData> data, Lattice lattice)
    : data_(std::move(data)), lattice_(std::move(lattice)) {}

const Dimension& SttCube::dimension(int slot) const {
  switch (slot) {
    case kDateDim: return data_->date;
    case kSpatialDim: return data_->spatial();
    case kTextDim: return data_->text;
    case kTodDim: return data_->tod;
  }
  throw std::out_of_range("lattice slot");
}

const Cuboid* SttCube::cuboid(const Coord& c) const {
  auto it = store_.find(c);
  return it == store_.end() ? nullptr : it->second.get();
}

std::uint64_t SttCube::cuboid_rows(const Coord& c) const {
  auto it = rows_.find(c);
  return it == rows_.end() ? 0 : it->second;
}

void SttCube::put_cuboid(std::shared_ptr<const Cuboid> c) {
  const std::size_t i = lattice_.index(c->coord);
  const std::uint64_t rows = c->row_count();
  lattice_.set_materialized(i, true);
  if (!c->truncated()) lattice_.set_rows(i, rows);
  rows_[c->coord] = rows;
  store_[c->coord] = std::move(c);
}

void SttCube::drop_cuboids() {
  store_.clear();
  rows_.clear();
  for (std::size_t i = 1; i < lattice_.size(); ++i) lattice_.set_materialized(i, false);
  store_[base_coord()] = std::shared_ptr<const Cuboid>(data_, &data_->base);
  rows_[base_coord()] = data_->base.row_count();
}

std::uint64_t SttCube::total_rows() const {
  std::uint64_t total = 0;
  for (const auto& [coord, rows] : rows_) total += rows;
  return total;
}

LiftSpec make_lift_spec(const CubeData& data, SpatialScheme spatial, TextualScheme textual,
                        const Coord& source, const Coord& target,
                        std::optional<std::uint32_t> top_k) {
  if (!Lattice::dominates(source, target)) {
    throw std::logic_error("aggregation source is not an ancestor of the target");
  }
  LiftSpec spec;
  spec.target = target;
  spec.top_k = top_k;
  const int shift = text_base_level(textual);
  if (source[kDateDim] != target[kDateDim]) {
    spec.date = &data.date.lift_table(source[kDateDim], target[kDateDim]);
  }
  if (source[kSpatialDim] != target[kSpatialDim]) {
    spec.spatial = &data.spatial(spatial).lift_table(source[kSpatialDim], target[kSpatialDim]);
  }
  if (source[kTextDim] != target[kTextDim]) {
    spec.text = &data.text.lift_table(source[kTextDim] + shift, target[kTextDim] + shift);
  }
  if (source[kTodDim] != target[kTodDim]) {
    spec.tod = &data.tod.lift_table(source[kTodDim], target[kTodDim]);
  }
  const int level = target[kTextDim] + shift;
  spec.text_members = data.text.size(level);
  spec.name_rank = &data.text.name_rank(level);
  return spec;
}

LiftSpec SttCube::lift_spec(const Coord& source, const Coord& target,
                            std::optional<std::uint32_t> top_k) const {
  return make_lift_spec(*data_, config().spatial_scheme, config().textual_scheme, source, target,
                        top_k);
}

Cuboid SttCube::aggregate(const Coord& target, const Coord& source,
                          std::optional<std::uint32_t> top_k) const {
  const Cuboid* src = cuboid(source);
  if (!src) throw std::logic_error("aggregation source is not materialized");
  return aggregate_parallel(*src, lift_spec(source, target, top_k));
}

Coord SttCube::smallest_exact_ancestor(const Coord& c) const {
  const Cuboid* best = nullptr;
  std::uint64_t best_rows = 0;
  for (const auto& [coord, cub] : store_) {
    if (cub->truncated() || !Lattice::dominates(coord, c)) continue;
    const std::uint64_t rows = cuboid_rows(coord);
    if (!best || rows < best_rows) {
      best = cub.get();
      best_rows = rows;
    }
  }
  if (!best) throw std::logic_error("no exact ancestor is materialized");
  return best->coord;
}

MeasureCell SttCube::cell(const Cuboid& cuboid, std::size_t group) const {
  MeasureCell out;
  out.fact_count = cuboid.fact_counts.at(group);
  const int level = text_level(cuboid.coord[kTextDim]);
  for (const Entry& e : cuboid.group(group)) {
    out.keyword_freqs.emplace_back(data_->text.key(level, e.keyword), e.freq);
  }
  out.surface_area = area(cuboid.coord[kSpatialDim], cuboid.keys[group].spatial);
  out.boundary = cuboid.boundaries[group];
  out.truncated = out.boundary != 0;
  return out;
}

ConstructResult construct(const std::vector<SttObject>& objects, const Taxonomies& taxonomies,
                          const CubeConfig& config, const MaterializationConfig& mat) {
  config.check();
  mat.check();
  auto data = std::make_shared<CubeData>();
  data->config = config;
  data->schema = make_schema(config.spatial_scheme, config.textual_scheme, config.grid.level_count);
  data->schema.check();
  data->taxonomies = taxonomies.resolved();
  init_dimensions(*data);
  const std::size_t accepted = ingest(*data, objects);
  data->base = base_of(*data, fact_groups(*data, 0, data->facts.size(), config.spatial_scheme,
                                          config.textual_scheme));
  const std::size_t rejected = data->rejected;

  SttCube cube(data, Lattice::enumerate(data->schema));
  cube.drop_cuboids();
  cube.lattice().set_rows(0, data->base.row_count());
  if (mat.strategy != Strategy::NM) cube = apply_strategy(cube, mat);
  cube.set_materialization(mat);
  return {std::move(cube), accepted, rejected};
}

ConstructResult update(const SttCube& cube, const std::vector<SttObject>& objects,
                       bool full_rebuild) {
  auto data = std::make_shared<CubeData>(cube.data());
  const std::size_t before_rejected = data->rejected;
  const std::size_t first = data->facts.size();
  const std::size_t accepted = ingest(*data, objects);
  const std::size_t rejected = data->rejected - before_rejected;
  if (accepted == 0 && !full_rebuild) {
    SttCube same = cube;
    return {std::move(same), 0, rejected};
  }
  const auto& cfg = data->config;
  const Cuboid delta_groups =
      fact_groups(*data, first, data->facts.size(), cfg.spatial_scheme, cfg.textual_scheme);
  const Cuboid delta = base_of(*data, delta_groups);
  const int base_text = text_base_level(cfg.textual_scheme);
  data->base = merge_add(data->base, delta, data->text.name_rank(base_text));

  Lattice lattice = cube.lattice();
  lattice.forget_unmaterialized_rows();
  SttCube out(data, lattice);
  out.drop_cuboids();
  out.set_materialization(cube.materialization());
  out.lattice().set_rows(0, data->base.row_count());

  const Coord base = out.base_coord();
  for (const auto& [coord, old] : cube.cuboids()) {
    if (coord == base) continue;
    Cuboid fresh;
    if (full_rebuild) {
      fresh = out.aggregate(coord, base, old->top_k);
    } else if (!old->truncated()) {
      const Cuboid d = aggregate_parallel(delta, out.lift_spec(base, coord));
      fresh = merge_add(*old, d, data->text.name_rank(out.text_level(coord[kTextDim])));
    } else {
      const Cuboid touched = aggregate_parallel(delta, out.lift_spec(base, coord));
      LiftSpec spec = out.lift_spec(base, coord, old->top_k);
      spec.only = &touched.keys;
      fresh = replace_groups(*old, aggregate_parallel(data->base, spec));
    }
    // Untruncated sizes of truncated cuboids are no longer known.
    if (fresh.truncated()) out.lattice().set_rows(out.lattice().index(coord), kUnknownRows);
    out.put_cuboid(std::make_shared<const Cuboid>(std::move(fresh)));
  }
  return {std::move(out), accepted, rejected};
}

}  // namespace sttcube
