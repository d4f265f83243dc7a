#include "sttcube/persist.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sttcube/synth.hpp"

namespace sttcube {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T>
T parse_num(std::string_view s, const char* what) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(std::string("cube store: bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(p, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

std::ifstream open_in(const fs::path& p, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(p, mode);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return in;
}

// Members, one level at a time from the top so parents precede children.
void write_dimension(const Dimension& d, const fs::path& p) {
  auto out = open_out(p);
  out << "# levels";
  for (int l = 0; l < d.level_count(); ++l) out << '\t' << d.level_name(l);
  out << "\nlevel\tid\tkey\tparent\tarea\tlo\thi\n";
  for (int l = d.level_count() - 1; l >= 0; --l) {
    for (MemberId id = 0; id < d.size(l); ++id) {
      out << l << '\t' << id << '\t' << d.key(l, id) << '\t' << d.parent(l, id) << '\t'
          << fmt(d.area(l, id)) << '\t' << d.lo(l, id) << '\t' << d.hi(l, id) << '\n';
    }
  }
}

Dimension read_dimension(const std::string& name, const fs::path& p) {
  auto in = open_in(p);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# levels\t", 0) != 0) {
    throw std::runtime_error("cube store: " + p.string() + " lacks a level header");
  }
  auto levels = split(line.substr(9), '\t');
  Dimension d(name, levels);
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 7) throw std::runtime_error("cube store: bad member row in " + p.string());
    const int level = parse_num<int>(f[0], "level");
    const auto id = parse_num<MemberId>(f[1], "member id");
    const auto parent = parse_num<MemberId>(f[3], "parent id");
    const double area = parse_num<double>(f[4], "area");
    const auto lo = parse_num<std::int64_t>(f[5], "range");
    const auto hi = parse_num<std::int64_t>(f[6], "range");
    if (level < 0 || level >= d.level_count()) throw std::runtime_error("cube store: bad level");
    if (level == d.level_count() - 1) {
      if (id != 0) throw std::runtime_error("cube store: extra top member");
      d.set_area(level, 0, area);
      d.set_range(level, 0, lo, hi);
      continue;
    }
    if (id != d.size(level)) throw std::runtime_error("cube store: member ids out of order");
    d.add(level, f[2], parent, area, lo, hi);
  }
  d.refresh();
  return d;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("cube store: truncated facts.bin");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_facts(const FactStore& f, const fs::path& p) {
  auto out = open_out(p, std::ios::binary);
  out.write("STTF", 4);
  put_u32(out, kStoreVersion);
  put_u32(out, static_cast<std::uint32_t>(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto terms = f.terms_of(i);
    put_u32(out, static_cast<std::uint32_t>(6 + terms.size()));
    for (MemberId v : {f.date[i], f.tod[i], f.location[i], f.cell[i], f.majority_theme[i], f.custom_theme[i]}) {
      put_u32(out, v);
    }
    for (MemberId t : terms) put_u32(out, t);
  }
}

FactStore read_facts(const fs::path& p) {
  auto in = open_in(p, std::ios::binary);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "STTF", 4) != 0) throw std::runtime_error("cube store: bad facts.bin");
  if (get_u32(in) > static_cast<std::uint32_t>(kStoreVersion)) throw std::runtime_error("cube store: facts.bin is newer");
  const std::uint32_t n = get_u32(in);
  FactStore f;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t len = get_u32(in);
    if (len < 6) throw std::runtime_error("cube store: short fact row");
    f.date.push_back(get_u32(in));
    f.tod.push_back(get_u32(in));
    f.location.push_back(get_u32(in));
    f.cell.push_back(get_u32(in));
    f.majority_theme.push_back(get_u32(in));
    f.custom_theme.push_back(get_u32(in));
    for (std::uint32_t t = 6; t < len; ++t) f.terms.push_back(get_u32(in));
    f.term_offsets.push_back(f.terms.size());
  }
  return f;
}

void write_cuboid(const Cuboid& c, const std::string& name, const fs::path& p) {
  auto out = open_out(p);
  out << "# " << name << "\ttop_k=" << (c.top_k ? std::to_string(*c.top_k) : "none") << '\n';
  out << "spatial\tdate\ttod\tfact_count\tboundary\tkeywords\n";
  for (std::size_t g = 0; g < c.group_count(); ++g) {
    const GroupKey& k = c.keys[g];
    out << k.spatial << '\t' << k.date << '\t' << k.tod << '\t' << c.fact_counts[g] << '\t' << c.boundaries[g] << '\t';
    bool first = true;
    for (const Entry& e : c.group(g)) {
      if (!first) out << ' ';
      first = false;
      out << e.keyword << ':' << e.freq;
    }
    out << '\n';
  }
}

Cuboid read_cuboid(const Coord& coord, const fs::path& p) {
  auto in = open_in(p);
  std::string line;
  std::getline(in, line);
  const auto pos = line.find("top_k=");
  if (pos == std::string::npos) throw std::runtime_error("cube store: bad cuboid header in " + p.string());
  Cuboid c;
  c.coord = coord;
  const std::string k = line.substr(pos + 6);
  if (k != "none") c.top_k = parse_num<std::uint32_t>(k, "top_k");
  std::getline(in, line);
  std::vector<Entry> list;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 6) throw std::runtime_error("cube store: bad cuboid row in " + p.string());
    list.clear();
    if (!f[5].empty()) {
      for (const auto& item : split(f[5], ' ')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw std::runtime_error("cube store: bad keyword entry");
        list.push_back({parse_num<MemberId>(std::string_view(item).substr(0, colon), "keyword"),
                        parse_num<std::uint32_t>(std::string_view(item).substr(colon + 1), "frequency")});
      }
    }
    c.append_group({parse_num<MemberId>(f[0], "member"), parse_num<MemberId>(f[1], "member"),
                    parse_num<MemberId>(f[2], "member")},
                   parse_num<std::uint32_t>(f[3], "fact count"), parse_num<std::uint32_t>(f[4], "boundary"), list);
  }
  return c;
}

json config_json(const CubeConfig& c) {
  return {{"spatial_scheme", std::string(to_string(c.spatial_scheme))},
          {"textual_scheme", std::string(to_string(c.textual_scheme))},
          {"keywords", c.keywords.kind == KeywordSet::Kind::HashtagsOnly ? "hashtags" : "all"},
          {"grid",
           {{"base_cell_size_km", c.grid.base_cell_size_km},
            {"coarsening_factor", c.grid.coarsening_factor},
            {"level_count", c.grid.level_count},
            {"reference_lat", c.grid.reference_lat}}},
          {"geocode_cutoff_km", c.geocode_cutoff_km},
          {"location_area_km2", c.location_area_km2}};
}

CubeConfig config_from(const json& j) {
  CubeConfig c;
  auto sp = parse_spatial_scheme(j.at("spatial_scheme").get<std::string>());
  auto tx = parse_textual_scheme(j.at("textual_scheme").get<std::string>());
  if (!sp || !tx) throw std::runtime_error("cube store: unknown scheme");
  c.spatial_scheme = *sp;
  c.textual_scheme = *tx;
  c.keywords.kind = j.at("keywords").get<std::string>() == "hashtags" ? KeywordSet::Kind::HashtagsOnly
                                                                     : KeywordSet::Kind::AllTerms;
  const auto& g = j.at("grid");
  c.grid.base_cell_size_km = g.at("base_cell_size_km").get<double>();
  c.grid.coarsening_factor = g.at("coarsening_factor").get<int>();
  c.grid.level_count = g.at("level_count").get<int>();
  c.grid.reference_lat = g.at("reference_lat").get<double>();
  c.geocode_cutoff_km = j.at("geocode_cutoff_km").get<double>();
  c.location_area_km2 = j.at("location_area_km2").get<double>();
  c.check();
  return c;
}

json materialization_json(const MaterializationConfig& m) {
  json j = {{"strategy", std::string(to_string(m.strategy))},
            {"budget", m.budget},
            {"unit", m.unit == BudgetUnit::Rows ? "rows" : m.unit == BudgetUnit::Cuboids ? "cuboids" : "bytes"},
            {"strict_budget", m.strict_budget}};
  j["top_k"] = m.top_k ? json(*m.top_k) : json(nullptr);
  return j;
}

MaterializationConfig materialization_from(const json& j) {
  MaterializationConfig m;
  auto s = parse_strategy(j.at("strategy").get<std::string>());
  if (!s) throw std::runtime_error("cube store: unknown strategy");
  m.strategy = *s;
  m.budget = j.at("budget").get<std::uint64_t>();
  const auto unit = j.at("unit").get<std::string>();
  m.unit = unit == "rows" ? BudgetUnit::Rows : unit == "cuboids" ? BudgetUnit::Cuboids : BudgetUnit::Bytes;
  m.strict_budget = j.at("strict_budget").get<bool>();
  if (!j.at("top_k").is_null()) m.top_k = j.at("top_k").get<std::uint32_t>();
  return m;
}

std::string file_name(const CubeSchema& schema, const Coord& c) { return coord_name(schema, c) + ".tsv"; }

}  // namespace

void save_cube(const SttCube& cube, const fs::path& dir) {
  const CubeData& d = cube.data();
  fs::create_directories(dir / "members");
  fs::create_directories(dir / "taxonomy");
  fs::remove_all(dir / "cuboids");
  fs::create_directories(dir / "cuboids");

  json schema = {{"version", kStoreVersion},
                 {"config", config_json(d.config)},
                 {"materialization", materialization_json(cube.materialization())},
                 {"facts", d.facts.size()},
                 {"rejected", d.rejected}};
  json cuboids = json::array();
  for (const auto& [coord, c] : cube.cuboids()) cuboids.push_back(coord_name(d.schema, coord));
  schema["cuboids"] = cuboids;
  json hierarchies = json::array();
  for (const auto& h : d.schema.hierarchies) hierarchies.push_back({{"name", h.name}, {"levels", h.levels}});
  schema["hierarchies"] = hierarchies;
  open_out(dir / "schema.json") << schema.dump(2) << '\n';

  write_dimension(d.date, dir / "members" / "date.tsv");
  write_dimension(d.tod, dir / "members" / "timeofday.tsv");
  write_dimension(d.semantic, dir / "members" / "semantic.tsv");
  write_dimension(d.grid, dir / "members" / "grid.tsv");
  write_dimension(d.text, dir / "members" / "text.tsv");
  write_facts(d.facts, dir / "facts.bin");
  for (const auto& [coord, c] : cube.cuboids()) {
    write_cuboid(*c, coord_name(d.schema, coord), dir / "cuboids" / file_name(d.schema, coord));
  }
  {
    auto out = open_out(dir / "lattice.tsv");
    cube.lattice().dump(out);
  }
  {
    auto out = open_out(dir / "taxonomy" / "geo.tsv");
    write_geo_tsv(out, d.taxonomies.geo->members());
  }
  {
    auto out = open_out(dir / "taxonomy" / "text.tsv");
    write_text_taxonomy_tsv(out, d.taxonomies.text->links());
  }
  {
    auto out = open_out(dir / "taxonomy" / "scores.tsv");
    write_scores_tsv(out, d.taxonomies.scores->entries());
  }
}

SttCube load_cube(const fs::path& dir) {
  json schema;
  try {
    schema = json::parse(open_in(dir / "schema.json"));
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("cube store: bad schema.json: ") + e.what());
  }
  if (schema.value("version", 0) < 1 || schema.value("version", 0) > kStoreVersion) {
    throw std::runtime_error("cube store: unsupported version");
  }
  auto data = std::make_shared<CubeData>();
  try {
    data->config = config_from(schema.at("config"));
    data->rejected = schema.at("rejected").get<std::size_t>();
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("cube store: ") + e.what());
  }
  data->schema = make_schema(data->config.spatial_scheme, data->config.textual_scheme, data->config.grid.level_count);
  data->taxonomies.geo = std::make_shared<const GeoTaxonomy>(GeoTaxonomy::load(dir / "taxonomy" / "geo.tsv"));
  data->taxonomies.text = std::make_shared<const TextTaxonomy>(TextTaxonomy::load(dir / "taxonomy" / "text.tsv"));
  data->taxonomies.scores =
      std::make_shared<const ImportanceScores>(ImportanceScores::load(dir / "taxonomy" / "scores.tsv"));
  data->date = read_dimension("date", dir / "members" / "date.tsv");
  data->tod = read_dimension("timeofday", dir / "members" / "timeofday.tsv");
  data->semantic = read_dimension("semantic", dir / "members" / "semantic.tsv");
  data->grid = read_dimension("grid", dir / "members" / "grid.tsv");
  data->text = read_dimension("text", dir / "members" / "text.tsv");
  data->facts = read_facts(dir / "facts.bin");

  Lattice lattice = Lattice::enumerate(data->schema);
  const Coord base = lattice.coord(0);
  data->base = read_cuboid(base, dir / "cuboids" / file_name(data->schema, base));
  SttCube cube(data, lattice);
  cube.drop_cuboids();
  for (const auto& name : schema.at("cuboids")) {
    const auto coord = parse_coord(data->schema, name.get<std::string>());
    if (!coord) throw std::runtime_error("cube store: unknown cuboid " + name.get<std::string>());
    if (*coord == base) continue;
    cube.put_cuboid(std::make_shared<const Cuboid>(read_cuboid(*coord, dir / "cuboids" / file_name(data->schema, *coord))));
  }
  {
    auto in = open_in(dir / "lattice.tsv");
    cube.lattice().restore(in);
  }
  cube.set_materialization(materialization_from(schema.at("materialization")));
  return cube;
}

}  // namespace sttcube
