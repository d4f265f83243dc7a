#include "sttcube/materialize.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>
#include <string>

#include "sttcube/cube.hpp"

namespace sttcube {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::NM: return "nm";
    case Strategy::PEM: return "pem";
    case Strategy::PAM: return "pam";
    case Strategy::FM: return "fm";
    case Strategy::Greedy: return "greedy";
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view s) {
  std::string lower(s);
  for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  for (Strategy v : {Strategy::NM, Strategy::PEM, Strategy::PAM, Strategy::FM, Strategy::Greedy}) {
    if (lower == to_string(v)) return v;
  }
  return std::nullopt;
}

void MaterializationConfig::check() const {
  if (top_k && *top_k == 0) throw std::invalid_argument("top-K must be positive");
  switch (strategy) {
    case Strategy::NM:
    case Strategy::PEM:
    case Strategy::FM:
      if (top_k) throw std::invalid_argument(std::string(to_string(strategy)) + " keeps full keyword lists");
      break;
    case Strategy::PAM:
      if (!top_k) throw std::invalid_argument("pam needs a finite top-K");
      break;
    case Strategy::Greedy:
      break;
  }
}

std::vector<GreedyStep> greedy_plan(const Lattice& lattice, std::uint64_t budget_rows, bool strict,
                                    std::size_t max_picks) {
  Lattice lat = lattice;
  std::vector<GreedyStep> steps;
  std::uint64_t total = lat.materialized_rows();
  do {
    if (steps.size() >= max_picks) break;
    const auto ben = lat.benefits();
    std::size_t best = lat.size();
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const std::uint64_t rows = lat.rows(i);
      if (lat.materialized(i) || rows == kUnknownRows) continue;
      if (strict && (total + rows < total || total + rows > budget_rows)) continue;
      if (best == lat.size() || ben[i] > ben[best] ||
          (ben[i] == ben[best] && rows < lat.rows(best))) {
        best = i;
      }
    }
    if (best == lat.size()) break;
    if (ben[best] == 0 && !steps.empty()) break;
    lat.set_materialized(best, true);
    total += lat.rows(best);
    steps.push_back({best, ben[best], lat.rows(best), total});
  } while (total <= budget_rows);
  return steps;
}

namespace {

int level_sum(const Coord& c) { return c[0] + c[1] + c[2] + c[3]; }

std::vector<std::vector<std::size_t>> layers(const Lattice& lat) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const auto s = static_cast<std::size_t>(level_sum(lat.coord(i)));
    if (out.size() <= s) out.resize(s + 1);
    out[s].push_back(i);
  }
  return out;
}

/// Visits every lattice node layer by layer with its exact cuboid, each
/// computed from the smallest exact parent of the previous layer or from a
/// stored exact cuboid.
template <class Fn>
void sweep(const SttCube& cube, Fn&& fn) {
  const Lattice& lat = cube.lattice();
  std::map<std::size_t, std::shared_ptr<const Cuboid>> prev;
  for (const auto& layer : layers(lat)) {
    std::map<std::size_t, std::shared_ptr<const Cuboid>> cur;
    for (std::size_t i : layer) {
      const Coord& c = lat.coord(i);
      std::shared_ptr<const Cuboid> exact;
      auto stored = cube.cuboids().find(c);
      if (stored != cube.cuboids().end() && !stored->second->truncated()) {
        exact = stored->second;
      } else {
        const Cuboid* src = nullptr;
        for (int d = 0; d < kDims; ++d) {
          if (c[d] == 0) continue;
          Coord up = c;
          --up[d];
          auto it = prev.find(lat.index(up));
          if (it != prev.end() && (!src || it->second->row_count() < src->row_count())) {
            src = it->second.get();
          }
        }
        if (!src) throw std::logic_error("lattice sweep found no parent");
        exact = std::make_shared<const Cuboid>(aggregate_parallel(*src, cube.lift_spec(src->coord, c)));
      }
      fn(i, *exact);
      cur.emplace(i, std::move(exact));
    }
    prev = std::move(cur);
  }
}

void materialize_into(SttCube& out, const Coord& c, std::optional<std::uint32_t> top_k) {
  const Coord src = out.smallest_exact_ancestor(c);
  out.put_cuboid(std::make_shared<const Cuboid>(out.aggregate(c, src, top_k)));
}

}  // namespace

void compute_sizes(SttCube& cube) {
  if (cube.lattice().all_rows_known()) return;
  std::vector<std::uint64_t> rows(cube.lattice().size());
  sweep(cube, [&](std::size_t i, const Cuboid& c) { rows[i] = c.row_count(); });
  for (std::size_t i = 0; i < rows.size(); ++i) cube.lattice().set_rows(i, rows[i]);
}

std::uint64_t budget_in_rows(const SttCube& cube, const MaterializationConfig& cfg) {
  switch (cfg.unit) {
    case BudgetUnit::Rows: return cfg.budget;
    case BudgetUnit::Cuboids: return kUnknownRows;
    case BudgetUnit::Bytes: {
      const Cuboid& base = cube.data().base;
      const std::uint64_t rows = std::max<std::uint64_t>(1, base.row_count());
      const std::uint64_t width = std::max<std::uint64_t>(1, base.memory_bytes() / rows);
      return cfg.budget / width;
    }
  }
  return cfg.budget;
}

namespace {

SttCube greedy_impl(const SttCube& cube, std::uint64_t budget_rows, std::optional<std::uint32_t> top_k,
                    bool strict, std::size_t max_picks) {
  SttCube out = cube;
  compute_sizes(out);
  for (const auto& step : greedy_plan(out.lattice(), budget_rows, strict, max_picks)) {
    const Coord c = out.lattice().coord(step.node);
    materialize_into(out, c, top_k);
    out.lattice().set_materialized(step.node, true);
  }
  return out;
}

}  // namespace

SttCube greedy_materialize(const SttCube& cube, std::uint64_t budget_rows,
                           std::optional<std::uint32_t> top_k, bool strict) {
  return greedy_impl(cube, budget_rows, top_k, strict, SIZE_MAX);
}

SttCube apply_strategy(const SttCube& cube, const MaterializationConfig& cfg) {
  cfg.check();
  SttCube out = cube;
  out.drop_cuboids();
  out.set_materialization(cfg);
  switch (cfg.strategy) {
    case Strategy::NM:
      return out;
    case Strategy::FM: {
      std::vector<std::shared_ptr<const Cuboid>> all;
      sweep(out, [&](std::size_t i, const Cuboid& c) {
        if (i != 0) all.push_back(std::make_shared<const Cuboid>(c));
      });
      for (auto& c : all) out.put_cuboid(std::move(c));
      return out;
    }
    case Strategy::PEM:
    case Strategy::PAM:
    case Strategy::Greedy: {
      const std::size_t picks = cfg.unit == BudgetUnit::Cuboids ? cfg.budget : SIZE_MAX;
      SttCube res = greedy_impl(out, budget_in_rows(out, cfg), cfg.top_k, cfg.strict_budget,
                                std::max<std::size_t>(picks, 1));
      res.set_materialization(cfg);
      return res;
    }
  }
  return out;
}

SttCube materialize_plan(const SttCube& cube, const std::vector<Coord>& coords,
                         std::optional<std::uint32_t> top_k) {
  SttCube out = cube;
  out.drop_cuboids();
  std::vector<Coord> order = coords;
  std::sort(order.begin(), order.end(),
            [](const Coord& a, const Coord& b) { return level_sum(a) < level_sum(b) || (level_sum(a) == level_sum(b) && a < b); });
  for (const Coord& c : order) {
    if (c == out.base_coord()) continue;
    materialize_into(out, c, top_k);
  }
  return out;
}

}  // namespace sttcube
