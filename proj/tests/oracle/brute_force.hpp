#pragma once

// Group-by over raw objects, independent of the cube's member stores,
// cuboids and kernels. Only the taxonomy lookups, reverse geocoding and
// grid binning are shared with the library.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sttcube/cube.hpp"
#include "sttcube/hierarchy.hpp"
#include "sttcube/ingest.hpp"
#include "sttcube/model.hpp"

namespace oracle {

using namespace sttcube;

struct Keyword {
  std::string keyword;
  std::uint64_t freq = 0;
  std::uint64_t change = 0;
  double score = 0.0;
};

struct Group {
  std::string member;
  int interval = -1;
  std::uint64_t fact_count = 0;
  double area = 0.0;
  std::vector<Keyword> ranking;
};

class BruteForce {
 public:
  BruteForce(std::vector<SttObject> objects, Taxonomies tax, CubeConfig cfg)
      : objects_(std::move(objects)), tax_(tax.resolved()), cfg_(std::move(cfg)) {
    objects_.erase(std::remove_if(objects_.begin(), objects_.end(),
                                  [](const SttObject& o) { return !validate(o).accepted; }),
                   objects_.end());
    for (const auto& o : objects_) {
      const int top = cfg_.grid.level_count - 1;
      top_cells_.insert(grid_cell_of(o.location, cfg_.grid, top).key());
    }
  }

  std::size_t size() const { return objects_.size(); }

  /// Member keys of one object at every spatial level of `scheme`, finest first.
  std::vector<std::string> spatial_chain(const SttObject& o, SpatialScheme scheme) const {
    std::vector<std::string> out;
    if (scheme == SpatialScheme::Grid) {
      for (int l = 0; l < cfg_.grid.level_count; ++l) out.push_back(grid_cell_of(o.location, cfg_.grid, l).key());
      out.push_back("ALL");
      return out;
    }
    char buf[64];
    auto p = std::to_chars(buf, buf + sizeof buf, o.location.lat);
    *p.ptr++ = ',';
    p = std::to_chars(p.ptr, buf + sizeof buf, o.location.lon);
    out.emplace_back(buf, p.ptr);
    const std::string city = reverse_geocode(o.location, *tax_.geo, cfg_.geocode_cutoff_km);
    for (auto& m : spatial_parents(city, *tax_.geo)) out.push_back(m);
    return out;
  }

  double area(SpatialScheme scheme, int level, const std::string& member) const {
    if (scheme == SpatialScheme::Grid) {
      if (level == cfg_.grid.level_count) {
        return static_cast<double>(top_cells_.size()) * cfg_.grid.cell_area_km2(level - 1);
      }
      return cfg_.grid.cell_area_km2(level);
    }
    const GeoTaxonomy& geo = *tax_.geo;
    if (level == kLocation) return cfg_.location_area_km2;
    if (level == kSemanticAll) {
      double a = geo.known_city_area();
      for (auto i : geo.level_members("country")) a += geo.members()[i].area_km2;
      return a;
    }
    if (member == kUnknownMember) return geo.known_city_area();
    return geo.find(member)->area_km2;
  }

  /// Keyword occurrences of one object at an absolute textual level.
  std::vector<std::string> text_members(const SttObject& o, TextualScheme scheme, int level) const {
    const TextTaxonomy& tax = *tax_.text;
    std::vector<std::string> keywords;
    for (const auto& t : o.terms) {
      if (cfg_.keywords.contains(t)) keywords.push_back(t);
    }
    const auto lift_theme = [&](std::string key) {
      if (level == kTextAll) return std::string("ALL");
      for (int l = kTheme; l < level; ++l) key = tax.parent(key, l);
      return key;
    };
    std::vector<std::string> out;
    if (scheme == TextualScheme::Replication) {
      for (const auto& t : keywords) {
        if (level == kTextAll) {
          out.push_back("ALL");
        } else if (level == kTerm) {
          out.push_back(t);
        } else {
          out.push_back(lift_theme(tax.parent(t, kTerm)));
        }
      }
      return out;
    }
    if (keywords.empty()) return out;
    std::map<std::string, int> support;
    for (const auto& t : keywords) ++support[tax.parent(t, kTerm)];
    std::string best;
    double best_value = 0.0;
    for (const auto& [theme, n] : support) {  // ascending keys keep the smaller on ties
      const double v = scheme == TextualScheme::Majority ? n : tax_.scores->get(theme);
      if (best.empty() || v > best_value) {
        best = theme;
        best_value = v;
      }
    }
    out.push_back(lift_theme(best));
    return out;
  }

  std::vector<Group> run(const QuerySpec& q) const {
    const int out_level = q.group_by_spatial_level.value_or(q.spatial_level);
    const bool volatile_m = q.measure == Measure::Volatility || q.measure == Measure::TopKVolatile;
    const int x = volatile_m ? q.intervals : 1;
    std::int64_t len = 0;
    if (q.range) len = (q.range->to.seconds - q.range->from.seconds) / q.intervals;
    const std::set<std::string> members(q.members.begin(), q.members.end());
    const std::set<std::string> filter(q.keywords.begin(), q.keywords.end());

    struct Acc {
      std::uint64_t facts = 0;
      std::map<std::string, std::vector<std::uint64_t>> freq;
    };
    std::map<std::pair<std::string, int>, Acc> groups;
    for (const auto& o : objects_) {
      const auto chain = spatial_chain(o, q.spatial_scheme);
      if (!members.empty() && !members.count(chain[q.spatial_level])) continue;
      int z = 0;
      if (q.range) {
        if (o.timestamp < q.range->from || !(o.timestamp < q.range->to)) continue;
        z = static_cast<int>((o.timestamp.seconds - q.range->from.seconds) / len);
      }
      Acc& a = groups[{chain[out_level], q.group_by_time ? z : -1}];
      ++a.facts;
      for (const auto& m : text_members(o, q.textual_scheme, q.textual_level)) {
        auto& f = a.freq[m];
        f.resize(x);
        ++f[volatile_m ? z : 0];
      }
    }

    std::vector<Group> out;
    for (const auto& [key, a] : groups) {
      Group g;
      g.member = key.first;
      g.interval = key.second;
      g.fact_count = a.facts;
      g.area = area(q.spatial_scheme, out_level, key.first);
      if (q.measure != Measure::FactCount) {
        for (const auto& [kw, f] : a.freq) {
          if (!filter.empty() && !filter.count(kw)) continue;
          Keyword k;
          k.keyword = kw;
          std::uint64_t prev = 0;
          for (auto v : f) {
            k.freq += v;
            k.change += v > prev ? v - prev : prev - v;
            prev = v;
          }
          switch (q.measure) {
            case Measure::KeywordFrequency:
            case Measure::TopKFrequent: k.score = static_cast<double>(k.freq); break;
            case Measure::Density:
            case Measure::TopKDense: k.score = static_cast<double>(k.freq) / g.area; break;
            default: k.score = static_cast<double>(k.change) / (g.area * x);
          }
          g.ranking.push_back(k);
        }
        std::sort(g.ranking.begin(), g.ranking.end(), [&](const Keyword& l, const Keyword& r) {
          const auto nl = volatile_m ? l.change : l.freq, nr = volatile_m ? r.change : r.freq;
          return nl != nr ? nl > nr : l.keyword < r.keyword;
        });
        const bool topk = q.measure == Measure::TopKDense || q.measure == Measure::TopKVolatile ||
                          q.measure == Measure::TopKFrequent;
        if (topk && q.k && g.ranking.size() > *q.k) g.ranking.resize(*q.k);
      }
      out.push_back(std::move(g));
    }
    return out;
  }

 private:
  std::vector<SttObject> objects_;
  Taxonomies tax_;
  CubeConfig cfg_;
  std::set<std::string> top_cells_;
};

}  // namespace oracle
