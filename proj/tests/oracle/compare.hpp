#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "oracle/brute_force.hpp"
#include "sttcube/query.hpp"

namespace oracle {

inline bool close(double a, double b, double rel = 1e-9) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

/// Empty when the engine result matches the oracle, else the first difference.
inline std::string diff(const QueryResult& got, const std::vector<Group>& want) {
  std::ostringstream out;
  if (got.groups.size() != want.size()) {
    out << "group count " << got.groups.size() << " != " << want.size();
    return out.str();
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    const auto& g = got.groups[i];
    const auto& w = want[i];
    if (g.member != w.member || g.interval != w.interval) {
      out << "group " << i << ": " << g.member << "/" << g.interval << " != " << w.member << "/" << w.interval;
      return out.str();
    }
    if (g.fact_count != w.fact_count) {
      out << w.member << ": facts " << g.fact_count << " != " << w.fact_count;
      return out.str();
    }
    if (!close(g.area, w.area)) {
      out << w.member << ": area " << g.area << " != " << w.area;
      return out.str();
    }
    if (g.ranking.size() != w.ranking.size()) {
      out << w.member << ": ranking length " << g.ranking.size() << " != " << w.ranking.size();
      return out.str();
    }
    for (std::size_t r = 0; r < w.ranking.size(); ++r) {
      const auto& a = g.ranking[r];
      const auto& b = w.ranking[r];
      if (a.keyword != b.keyword || a.freq != b.freq || a.change != b.change || !close(a.score, b.score)) {
        out << w.member << " #" << r << ": " << a.keyword << " f=" << a.freq << " c=" << a.change
            << " s=" << a.score << " != " << b.keyword << " f=" << b.freq << " c=" << b.change << " s=" << b.score;
        return out.str();
      }
    }
  }
  return {};
}

/// A random valid query over the schemes of `cfg`.
inline QuerySpec random_query(std::mt19937_64& rng, const BruteForce& bf, const std::vector<SttObject>& objects,
                              const CubeConfig& cfg) {
  const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const auto chance = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const auto& any = [&]() -> const SttObject& {
    return objects[std::uniform_int_distribution<std::size_t>(0, objects.size() - 1)(rng)];
  };

  static constexpr Measure kMeasures[] = {Measure::FactCount,  Measure::KeywordFrequency, Measure::Density,
                                          Measure::Volatility, Measure::TopKDense,        Measure::TopKVolatile,
                                          Measure::TopKFrequent};
  QuerySpec q;
  q.measure = kMeasures[pick(0, 6)];
  q.spatial_scheme = cfg.spatial_scheme;
  q.textual_scheme = cfg.textual_scheme;
  const int top = cfg.spatial_scheme == SpatialScheme::Grid ? cfg.grid.level_count : kSemanticAll;
  q.spatial_level = chance(0.1) ? 0 : pick(1, top);
  if (chance(0.5)) {
    for (int i = pick(1, 2); i > 0; --i) q.members.push_back(bf.spatial_chain(any(), q.spatial_scheme)[q.spatial_level]);
    if (chance(0.1)) q.members.push_back("nowhere");
  }
  if (q.spatial_level > 0 && chance(0.3)) q.group_by_spatial_level = pick(std::max(0, q.spatial_level - 2), q.spatial_level);
  q.textual_level = pick(cfg.textual_scheme == TextualScheme::Replication ? kTerm : kTheme, kTextAll);

  const bool volatile_m = q.measure == Measure::Volatility || q.measure == Measure::TopKVolatile;
  if (volatile_m || chance(0.5)) {
    const std::int64_t day = day_number(any().timestamp);
    static constexpr int kDays[] = {1, 2, 3, 7};
    const int days = kDays[pick(0, 3)];
    const std::int64_t from = (day - pick(0, days - 1)) * kSecondsPerDay;
    q.range = TimeRange{Instant{from}, Instant{from + days * kSecondsPerDay}};
    const int choices[] = {1, days, days * 2, days * 24};
    q.intervals = choices[pick(0, 3)];
    if (q.intervals > 48) q.intervals = days;
    if (!volatile_m && chance(0.3)) q.group_by_time = true;
  }
  if (chance(0.6)) q.k = static_cast<std::size_t>(pick(1, 15));
  if (chance(0.15)) {
    for (int i = 0; i < 3; ++i) {
      for (auto& m : bf.text_members(any(), q.textual_scheme, q.textual_level)) q.keywords.push_back(m);
    }
  }
  return q;
}

}  // namespace oracle
