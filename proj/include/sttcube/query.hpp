#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sttcube/cube.hpp"
#include "sttcube/model.hpp"

namespace sttcube {

/// ρ = freq / area.
double keyword_density(std::uint64_t freq, double area);
/// Δρ over per-interval frequencies with a zero before the first interval.
double keyword_volatility(const std::vector<std::uint64_t>& freqs, double area);

struct RankedKeyword {
  std::string keyword;
  double score = 0.0;
  std::uint64_t freq = 0;    // summed over intervals
  std::uint64_t change = 0;  // Σ |f_z - f_{z-1}|
  bool guaranteed = false;
};

enum class MergeScore { Frequency, Density, Volatility };

/// One ranked keyword list of one area member during one interval.
struct RankedList {
  std::string member;
  double area = 0.0;
  int interval = 0;
  std::vector<std::pair<std::string, std::uint64_t>> entries;  // ranked
  std::uint64_t boundary = 0;  // first dropped frequency, 0 for a complete list
};

struct ApproxTopK {
  std::vector<std::string> members;  // merged area, sorted
  double area = 0.0;
  int intervals = 1;
  std::vector<RankedKeyword> ranking;
  std::uint64_t epsilon = 0;
  /// Leading positions equal to the exact ranking.
  std::size_t delta = 0;
  /// Leading positions whose merged frequency reaches epsilon.
  std::size_t frequency_cutoff_positions = 0;
  /// Leading positions proven by per-keyword frequency bounds.
  std::size_t bounded_positions = 0;
  std::vector<std::pair<std::string, std::uint64_t>> merged_frequencies;  // every seen keyword
};

/// Merges truncated lists into an approximate top-k. Ties rank by keyword.
ApproxTopK topk_merge(const std::vector<RankedList>& lists, int intervals, std::size_t k,
                      MergeScore score);
inline ApproxTopK topk_volatile_merge(const std::vector<RankedList>& lists, int intervals,
                                      std::size_t k) {
  return topk_merge(lists, intervals, k, MergeScore::Volatility);
}

/// Exact ranking of merged complete lists.
std::vector<RankedKeyword> exact_ranking(const std::vector<RankedList>& lists, int intervals,
                                         std::optional<std::size_t> k, MergeScore score);

struct QueryPlan {
  Coord target{};
  Coord source{};
  std::uint64_t source_rows = 0;
  bool approximate = false;
  bool fact_scan = false;     // query schemes differ from the cube's
  bool spatial_seek = false;  // source groups located by spatial member
  std::int64_t interval_seconds = 0;
};

struct GroupResult {
  std::string member;
  int interval = -1;  // set when results are split by interval
  std::uint64_t fact_count = 0;
  double area = 0.0;
  std::vector<RankedKeyword> ranking;
  std::uint64_t epsilon = 0;
  std::size_t delta = 0;
  std::size_t frequency_cutoff_positions = 0;
};

struct QueryResult {
  QueryPlan plan;
  std::vector<GroupResult> groups;
  std::vector<std::string> warnings;

  /// Hash over members, intervals, counts and keyword ranks. Scores are
  /// covered through their integer numerators.
  std::uint64_t digest() const;
};

/// Throws std::invalid_argument for a spec that does not fit the cube.
void check_query(const SttCube& cube, const QuerySpec& q);

/// Chooses the target coordinate and the cheapest usable source.
QueryPlan rewrite(const SttCube& cube, const QuerySpec& q);

QueryResult evaluate(const SttCube& cube, const QuerySpec& q);
QueryResult evaluate(const SttCube& cube, const QuerySpec& q, const QueryPlan& plan);

}  // namespace sttcube
