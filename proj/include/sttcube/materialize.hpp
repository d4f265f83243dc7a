#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "sttcube/lattice.hpp"
#include "sttcube/model.hpp"

namespace sttcube {

class SttCube;

enum class Strategy { NM, PEM, PAM, FM, Greedy };
enum class BudgetUnit { Rows, Cuboids, Bytes };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view s);

inline constexpr std::uint32_t kDefaultTopK = 31;

struct MaterializationConfig {
  Strategy strategy = Strategy::NM;
  std::uint64_t budget = 0;
  BudgetUnit unit = BudgetUnit::Rows;
  std::optional<std::uint32_t> top_k;  // empty keeps full keyword lists
  bool strict_budget = false;          // never exceed the budget

  /// Throws std::invalid_argument when the strategy and K disagree.
  void check() const;
};

struct GreedyStep {
  std::size_t node = 0;
  std::uint64_t benefit = 0;
  std::uint64_t rows = 0;
  std::uint64_t total_rows = 0;  // cube size after this pick
};

/// Benefit-greedy selection over a lattice whose row counts are known.
/// Picks the maximum-benefit node (ties: fewer rows, then smaller
/// coordinate) and repeats while the cube size stays within the budget. The
/// loop body runs at least once. With `strict`, only nodes that fit are
/// considered. Stops early when no candidate has positive benefit.
std::vector<GreedyStep> greedy_plan(const Lattice& lattice, std::uint64_t budget_rows,
                                    bool strict = false, std::size_t max_picks = SIZE_MAX);

/// Fills every lattice row count by aggregating each node from its smallest
/// computed parent, one level-sum layer at a time.
void compute_sizes(SttCube& cube);

/// Converts the budget to rows using the cube's lattice.
std::uint64_t budget_in_rows(const SttCube& cube, const MaterializationConfig& cfg);

SttCube greedy_materialize(const SttCube& cube, std::uint64_t budget_rows,
                           std::optional<std::uint32_t> top_k, bool strict = false);
SttCube apply_strategy(const SttCube& cube, const MaterializationConfig& cfg);
/// Materializes exactly `coords` (plus the base), truncated to `top_k` when set.
SttCube materialize_plan(const SttCube& cube, const std::vector<Coord>& coords,
                         std::optional<std::uint32_t> top_k);

}  // namespace sttcube
