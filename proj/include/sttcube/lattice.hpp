#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sttcube/model.hpp"

namespace sttcube {

inline constexpr std::uint64_t kUnknownRows = std::numeric_limits<std::uint64_t>::max();

/// Every combination of hierarchy levels, ordered lexicographically by
/// coordinate. Lower level indices are finer, so an ancestor has every
/// coordinate component <= its descendant's.
class Lattice {
 public:
  Lattice() = default;
  /// Unused slots take a level count of 1. `level_names[d][l]` names level l of slot d.
  explicit Lattice(std::array<int, kDims> level_counts,
                   std::vector<std::vector<std::string>> level_names = {});
  static Lattice enumerate(const CubeSchema& schema);

  std::size_t size() const noexcept { return coords_.size(); }
  const std::array<int, kDims>& level_counts() const noexcept { return counts_; }
  const Coord& coord(std::size_t i) const { return coords_.at(i); }
  std::optional<std::size_t> index_of(const Coord& c) const noexcept;
  std::size_t index(const Coord& c) const;
  std::string name(std::size_t i) const;
  std::size_t base() const noexcept { return 0; }

  /// Finer -> coarser pairs that differ by one step in exactly one slot.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
  static bool dominates(const Coord& ancestor, const Coord& descendant) noexcept;
  /// Reflexive.
  std::vector<std::size_t> descendants(std::size_t i) const;
  std::vector<std::size_t> ancestors(std::size_t i) const;

  std::uint64_t rows(std::size_t i) const { return rows_.at(i); }
  void set_rows(std::size_t i, std::uint64_t rows) { rows_.at(i) = rows; }
  bool materialized(std::size_t i) const { return materialized_.at(i) != 0; }
  void set_materialized(std::size_t i, bool on) { materialized_.at(i) = on ? 1 : 0; }
  std::vector<std::size_t> materialized_nodes() const;
  std::uint64_t materialized_rows() const;
  bool all_rows_known() const noexcept;
  void forget_unmaterialized_rows();

  /// Row count of the smallest materialized ancestor (kUnknownRows if none).
  std::uint64_t cost(std::size_t i) const;
  /// Sum over the node and its descendants of max(0, cost - rows(i)).
  std::uint64_t benefit(std::size_t i) const;
  std::vector<std::uint64_t> costs() const;
  std::vector<std::uint64_t> benefits() const;

  /// TSV `coord<TAB>row_count<TAB>materialized` with a header line.
  void dump(std::ostream& out) const;
  /// Reads a dump produced for the same shape. Throws std::runtime_error.
  void restore(std::istream& in);

 private:
  std::array<int, kDims> counts_{1, 1, 1, 1};
  std::vector<std::vector<std::string>> names_;
  std::vector<Coord> coords_;
  std::vector<std::uint64_t> rows_;
  std::vector<std::uint8_t> materialized_;
};

}  // namespace sttcube
