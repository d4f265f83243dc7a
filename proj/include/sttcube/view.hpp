#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sttcube/cube.hpp"
#include "sttcube/model.hpp"

namespace sttcube {

/// Boolean condition over cube members. Member leaves name a member of one
/// lattice slot at a level of that slot (textual levels are coordinate
/// indices); time leaves keep groups that start inside a half-open range.
struct Predicate {
  enum class Kind { True, And, Or, Not, Member, Time };

  Kind kind = Kind::True;
  int slot = 0;
  int level = 0;
  MemberId member = kNoMember;
  TimeRange range{};
  std::vector<Predicate> children;

  static Predicate always() { return {}; }
  static Predicate member_of(int slot, int level, MemberId id);
  static Predicate during(TimeRange r);
  static Predicate all_of(std::vector<Predicate> ps);
  static Predicate any_of(std::vector<Predicate> ps);
  static Predicate negate(Predicate p);
};

/// A lazily evaluated slice of the cube at one coordinate, with the filter
/// context that produced it.
class CubeView {
 public:
  explicit CubeView(const SttCube& cube);  // base coordinate, no filters
  CubeView(const SttCube& cube, const Coord& coord);

  const SttCube& cube() const noexcept { return *cube_; }
  const Coord& coord() const noexcept { return coord_; }
  /// Slots removed by slicing.
  const std::array<bool, kDims>& removed() const noexcept { return removed_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Exact cells of the view.
  const Cuboid& cells() const;
  MeasureCell cell(std::size_t group) const { return cube_->cell(cells(), group); }
  std::uint64_t fact_count() const;

  /// Finest coordinate at which every predicate can be evaluated.
  Coord filter_coord() const;

  friend CubeView stt_slice(const CubeView& v, int slot, int level, std::string_view member);
  friend CubeView stt_dice(const CubeView& v, const Predicate& cond,
                           std::optional<std::uint64_t> min_fact_count);
  friend CubeView stt_rollup(const CubeView& v, int slot, int level);
  friend CubeView stt_drilldown(const CubeView& v, int slot, int level);

 private:
  void invalidate() { cached_.reset(); }

  const SttCube* cube_;
  Coord coord_{};
  std::array<bool, kDims> removed_{};
  std::vector<Predicate> filters_;
  std::optional<std::uint64_t> min_facts_;
  bool empty_ = false;
  std::vector<std::string> warnings_;
  mutable std::shared_ptr<const Cuboid> cached_;
};

/// Keeps one member of `slot` at `level` and removes the slot. An unknown
/// member yields an empty view with a warning.
CubeView stt_slice(const CubeView& v, int slot, int level, std::string_view member);
/// Keeps (group, keyword) cells satisfying `cond`, then groups whose fact
/// count reaches `min_fact_count`.
CubeView stt_dice(const CubeView& v, const Predicate& cond,
                  std::optional<std::uint64_t> min_fact_count = std::nullopt);
/// Coarsens `slot` to `level`, composing hierarchy steps as needed.
CubeView stt_rollup(const CubeView& v, int slot, int level);
/// Refines `slot` to `level`, recomputed from the smallest exact ancestor.
CubeView stt_drilldown(const CubeView& v, int slot, int level);

}  // namespace sttcube
