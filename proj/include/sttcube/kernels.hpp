#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sttcube/model.hpp"

namespace sttcube {

/// Group key of a cuboid row. Groups are clustered by spatial member.
struct GroupKey {
  MemberId spatial = 0;
  MemberId date = 0;
  MemberId tod = 0;

  friend constexpr auto operator<=>(const GroupKey&, const GroupKey&) = default;
};

struct Entry {
  MemberId keyword = 0;
  std::uint32_t freq = 0;

  friend constexpr bool operator==(const Entry&, const Entry&) = default;
};

/// Flat storage of one cuboid: sorted groups, each with a ranked keyword list.
struct Cuboid {
  Coord coord{};
  std::optional<std::uint32_t> top_k;  // set when lists keep only the top K keywords
  std::vector<GroupKey> keys;
  std::vector<std::uint32_t> fact_counts;
  std::vector<std::uint32_t> boundaries;  // first dropped frequency, 0 when the list is complete
  std::vector<std::uint64_t> offsets{0};
  std::vector<Entry> entries;

  std::size_t group_count() const noexcept { return keys.size(); }
  bool truncated() const noexcept { return top_k.has_value(); }
  /// Storage rows: one per (group, keyword) pair, and one for a group without keywords.
  std::uint64_t row_count() const noexcept;
  std::size_t memory_bytes() const noexcept;

  std::span<const Entry> group(std::size_t g) const noexcept {
    return {entries.data() + offsets[g], entries.data() + offsets[g + 1]};
  }
  /// Half-open group index range whose spatial member equals `s`.
  std::pair<std::size_t, std::size_t> spatial_range(MemberId s) const noexcept;
  std::optional<std::size_t> find(const GroupKey& key) const noexcept;

  void append_group(const GroupKey& key, std::uint32_t fact_count, std::uint32_t boundary,
                    std::span<const Entry> list);

  friend bool operator==(const Cuboid&, const Cuboid&) = default;
};

/// How source members map into the target cuboid. Null tables mean identity.
struct LiftSpec {
  Coord target{};
  const std::vector<MemberId>* date = nullptr;
  const std::vector<MemberId>* spatial = nullptr;
  const std::vector<MemberId>* tod = nullptr;
  const std::vector<MemberId>* text = nullptr;
  std::size_t text_members = 0;                        // target textual level size
  const std::vector<std::uint32_t>* name_rank = nullptr;  // target textual level
  std::optional<std::uint32_t> top_k;
  const std::vector<GroupKey>* only = nullptr;  // sorted target keys to keep, null keeps all
};

/// Orders entries by frequency descending, then by keyword name.
void rank_entries(std::span<Entry> list, const std::vector<std::uint32_t>& name_rank);

/// Reference group-by over ordered maps.
Cuboid aggregate_serial(const Cuboid& source, const LiftSpec& spec);
/// Sort-based group-by with thread-local dense accumulators. Same output as
/// aggregate_serial.
Cuboid aggregate_parallel(const Cuboid& source, const LiftSpec& spec);

/// Sums two untruncated cuboids of the same coordinate.
Cuboid merge_add(const Cuboid& a, const Cuboid& b, const std::vector<std::uint32_t>& name_rank);

/// Copies `base`, replacing or inserting every group present in `fresh`.
Cuboid replace_groups(const Cuboid& base, const Cuboid& fresh);

/// Keeps the top `k` keywords per group and records boundaries.
Cuboid truncate(const Cuboid& source, std::uint32_t k);

}  // namespace sttcube
