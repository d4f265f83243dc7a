#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sttcube/ingest.hpp"
#include "sttcube/model.hpp"

namespace sttcube {

/// Hypernym links per textual level; absent keys are their own parent.
class TextTaxonomy {
 public:
  /// Registers `child -> parent`, where `parent_level` is kTheme, kTopic or kConcept.
  void add(std::string child, std::string parent, int parent_level);

  /// TSV rows `child<TAB>parent<TAB>{theme|topic|concept}`.
  static TextTaxonomy load(const std::filesystem::path& path);
  static TextTaxonomy from_stream(std::istream& in);

  /// Key of `key` (a member of `from_level`) one level up.
  std::string parent(std::string_view key, int from_level) const;
  /// Ancestor of a term at an absolute textual level below All.
  std::string ancestor(std::string_view term, int level) const;
  std::size_t size() const noexcept;
  /// Every link as (child, parent, parent level), sorted.
  std::vector<std::tuple<std::string, std::string, int>> links() const;

 private:
  std::unordered_map<std::string, std::string> up_[3];  // term->theme, theme->topic, topic->concept
};

class ImportanceScores {
 public:
  void set(std::string member, double score) { scores_[std::move(member)] = score; }
  double get(std::string_view member) const;
  /// TSV rows `member_id<TAB>score`.
  static ImportanceScores load(const std::filesystem::path& path);
  static ImportanceScores from_stream(std::istream& in);
  bool empty() const noexcept { return scores_.empty(); }
  /// Sorted by member.
  std::vector<std::pair<std::string, double>> entries() const;

 private:
  std::unordered_map<std::string, double> scores_;
};

struct TemporalMembers {
  std::string day, month, quarter, year;
  std::string second, minute, hour;
};

TemporalMembers build_temporal(Instant t);

/// City, region, country and All for a city id or kUnknownMember.
std::vector<std::string> spatial_parents(std::string_view city, const GeoTaxonomy& geo);

/// Sorted, deduplicated ancestors of every term at `level`.
std::vector<std::string> textual_parents_replication(const std::vector<std::string>& terms,
                                                     const TextTaxonomy& tax, int level);

/// Theme with the most supporting terms (ties to the smaller key), lifted
/// to `level`. Throws std::invalid_argument for an empty term list.
std::string textual_parent_majority(const std::vector<std::string>& terms,
                                    const TextTaxonomy& tax, int level);

/// Theme with the highest importance (absent scores count as 0, ties to the
/// smaller key), lifted to `level`.
std::string textual_parent_custom(const std::vector<std::string>& terms, const TextTaxonomy& tax,
                                  const ImportanceScores& scores, int level);

/// Members of one hierarchy, level by level, with child -> parent links.
/// Ids are dense and assigned in insertion order. The top level holds the
/// single member "ALL".
class Dimension {
 public:
  Dimension() = default;
  Dimension(std::string name, std::vector<std::string> level_names);

  const std::string& name() const noexcept { return name_; }
  int level_count() const noexcept { return static_cast<int>(levels_.size()); }
  const std::string& level_name(int level) const { return levels_.at(level).name; }
  std::size_t size(int level) const { return levels_.at(level).keys.size(); }

  MemberId find(int level, std::string_view key) const;
  const std::string& key(int level, MemberId id) const { return levels_[level].keys[id]; }
  MemberId parent(int level, MemberId id) const { return levels_[level].parents[id]; }
  double area(int level, MemberId id) const { return levels_[level].areas[id]; }
  std::int64_t lo(int level, MemberId id) const { return levels_[level].lo[id]; }
  std::int64_t hi(int level, MemberId id) const { return levels_[level].hi[id]; }

  /// Returns the existing id when `key` is already present.
  MemberId add(int level, std::string_view key, MemberId parent, double area = 0.0,
               std::int64_t lo = 0, std::int64_t hi = 0);
  void set_area(int level, MemberId id, double area) { levels_[level].areas[id] = area; }
  void set_range(int level, MemberId id, std::int64_t lo, std::int64_t hi) {
    levels_[level].lo[id] = lo;
    levels_[level].hi[id] = hi;
  }

  MemberId lift(int from, int to, MemberId id) const;

  /// Rebuilds lift tables and name ranks after members were added.
  void refresh();
  /// Ancestor of every member of `from` at `to` (valid after refresh()).
  const std::vector<MemberId>& lift_table(int from, int to) const;
  /// Position of each member in the lexicographic order of keys.
  const std::vector<std::uint32_t>& name_rank(int level) const { return ranks_.at(level); }

  friend bool operator==(const Dimension& a, const Dimension& b);

 private:
  struct Level {
    std::string name;
    std::vector<std::string> keys;
    std::vector<MemberId> parents;
    std::vector<double> areas;
    std::vector<std::int64_t> lo, hi;
    std::unordered_map<std::string, MemberId> index;
  };
  std::string name_;
  std::vector<Level> levels_;
  std::vector<std::vector<std::vector<MemberId>>> lifts_;
  std::vector<std::vector<std::uint32_t>> ranks_;
};

}  // namespace sttcube
