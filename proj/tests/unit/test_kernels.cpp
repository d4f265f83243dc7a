#include <doctest.h>

#include <map>
#include <random>

#include "sttcube/kernels.hpp"

using namespace sttcube;

namespace {

struct Fixture {
  Cuboid source;
  std::vector<MemberId> spatial_up, text_up;
  std::vector<std::uint32_t> rank_base, rank_up;
};

Fixture random_fixture(std::uint64_t seed, std::size_t groups) {
  std::mt19937_64 rng(seed);
  Fixture f;
  const MemberId spatial = 40, words = 60;
  for (MemberId s = 0; s < spatial; ++s) f.spatial_up.push_back(s % 7);
  for (MemberId w = 0; w < words; ++w) f.text_up.push_back(w / 4);
  for (MemberId w = 0; w < words; ++w) f.rank_base.push_back((w * 37) % words);
  for (MemberId w = 0; w < words / 4; ++w) f.rank_up.push_back(words / 4 - 1 - w);

  std::map<GroupKey, std::map<MemberId, std::uint32_t>> cells;
  for (std::size_t i = 0; i < groups; ++i) {
    GroupKey k{static_cast<MemberId>(rng() % spatial), static_cast<MemberId>(rng() % 5),
               static_cast<MemberId>(rng() % 24)};
    auto& c = cells[k];
    for (int n = static_cast<int>(rng() % 6); n > 0; --n) c[static_cast<MemberId>(rng() % words)] += 1 + rng() % 3;
  }
  for (auto& [k, c] : cells) {
    std::vector<Entry> list;
    for (auto [w, n] : c) list.push_back({w, n});
    rank_entries(list, f.rank_base);
    f.source.append_group(k, 1 + static_cast<std::uint32_t>(rng() % 4), 0, list);
  }
  return f;
}

std::uint64_t total_freq(const Cuboid& c) {
  std::uint64_t t = 0;
  for (const auto& e : c.entries) t += e.freq;
  return t;
}

}  // namespace

TEST_CASE("serial and parallel aggregation agree") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Fixture f = random_fixture(seed, 3000);
    LiftSpec spec;
    spec.target = Coord{0, 1, 1, 0};
    spec.spatial = &f.spatial_up;
    spec.text = &f.text_up;
    spec.text_members = f.rank_up.size();
    spec.name_rank = &f.rank_up;
    const Cuboid a = aggregate_serial(f.source, spec);
    const Cuboid b = aggregate_parallel(f.source, spec);
    CHECK(a == b);
    CHECK(total_freq(a) == total_freq(f.source));
    CHECK(std::is_sorted(a.keys.begin(), a.keys.end()));
    spec.top_k = 2;
    CHECK(aggregate_serial(f.source, spec) == aggregate_parallel(f.source, spec));
  }
}

TEST_CASE("fact counts add up under roll-up") {
  Fixture f = random_fixture(9, 500);
  LiftSpec spec;
  spec.spatial = &f.spatial_up;
  spec.text_members = f.rank_base.size();
  spec.name_rank = &f.rank_base;
  const Cuboid a = aggregate_parallel(f.source, spec);
  std::uint64_t before = 0, after = 0;
  for (auto n : f.source.fact_counts) before += n;
  for (auto n : a.fact_counts) after += n;
  CHECK(before == after);
  CHECK(a.group_count() <= f.source.group_count());
}

TEST_CASE("truncation records the first dropped frequency") {
  Cuboid c;
  std::vector<Entry> list{{3, 9}, {1, 7}, {2, 7}, {0, 1}};
  c.append_group({0, 0, 0}, 4, 0, list);
  c.append_group({1, 0, 0}, 1, 0, std::vector<Entry>{{5, 2}});
  const Cuboid t = truncate(c, 2);
  REQUIRE(t.truncated());
  CHECK(*t.top_k == 2);
  CHECK(t.group(0).size() == 2);
  CHECK(t.boundaries[0] == 7);
  CHECK(t.boundaries[1] == 0);
  CHECK(t.row_count() == 3);
  CHECK(c.row_count() == 5);
}

TEST_CASE("groups without keywords still count as a row") {
  Cuboid c;
  c.append_group({0, 0, 0}, 2, 0, std::vector<Entry>{});
  CHECK(c.row_count() == 1);
  CHECK(c.group(0).empty());
}

TEST_CASE("merge_add sums matching groups") {
  std::vector<std::uint32_t> rank{0, 1, 2};
  Cuboid a, b;
  a.append_group({0, 0, 0}, 1, 0, std::vector<Entry>{{0, 2}});
  a.append_group({2, 0, 0}, 1, 0, std::vector<Entry>{{1, 1}});
  b.append_group({0, 0, 0}, 2, 0, std::vector<Entry>{{1, 3}, {0, 1}});
  b.append_group({1, 0, 0}, 1, 0, std::vector<Entry>{{2, 1}});
  const Cuboid m = merge_add(a, b, rank);
  REQUIRE(m.group_count() == 3);
  CHECK(m.fact_counts[0] == 3);
  REQUIRE(m.group(0).size() == 2);
  CHECK(m.group(0)[0] == Entry{0, 3});
  CHECK(m.group(0)[1] == Entry{1, 3});
  CHECK(m.keys[1].spatial == 1);
}

TEST_CASE("replace_groups overwrites and inserts") {
  Cuboid base, fresh;
  base.append_group({0, 0, 0}, 1, 0, std::vector<Entry>{{0, 1}});
  base.append_group({2, 0, 0}, 1, 0, std::vector<Entry>{{0, 1}});
  fresh.append_group({1, 0, 0}, 5, 0, std::vector<Entry>{{1, 5}});
  fresh.append_group({2, 0, 0}, 2, 0, std::vector<Entry>{{0, 2}});
  const Cuboid r = replace_groups(base, fresh);
  REQUIRE(r.group_count() == 3);
  CHECK(r.fact_counts[1] == 5);
  CHECK(r.fact_counts[2] == 2);
}

TEST_CASE("spatial ranges and lookups") {
  Fixture f = random_fixture(4, 400);
  const auto& c = f.source;
  const auto [lo, hi] = c.spatial_range(3);
  for (std::size_t g = lo; g < hi; ++g) CHECK(c.keys[g].spatial == 3);
  if (c.group_count()) {
    CHECK(c.find(c.keys[0]) == std::optional<std::size_t>(0));
  }
  CHECK_FALSE(c.find(GroupKey{999, 0, 0}).has_value());
}

TEST_CASE("ranking ties follow name order") {
  std::vector<Entry> list{{0, 2}, {1, 5}, {2, 2}};
  std::vector<std::uint32_t> rank{2, 0, 1};
  rank_entries(list, rank);
  CHECK(list[0].keyword == 1);
  CHECK(list[1].keyword == 2);
  CHECK(list[2].keyword == 0);
}
