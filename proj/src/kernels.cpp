#include "sttcube/kernels.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sttcube {

std::uint64_t Cuboid::row_count() const noexcept {
  std::uint64_t rows = 0;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    rows += std::max<std::uint64_t>(1, offsets[g + 1] - offsets[g]);
  }
  return rows;
}

std::size_t Cuboid::memory_bytes() const noexcept {
  return keys.size() * (sizeof(GroupKey) + 2 * sizeof(std::uint32_t)) +
         offsets.size() * sizeof(std::uint64_t) + entries.size() * sizeof(Entry);
}

std::pair<std::size_t, std::size_t> Cuboid::spatial_range(MemberId s) const noexcept {
  auto lo = std::lower_bound(keys.begin(), keys.end(), s,
                             [](const GroupKey& k, MemberId v) { return k.spatial < v; });
  auto hi = std::upper_bound(lo, keys.end(), s,
                             [](MemberId v, const GroupKey& k) { return v < k.spatial; });
  return {static_cast<std::size_t>(lo - keys.begin()), static_cast<std::size_t>(hi - keys.begin())};
}

std::optional<std::size_t> Cuboid::find(const GroupKey& key) const noexcept {
  auto it = std::lower_bound(keys.begin(), keys.end(), key);
  if (it == keys.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - keys.begin());
}

void Cuboid::append_group(const GroupKey& key, std::uint32_t fact_count, std::uint32_t boundary,
                          std::span<const Entry> list) {
  keys.push_back(key);
  fact_counts.push_back(fact_count);
  boundaries.push_back(boundary);
  entries.insert(entries.end(), list.begin(), list.end());
  offsets.push_back(entries.size());
}

void rank_entries(std::span<Entry> list, const std::vector<std::uint32_t>& name_rank) {
  std::sort(list.begin(), list.end(), [&](const Entry& a, const Entry& b) {
    if (a.freq != b.freq) return a.freq > b.freq;
    return name_rank[a.keyword] < name_rank[b.keyword];
  });
}

namespace {

MemberId map_or_same(const std::vector<MemberId>* table, MemberId id) {
  return table ? (*table)[id] : id;
}

GroupKey lift_key(const GroupKey& k, const LiftSpec& s) {
  return {map_or_same(s.spatial, k.spatial), map_or_same(s.date, k.date), map_or_same(s.tod, k.tod)};
}

bool wanted(const GroupKey& k, const LiftSpec& s) {
  return !s.only || std::binary_search(s.only->begin(), s.only->end(), k);
}

void check_spec(const Cuboid& source, const LiftSpec& spec) {
  if (source.truncated()) throw std::logic_error("cannot aggregate from a truncated cuboid");
  if (!spec.name_rank) throw std::invalid_argument("aggregation needs name ranks");
  if (spec.name_rank->size() < spec.text_members) {
    throw std::invalid_argument("name ranks do not cover the textual level");
  }
}

// Appends one finished group, truncating when requested.
void emit(Cuboid& out, const GroupKey& key, std::uint32_t fact_count, std::vector<Entry>& list,
          const LiftSpec& spec) {
  rank_entries(list, *spec.name_rank);
  std::uint32_t boundary = 0;
  std::size_t keep = list.size();
  if (spec.top_k && list.size() > *spec.top_k) {
    keep = *spec.top_k;
    boundary = list[keep].freq;
  }
  out.append_group(key, fact_count, boundary, std::span<const Entry>(list.data(), keep));
}

}  // namespace

Cuboid aggregate_serial(const Cuboid& source, const LiftSpec& spec) {
  check_spec(source, spec);
  std::map<GroupKey, std::pair<std::uint64_t, std::map<MemberId, std::uint64_t>>> groups;
  for (std::size_t g = 0; g < source.group_count(); ++g) {
    const GroupKey key = lift_key(source.keys[g], spec);
    if (!wanted(key, spec)) continue;
    auto& [fc, freqs] = groups[key];
    fc += source.fact_counts[g];
    for (const Entry& e : source.group(g)) freqs[map_or_same(spec.text, e.keyword)] += e.freq;
  }
  Cuboid out;
  out.coord = spec.target;
  out.top_k = spec.top_k;
  std::vector<Entry> list;
  for (const auto& [key, cell] : groups) {
    list.clear();
    for (const auto& [kw, f] : cell.second) list.push_back({kw, static_cast<std::uint32_t>(f)});
    emit(out, key, static_cast<std::uint32_t>(cell.first), list, spec);
  }
  return out;
}

Cuboid aggregate_parallel(const Cuboid& source, const LiftSpec& spec) {
  check_spec(source, spec);
  const std::size_t n = source.group_count();
  const auto sn = static_cast<std::int64_t>(n);
  std::vector<GroupKey> target(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < sn; ++i) target[i] = lift_key(source.keys[i], spec);

  std::vector<std::uint32_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (wanted(target[i], spec)) order.push_back(static_cast<std::uint32_t>(i));
  }
  const bool sorted = std::is_sorted(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return target[a] < target[b];
  });
  if (!sorted) {
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      return target[a] < target[b] || (target[a] == target[b] && a < b);
    });
  }

  std::vector<std::size_t> run_start;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || target[order[i]] != target[order[i - 1]]) run_start.push_back(i);
  }
  const std::size_t runs = run_start.size();
  run_start.push_back(order.size());

  int threads = 1;
#ifdef _OPENMP
  threads = std::max(1, omp_get_max_threads());
#endif
  // Chunks of whole runs, balanced by source entry volume.
  std::vector<std::uint64_t> run_weight(runs + 1, 0);
  for (std::size_t r = 0; r < runs; ++r) {
    std::uint64_t w = 0;
    for (std::size_t i = run_start[r]; i < run_start[r + 1]; ++i) {
      const auto g = order[i];
      w += 1 + source.offsets[g + 1] - source.offsets[g];
    }
    run_weight[r + 1] = run_weight[r] + w;
  }
  const auto chunks = static_cast<std::size_t>(std::min<std::size_t>(threads, std::max<std::size_t>(runs, 1)));
  std::vector<std::size_t> chunk_start(chunks + 1, runs);
  chunk_start[0] = 0;
  for (std::size_t c = 1; c < chunks; ++c) {
    const std::uint64_t goal = run_weight[runs] * c / chunks;
    chunk_start[c] = static_cast<std::size_t>(
        std::lower_bound(run_weight.begin(), run_weight.end(), goal) - run_weight.begin());
    chunk_start[c] = std::clamp(chunk_start[c], chunk_start[c - 1], runs);
  }

  std::vector<Cuboid> parts(chunks);
  const std::size_t acc_size = std::max(spec.text_members, std::size_t{1});
#pragma omp parallel for schedule(static, 1)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    Cuboid& part = parts[c];
    std::vector<std::uint64_t> acc(acc_size, 0);
    std::vector<MemberId> touched;
    std::vector<Entry> list;
    for (std::size_t r = chunk_start[c]; r < chunk_start[c + 1]; ++r) {
      std::uint64_t fc = 0;
      touched.clear();
      for (std::size_t i = run_start[r]; i < run_start[r + 1]; ++i) {
        const auto g = order[i];
        fc += source.fact_counts[g];
        for (const Entry& e : source.group(g)) {
          const MemberId kw = map_or_same(spec.text, e.keyword);
          if (acc[kw] == 0) touched.push_back(kw);
          acc[kw] += e.freq;
        }
      }
      list.clear();
      for (MemberId kw : touched) {
        list.push_back({kw, static_cast<std::uint32_t>(acc[kw])});
        acc[kw] = 0;
      }
      emit(part, target[order[run_start[r]]], static_cast<std::uint32_t>(fc), list, spec);
    }
  }

  Cuboid out;
  out.coord = spec.target;
  out.top_k = spec.top_k;
  std::size_t groups = 0, total = 0;
  for (const auto& p : parts) {
    groups += p.group_count();
    total += p.entries.size();
  }
  out.keys.reserve(groups);
  out.fact_counts.reserve(groups);
  out.boundaries.reserve(groups);
  out.offsets.reserve(groups + 1);
  out.entries.reserve(total);
  for (const auto& p : parts) {
    const std::uint64_t base = out.entries.size();
    out.keys.insert(out.keys.end(), p.keys.begin(), p.keys.end());
    out.fact_counts.insert(out.fact_counts.end(), p.fact_counts.begin(), p.fact_counts.end());
    out.boundaries.insert(out.boundaries.end(), p.boundaries.begin(), p.boundaries.end());
    out.entries.insert(out.entries.end(), p.entries.begin(), p.entries.end());
    for (std::size_t g = 1; g < p.offsets.size(); ++g) out.offsets.push_back(base + p.offsets[g]);
  }
  return out;
}

Cuboid merge_add(const Cuboid& a, const Cuboid& b, const std::vector<std::uint32_t>& name_rank) {
  if (a.truncated() || b.truncated()) throw std::logic_error("merge_add needs untruncated cuboids");
  if (a.coord != b.coord) throw std::invalid_argument("merge_add needs equal coordinates");
  Cuboid out;
  out.coord = a.coord;
  std::size_t i = 0, j = 0;
  std::map<MemberId, std::uint64_t> sum;
  std::vector<Entry> list;
  while (i < a.group_count() || j < b.group_count()) {
    if (j == b.group_count() || (i < a.group_count() && a.keys[i] < b.keys[j])) {
      out.append_group(a.keys[i], a.fact_counts[i], 0, a.group(i));
      ++i;
    } else if (i == a.group_count() || b.keys[j] < a.keys[i]) {
      out.append_group(b.keys[j], b.fact_counts[j], 0, b.group(j));
      ++j;
    } else {
      sum.clear();
      for (const Entry& e : a.group(i)) sum[e.keyword] += e.freq;
      for (const Entry& e : b.group(j)) sum[e.keyword] += e.freq;
      list.clear();
      for (const auto& [kw, f] : sum) list.push_back({kw, static_cast<std::uint32_t>(f)});
      rank_entries(list, name_rank);
      out.append_group(a.keys[i], a.fact_counts[i] + b.fact_counts[j], 0, list);
      ++i;
      ++j;
    }
  }
  return out;
}

Cuboid replace_groups(const Cuboid& base, const Cuboid& fresh) {
  Cuboid out;
  out.coord = base.coord;
  out.top_k = base.top_k;
  std::size_t i = 0, j = 0;
  while (i < base.group_count() || j < fresh.group_count()) {
    if (j == fresh.group_count() || (i < base.group_count() && base.keys[i] < fresh.keys[j])) {
      out.append_group(base.keys[i], base.fact_counts[i], base.boundaries[i], base.group(i));
      ++i;
    } else {
      if (i < base.group_count() && base.keys[i] == fresh.keys[j]) ++i;
      out.append_group(fresh.keys[j], fresh.fact_counts[j], fresh.boundaries[j], fresh.group(j));
      ++j;
    }
  }
  return out;
}

Cuboid truncate(const Cuboid& source, std::uint32_t k) {
  if (source.truncated()) throw std::logic_error("cuboid is already truncated");
  Cuboid out;
  out.coord = source.coord;
  out.top_k = k;
  for (std::size_t g = 0; g < source.group_count(); ++g) {
    auto list = source.group(g);
    std::uint32_t boundary = 0;
    if (list.size() > k) {
      boundary = list[k].freq;
      list = list.first(k);
    }
    out.append_group(source.keys[g], source.fact_counts[g], boundary, list);
  }
  return out;
}

}  // namespace sttcube
