#include "sttcube/query.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <unordered_map>

namespace sttcube {

double keyword_density(std::uint64_t freq, double area) {
  if (!(area > 0.0)) throw std::invalid_argument("surface area must be positive");
  return static_cast<double>(freq) / area;
}

double keyword_volatility(const std::vector<std::uint64_t>& freqs, double area) {
  if (freqs.empty()) return 0.0;
  if (!(area > 0.0)) throw std::invalid_argument("surface area must be positive");
  double total = 0.0, prev = 0.0;
  for (auto f : freqs) {
    const double rho = static_cast<double>(f) / area;
    total += std::abs(rho - prev);
    prev = rho;
  }
  return total / static_cast<double>(freqs.size());
}

namespace {

std::uint64_t absdiff(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

struct Ranked {
  std::vector<MemberId> ids;
  std::vector<std::uint64_t> freq, change;
  std::uint64_t epsilon = 0;
  std::size_t delta = 0, cutoff = 0, bounded = 0;
  std::vector<std::pair<MemberId, std::uint64_t>> seen;  // id order
};

/// Per-keyword, per-interval frequency sums with the bounds needed to
/// certify a ranking prefix when some lists are truncated.
class Accumulator {
 public:
  explicit Accumulator(int intervals) : x_(static_cast<std::size_t>(intervals)), unseen_(x_, 0) {}

  void add(MemberId kw, int z, std::uint64_t f) { lo_[slot(kw) * x_ + z] += f; }

  void add_list(std::span<const Entry> list, int z, std::uint64_t boundary, std::size_t k) {
    for (const Entry& e : list) {
      const std::size_t s = slot(e.keyword) * x_ + z;
      lo_[s] += e.freq;
      seen_bound_[s] += boundary;
    }
    unseen_[z] += boundary;
    epsilon_ += list.size() > k ? list[k].freq : boundary;
  }

  Ranked finish(std::optional<std::size_t> k, MergeScore score,
                const std::vector<std::uint32_t>& name_rank, const std::vector<char>* filter) const {
    const std::size_t n = ids_.size();
    std::vector<std::uint64_t> num(n), lo_num(n), hi_num(n), freq(n), change(n);
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
      std::uint64_t f = 0, c = 0, prev = 0;
      std::uint64_t f_hi = 0, c_lo = 0, c_hi = 0, prev_lo = 0, prev_hi = 0;
      for (std::size_t z = 0; z < x_; ++z) {
        const std::uint64_t lo = lo_[s * x_ + z];
        const std::uint64_t hi = lo + unseen_[z] - seen_bound_[s * x_ + z];
        f += lo;
        c += absdiff(lo, prev);
        prev = lo;
        f_hi += hi;
        std::uint64_t gap_lo = 0;
        if (lo > prev_hi) gap_lo = lo - prev_hi;
        if (prev_lo > hi) gap_lo = prev_lo - hi;
        c_lo += gap_lo;
        c_hi += std::max(hi - std::min(hi, prev_lo), prev_hi - std::min(prev_hi, lo));
        prev_lo = lo;
        prev_hi = hi;
      }
      freq[s] = f;
      change[s] = c;
      if (score == MergeScore::Volatility) {
        num[s] = c;
        lo_num[s] = c_lo;
        hi_num[s] = c_hi;
      } else {
        num[s] = f;
        lo_num[s] = f;
        hi_num[s] = f_hi;
      }
      if (!filter || (ids_[s] < filter->size() && (*filter)[ids_[s]])) order.push_back(s);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (num[a] != num[b]) return num[a] > num[b];
      return name_rank[ids_[a]] < name_rank[ids_[b]];
    });

    std::uint64_t unseen_hi = 0, prev_unseen = 0;
    for (std::size_t z = 0; z < x_; ++z) {
      unseen_hi += score == MergeScore::Volatility ? std::max(unseen_[z], prev_unseen) : unseen_[z];
      prev_unseen = unseen_[z];
    }

    Ranked out;
    const std::size_t m = k ? std::min(*k, order.size()) : order.size();
    // Suffix maxima of the upper bounds, with the smallest name among the maxima.
    std::vector<std::uint64_t> suf_hi(order.size() + 1, 0);
    std::vector<std::uint32_t> suf_name(order.size() + 1, std::numeric_limits<std::uint32_t>::max());
    for (std::size_t i = order.size(); i-- > 0;) {
      const std::size_t s = order[i];
      const std::uint32_t r = name_rank[ids_[s]];
      if (hi_num[s] > suf_hi[i + 1]) {
        suf_hi[i] = hi_num[s];
        suf_name[i] = r;
      } else {
        suf_hi[i] = suf_hi[i + 1];
        suf_name[i] = hi_num[s] == suf_hi[i + 1] ? std::min(r, suf_name[i + 1]) : suf_name[i + 1];
      }
    }
    bool proven = true;
    bool reaches = true;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t s = order[i];
      out.ids.push_back(ids_[s]);
      out.freq.push_back(freq[s]);
      out.change.push_back(change[s]);
      const std::uint64_t rival = suf_hi[i + 1];
      const bool beats_seen = i + 1 == order.size() || lo_num[s] > rival ||
                              (lo_num[s] == rival && name_rank[ids_[s]] < suf_name[i + 1]);
      const bool beats_unseen = unseen_hi == 0 || lo_num[s] > unseen_hi;
      proven = proven && beats_seen && beats_unseen;
      if (proven) ++out.bounded;
      reaches = reaches && freq[s] >= epsilon_;
      if (reaches) ++out.cutoff;
    }
    out.epsilon = epsilon_;
    out.delta = std::min(out.bounded, out.cutoff);
    for (std::size_t s = 0; s < n; ++s) out.seen.emplace_back(ids_[s], freq[s]);
    return out;
  }

 private:
  std::size_t slot(MemberId kw) {
    auto [it, inserted] = index_.try_emplace(kw, ids_.size());
    if (inserted) {
      ids_.push_back(kw);
      lo_.resize(lo_.size() + x_, 0);
      seen_bound_.resize(seen_bound_.size() + x_, 0);
    }
    return it->second;
  }

  std::size_t x_;
  std::vector<std::uint64_t> unseen_;
  std::unordered_map<MemberId, std::size_t> index_;
  std::vector<MemberId> ids_;
  std::vector<std::uint64_t> lo_, seen_bound_;
  std::uint64_t epsilon_ = 0;
};

double score_of(MergeScore score, std::uint64_t freq, std::uint64_t change, double area, int x) {
  switch (score) {
    case MergeScore::Frequency: return static_cast<double>(freq);
    case MergeScore::Density: return static_cast<double>(freq) / area;
    case MergeScore::Volatility: return static_cast<double>(change) / (area * x);
  }
  return 0.0;
}

struct Dictionary {
  std::vector<std::string> names;
  std::vector<std::uint32_t> rank;
  std::map<std::string, MemberId> ids;
};

Dictionary dictionary_of(const std::vector<RankedList>& lists) {
  Dictionary d;
  for (const auto& l : lists) {
    for (const auto& [kw, f] : l.entries) d.ids.emplace(kw, 0);
  }
  for (auto& [kw, id] : d.ids) {
    id = static_cast<MemberId>(d.names.size());
    d.rank.push_back(id);
    d.names.push_back(kw);
  }
  return d;
}

std::pair<std::vector<std::string>, double> merged_area(const std::vector<RankedList>& lists) {
  std::map<std::string, double> areas;
  for (const auto& l : lists) areas.emplace(l.member, l.area);
  std::vector<std::string> members;
  double total = 0.0;
  for (const auto& [m, a] : areas) {
    members.push_back(m);
    total += a;
  }
  return {members, total};
}

void check_lists(const std::vector<RankedList>& lists, int intervals) {
  if (intervals < 1) throw std::invalid_argument("at least one interval is required");
  for (const auto& l : lists) {
    if (l.interval < 0 || l.interval >= intervals) throw std::invalid_argument("list interval out of range");
    if (!(l.area > 0.0)) throw std::invalid_argument("surface area must be positive");
  }
}

}  // namespace

ApproxTopK topk_merge(const std::vector<RankedList>& lists, int intervals, std::size_t k,
                      MergeScore score) {
  check_lists(lists, intervals);
  if (k == 0) throw std::invalid_argument("k must be positive");
  const Dictionary dict = dictionary_of(lists);
  Accumulator acc(intervals);
  std::vector<Entry> buf;
  for (const auto& l : lists) {
    buf.clear();
    for (const auto& [kw, f] : l.entries) buf.push_back({dict.ids.at(kw), static_cast<std::uint32_t>(f)});
    acc.add_list(buf, l.interval, l.boundary, k);
  }
  const Ranked r = acc.finish(k, score, dict.rank, nullptr);
  ApproxTopK out;
  std::tie(out.members, out.area) = merged_area(lists);
  out.intervals = intervals;
  out.epsilon = r.epsilon;
  out.delta = r.delta;
  out.frequency_cutoff_positions = r.cutoff;
  out.bounded_positions = r.bounded;
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    out.ranking.push_back({dict.names[r.ids[i]],
                           score_of(score, r.freq[i], r.change[i], out.area, intervals), r.freq[i],
                           r.change[i], i < r.delta});
  }
  for (const auto& [id, f] : r.seen) out.merged_frequencies.emplace_back(dict.names[id], f);
  std::sort(out.merged_frequencies.begin(), out.merged_frequencies.end());
  return out;
}

std::vector<RankedKeyword> exact_ranking(const std::vector<RankedList>& lists, int intervals,
                                         std::optional<std::size_t> k, MergeScore score) {
  check_lists(lists, intervals);
  const Dictionary dict = dictionary_of(lists);
  Accumulator acc(intervals);
  for (const auto& l : lists) {
    for (const auto& [kw, f] : l.entries) acc.add(dict.ids.at(kw), l.interval, f);
  }
  const double area = merged_area(lists).second;
  const Ranked r = acc.finish(k, score, dict.rank, nullptr);
  std::vector<RankedKeyword> out;
  for (std::size_t i = 0; i < r.ids.size(); ++i) {
    out.push_back({dict.names[r.ids[i]], score_of(score, r.freq[i], r.change[i], area, intervals),
                   r.freq[i], r.change[i], true});
  }
  return out;
}

std::uint64_t QueryResult::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  const auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const auto mix_u = [&](std::uint64_t v) { mix(&v, sizeof v); };
  const auto mix_s = [&](const std::string& s) {
    mix_u(s.size());
    mix(s.data(), s.size());
  };
  mix_u(groups.size());
  for (const auto& g : groups) {
    mix_s(g.member);
    mix_u(static_cast<std::uint64_t>(g.interval));
    mix_u(g.fact_count);
    std::uint64_t area_bits = 0;
    std::memcpy(&area_bits, &g.area, sizeof area_bits);
    mix_u(area_bits);
    mix_u(g.ranking.size());
    for (const auto& r : g.ranking) {
      mix_s(r.keyword);
      mix_u(r.freq);
      mix_u(r.change);
    }
  }
  return h;
}

namespace {

bool volatile_measure(Measure m) { return m == Measure::Volatility || m == Measure::TopKVolatile; }

std::optional<MergeScore> merge_score(Measure m) {
  switch (m) {
    case Measure::FactCount: return std::nullopt;
    case Measure::KeywordFrequency:
    case Measure::TopKFrequent: return MergeScore::Frequency;
    case Measure::Density:
    case Measure::TopKDense: return MergeScore::Density;
    case Measure::Volatility:
    case Measure::TopKVolatile: return MergeScore::Volatility;
  }
  return std::nullopt;
}

int spatial_levels(const SttCube& cube, SpatialScheme s) { return cube.data().spatial(s).level_count(); }

/// Coarsest time-of-day level whose members never straddle an interval boundary.
int tod_level_for(const TimeRange& r, std::int64_t len) {
  const auto aligned = [&](std::int64_t unit) {
    return floor_div(r.from.seconds, unit) * unit == r.from.seconds && len % unit == 0;
  };
  if (aligned(kSecondsPerDay)) return kTodAll;
  if (aligned(3600)) return kHour;
  if (aligned(60)) return kMinute;
  return kSecond;
}

}  // namespace

void check_query(const SttCube& cube, const QuerySpec& q) {
  const int top = spatial_levels(cube, q.spatial_scheme) - 1;
  if (q.spatial_level < 0 || q.spatial_level > top) throw std::invalid_argument("spatial level out of range");
  if (q.group_by_spatial_level &&
      (*q.group_by_spatial_level < 0 || *q.group_by_spatial_level > q.spatial_level)) {
    throw std::invalid_argument("group-by level must be at or below the selection level");
  }
  if (q.textual_level < text_base_level(q.textual_scheme) || q.textual_level > kTextAll) {
    throw std::invalid_argument("textual level not available under the textual scheme");
  }
  if (q.intervals < 1) throw std::invalid_argument("at least one interval is required");
  if (q.k && *q.k == 0) throw std::invalid_argument("k must be positive");
  if (volatile_measure(q.measure) && !q.range) throw std::invalid_argument("volatility needs a time range");
  if (volatile_measure(q.measure) && q.group_by_time) {
    throw std::invalid_argument("volatility already spans the intervals");
  }
  if (q.range) {
    const std::int64_t span = q.range->to.seconds - q.range->from.seconds;
    if (span <= 0) throw std::invalid_argument("empty time range");
    if (span % q.intervals != 0) throw std::invalid_argument("time range is not divisible into equal intervals");
  }
  if ((q.intervals > 1 || q.group_by_time) && !q.range) {
    throw std::invalid_argument("intervals need a time range");
  }
}

QueryPlan rewrite(const SttCube& cube, const QuerySpec& q) {
  check_query(cube, q);
  QueryPlan plan;
  const int date_all = kDateAll, tod_all = kTodAll;
  plan.target[kDateDim] = static_cast<std::uint8_t>(q.range || volatile_measure(q.measure) ? kDay : date_all);
  plan.target[kTodDim] = static_cast<std::uint8_t>(tod_all);
  if (q.range) {
    plan.interval_seconds = (q.range->to.seconds - q.range->from.seconds) / q.intervals;
    plan.target[kTodDim] = static_cast<std::uint8_t>(tod_level_for(*q.range, plan.interval_seconds));
  }
  plan.target[kSpatialDim] = static_cast<std::uint8_t>(q.group_by_spatial_level.value_or(q.spatial_level));
  plan.target[kTextDim] = static_cast<std::uint8_t>(q.textual_level - text_base_level(q.textual_scheme));

  const auto& cfg = cube.config();
  if (q.spatial_scheme != cfg.spatial_scheme || q.textual_scheme != cfg.textual_scheme) {
    plan.fact_scan = true;
    plan.source = Coord{};
    plan.source_rows = cube.fact_count();
    return plan;
  }

  const Cuboid* best = nullptr;
  for (const auto& [coord, c] : cube.cuboids()) {
    if (!Lattice::dominates(coord, plan.target)) continue;
    if (c->truncated()) {
      const bool usable = is_topk(q.measure) && q.k && *q.k < *c->top_k &&
                          coord[kTextDim] == plan.target[kTextDim];
      if (!usable) continue;
    }
    if (!best) {
      best = c.get();
      continue;
    }
    const std::uint64_t r = cube.cuboid_rows(coord), br = cube.cuboid_rows(best->coord);
    if (r < br || (r == br && best->truncated() && !c->truncated())) best = c.get();
  }
  if (!best) throw std::logic_error("no materialized ancestor");
  plan.source = best->coord;
  plan.source_rows = cube.cuboid_rows(best->coord);
  plan.approximate = best->truncated();
  plan.spatial_seek = plan.source[kSpatialDim] == q.spatial_level && !q.members.empty();
  return plan;
}

QueryResult evaluate(const SttCube& cube, const QuerySpec& q) { return evaluate(cube, q, rewrite(cube, q)); }

QueryResult evaluate(const SttCube& cube, const QuerySpec& q, const QueryPlan& plan) {
  const CubeData& data = cube.data();
  QueryResult result;
  result.plan = plan;

  Cuboid scanned;
  const Cuboid* source = nullptr;
  if (plan.fact_scan) {
    const Cuboid groups = fact_groups(data, 0, data.facts.size(), q.spatial_scheme, q.textual_scheme);
    scanned = aggregate_parallel(
        groups, make_lift_spec(data, q.spatial_scheme, q.textual_scheme, Coord{}, plan.target));
    source = &scanned;
  } else {
    source = cube.cuboid(plan.source);
    if (!source) throw std::logic_error("plan source is not materialized");
  }
  const Coord& src = source->coord;

  const Dimension& space = data.spatial(q.spatial_scheme);
  const int shift = text_base_level(q.textual_scheme);
  const int text_level = plan.target[kTextDim] + shift;
  const int out_level = plan.target[kSpatialDim];

  // Selected members at the selection level.
  std::vector<char> selected(space.size(q.spatial_level), q.members.empty() ? 1 : 0);
  std::vector<MemberId> picked;
  for (const auto& name : q.members) {
    const MemberId id = space.find(q.spatial_level, name);
    if (id == kNoMember) {
      result.warnings.push_back("unknown member '" + name + "'");
      continue;
    }
    selected[id] = 1;
    picked.push_back(id);
  }
  std::sort(picked.begin(), picked.end());
  picked.erase(std::unique(picked.begin(), picked.end()), picked.end());

  std::vector<char> keyword_filter;
  if (!q.keywords.empty()) {
    keyword_filter.assign(data.text.size(text_level), 0);
    for (const auto& kw : q.keywords) {
      const MemberId id = data.text.find(text_level, kw);
      if (id != kNoMember) keyword_filter[id] = 1;
    }
  }
  const std::vector<char>* filter = q.keywords.empty() ? nullptr : &keyword_filter;

  const std::vector<MemberId>* to_select =
      src[kSpatialDim] == q.spatial_level ? nullptr : &space.lift_table(src[kSpatialDim], q.spatial_level);
  const std::vector<MemberId>* to_output =
      src[kSpatialDim] == out_level ? nullptr : &space.lift_table(src[kSpatialDim], out_level);
  const std::vector<MemberId>* text_lift =
      src[kTextDim] == plan.target[kTextDim] ? nullptr
                                             : &data.text.lift_table(src[kTextDim] + shift, text_level);

  const bool split_time = volatile_measure(q.measure);
  const int x = split_time ? q.intervals : 1;
  const std::optional<std::size_t> k = is_topk(q.measure) ? q.k : std::nullopt;
  const std::size_t approx_k = q.k.value_or(0);

  // A lone source group already holds the ranked list of its output.
  const bool direct = !plan.approximate && !text_lift && !filter && x == 1;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  struct Out {
    MemberId member;
    int interval;
    std::uint64_t facts = 0;
    Accumulator acc;
    std::size_t groups = 0;
    std::size_t lone = kNone;
  };
  std::vector<Out> outs;
  std::unordered_map<std::uint64_t, std::size_t> out_index;

  const auto visit = [&](std::size_t g) {
    const GroupKey& key = source->keys[g];
    const MemberId sel = to_select ? (*to_select)[key.spatial] : key.spatial;
    if (!selected[sel]) return;
    int z = 0;
    if (q.range) {
      std::int64_t start = data.date.lo(src[kDateDim], key.date) * kSecondsPerDay;
      if (src[kTodDim] != kTodAll) start += data.tod.lo(src[kTodDim], key.tod);
      if (start < q.range->from.seconds || start >= q.range->to.seconds) return;
      z = static_cast<int>((start - q.range->from.seconds) / plan.interval_seconds);
    }
    const MemberId member = to_output ? (*to_output)[key.spatial] : key.spatial;
    const int out_interval = q.group_by_time ? z : -1;
    const std::uint64_t okey = (static_cast<std::uint64_t>(member) << 32) |
                               static_cast<std::uint32_t>(out_interval);
    auto [it, inserted] = out_index.try_emplace(okey, outs.size());
    if (inserted) outs.push_back({member, out_interval, 0, Accumulator(x)});
    Out& o = outs[it->second];
    o.facts += source->fact_counts[g];
    const int slot = split_time ? z : 0;
    const auto add_exact = [&](std::size_t h) {
      for (const Entry& e : source->group(h)) {
        o.acc.add(text_lift ? (*text_lift)[e.keyword] : e.keyword, slot, e.freq);
      }
    };
    ++o.groups;
    if (plan.approximate) {
      o.acc.add_list(source->group(g), slot, source->boundaries[g], approx_k);
    } else if (direct && o.groups == 1) {
      o.lone = g;
    } else {
      if (o.lone != kNone) {
        add_exact(o.lone);
        o.lone = kNone;
      }
      add_exact(g);
    }
  };

  if (plan.spatial_seek && to_select == nullptr) {
    for (MemberId m : picked) {
      const auto [b, e] = source->spatial_range(m);
      for (std::size_t g = b; g < e; ++g) visit(g);
    }
  } else {
    for (std::size_t g = 0; g < source->group_count(); ++g) visit(g);
  }

  const auto score = merge_score(q.measure);
  const auto& name_rank = data.text.name_rank(text_level);
  for (const Out& o : outs) {
    GroupResult gr;
    gr.member = space.key(out_level, o.member);
    gr.interval = o.interval;
    gr.fact_count = o.facts;
    gr.area = space.area(out_level, o.member);
    if (score && o.lone != kNone) {
      const auto list = source->group(o.lone);
      const std::size_t m = k ? std::min(*k, list.size()) : list.size();
      gr.delta = m;
      gr.frequency_cutoff_positions = m;
      for (std::size_t i = 0; i < m; ++i) {
        const std::uint64_t f = list[i].freq;
        gr.ranking.push_back({data.text.key(text_level, list[i].keyword),
                              score_of(*score, f, f, gr.area, x), f, f, true});
      }
    } else if (score) {
      const Ranked r = o.acc.finish(k, *score, name_rank, filter);
      gr.epsilon = r.epsilon;
      gr.delta = r.delta;
      gr.frequency_cutoff_positions = r.cutoff;
      for (std::size_t i = 0; i < r.ids.size(); ++i) {
        gr.ranking.push_back({data.text.key(text_level, r.ids[i]),
                              score_of(*score, r.freq[i], r.change[i], gr.area, x), r.freq[i],
                              r.change[i], i < r.delta});
      }
    }
    result.groups.push_back(std::move(gr));
  }
  std::sort(result.groups.begin(), result.groups.end(), [](const GroupResult& a, const GroupResult& b) {
    return a.member != b.member ? a.member < b.member : a.interval < b.interval;
  });
  return result;
}

}  // namespace sttcube
