#include "sttcube/view.hpp"

#include <algorithm>
#include <stdexcept>

namespace sttcube {

Predicate Predicate::member_of(int slot, int level, MemberId id) {
  if (slot < 0 || slot >= kDims) throw std::invalid_argument("bad lattice slot");
  Predicate p;
  p.kind = Kind::Member;
  p.slot = slot;
  p.level = level;
  p.member = id;
  return p;
}

Predicate Predicate::during(TimeRange r) {
  if (r.to <= r.from) throw std::invalid_argument("empty time range");
  Predicate p;
  p.kind = Kind::Time;
  p.range = r;
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> ps) {
  Predicate p;
  p.kind = Kind::And;
  p.children = std::move(ps);
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> ps) {
  Predicate p;
  p.kind = Kind::Or;
  p.children = std::move(ps);
  return p;
}

Predicate Predicate::negate(Predicate q) {
  Predicate p;
  p.kind = Kind::Not;
  p.children.push_back(std::move(q));
  return p;
}

namespace {

int time_of_day_level(const TimeRange& r) {
  const auto aligned = [](std::int64_t t, std::int64_t unit) { return floor_div(t, unit) * unit == t; };
  const auto both = [&](std::int64_t unit) { return aligned(r.from.seconds, unit) && aligned(r.to.seconds, unit); };
  if (both(kSecondsPerDay)) return kTodAll;
  if (both(3600)) return kHour;
  if (both(60)) return kMinute;
  return kSecond;
}

void tighten(const Predicate& p, Coord& c) {
  switch (p.kind) {
    case Predicate::Kind::Member:
      c[p.slot] = std::min<std::uint8_t>(c[p.slot], static_cast<std::uint8_t>(p.level));
      break;
    case Predicate::Kind::Time:
      c[kDateDim] = std::min<std::uint8_t>(c[kDateDim], static_cast<std::uint8_t>(kDay));
      c[kTodDim] = std::min<std::uint8_t>(c[kTodDim], static_cast<std::uint8_t>(time_of_day_level(p.range)));
      break;
    default:
      for (const auto& ch : p.children) tighten(ch, c);
  }
}

struct Evaluator {
  const SttCube& cube;
  const Coord& src;

  MemberId lift(int slot, MemberId id, int to) const {
    const int shift = slot == kTextDim ? cube.schema().text_base_level() : 0;
    if (src[slot] == to) return id;
    return cube.dimension(slot).lift(src[slot] + shift, to + shift, id);
  }

  bool operator()(const Predicate& p, const GroupKey& key, const Entry* e) const {
    switch (p.kind) {
      case Predicate::Kind::True: return true;
      case Predicate::Kind::And:
        return std::all_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return (*this)(c, key, e); });
      case Predicate::Kind::Or:
        return std::any_of(p.children.begin(), p.children.end(), [&](const Predicate& c) { return (*this)(c, key, e); });
      case Predicate::Kind::Not: return !(*this)(p.children.at(0), key, e);
      case Predicate::Kind::Member: {
        MemberId id = 0;
        switch (p.slot) {
          case kDateDim: id = key.date; break;
          case kSpatialDim: id = key.spatial; break;
          case kTodDim: id = key.tod; break;
          default:
            if (!e) return false;
            id = e->keyword;
        }
        return lift(p.slot, id, p.level) == p.member;
      }
      case Predicate::Kind::Time: {
        const auto& data = cube.data();
        std::int64_t start = data.date.lo(src[kDateDim], key.date) * kSecondsPerDay;
        if (src[kTodDim] != kTodAll) start += data.tod.lo(src[kTodDim], key.tod);
        return start >= p.range.from.seconds && start < p.range.to.seconds;
      }
    }
    return false;
  }
};

}  // namespace

CubeView::CubeView(const SttCube& cube) : CubeView(cube, cube.base_coord()) {}

CubeView::CubeView(const SttCube& cube, const Coord& coord) : cube_(&cube), coord_(coord) {
  if (!cube.lattice().index_of(coord)) throw std::invalid_argument("coordinate outside the lattice");
}

Coord CubeView::filter_coord() const {
  Coord c = coord_;
  for (const auto& p : filters_) tighten(p, c);
  return c;
}

const Cuboid& CubeView::cells() const {
  if (cached_) return *cached_;
  if (empty_) {
    auto c = std::make_shared<Cuboid>();
    c->coord = coord_;
    cached_ = std::move(c);
    return *cached_;
  }
  const Coord fc = filter_coord();
  const Coord src = cube_->smallest_exact_ancestor(fc);
  if (filters_.empty() && !min_facts_ && src == coord_) {
    cached_ = cube_->cuboids().at(src);
    return *cached_;
  }
  const Cuboid& source = *cube_->cuboid(src);
  Cuboid filtered;
  const Cuboid* from = &source;
  if (!filters_.empty()) {
    const Evaluator eval{*cube_, src};
    const Predicate all = Predicate::all_of(filters_);
    filtered.coord = src;
    std::vector<Entry> keep;
    for (std::size_t g = 0; g < source.group_count(); ++g) {
      const GroupKey& key = source.keys[g];
      keep.clear();
      const auto list = source.group(g);
      for (const Entry& e : list) {
        if (eval(all, key, &e)) keep.push_back(e);
      }
      if (keep.empty() && !(list.empty() && eval(all, key, nullptr))) continue;
      filtered.append_group(key, source.fact_counts[g], 0, keep);
    }
    from = &filtered;
  }
  Cuboid out = from->coord == coord_ ? *from : aggregate_parallel(*from, cube_->lift_spec(src, coord_));
  if (min_facts_) {
    Cuboid kept;
    kept.coord = out.coord;
    for (std::size_t g = 0; g < out.group_count(); ++g) {
      if (out.fact_counts[g] >= *min_facts_) kept.append_group(out.keys[g], out.fact_counts[g], 0, out.group(g));
    }
    out = std::move(kept);
  }
  cached_ = std::make_shared<const Cuboid>(std::move(out));
  return *cached_;
}

std::uint64_t CubeView::fact_count() const {
  std::uint64_t total = 0;
  for (auto f : cells().fact_counts) total += f;
  return total;
}

CubeView stt_slice(const CubeView& v, int slot, int level, std::string_view member) {
  if (slot < 0 || slot >= kDims) throw std::invalid_argument("bad lattice slot");
  if (v.removed_[slot]) throw std::invalid_argument("slot was already sliced");
  const int levels = v.cube().lattice().level_counts()[slot];
  if (level < 0 || level >= levels) throw std::invalid_argument("level out of range");
  CubeView out = v;
  out.invalidate();
  out.coord_[slot] = static_cast<std::uint8_t>(level);
  out.removed_[slot] = true;
  const int shift = slot == kTextDim ? v.cube().schema().text_base_level() : 0;
  const MemberId id = v.cube().dimension(slot).find(level + shift, member);
  if (id == kNoMember) {
    out.empty_ = true;
    out.warnings_.push_back("unknown member '" + std::string(member) + "'");
    return out;
  }
  out.filters_.push_back(Predicate::member_of(slot, level, id));
  return out;
}

CubeView stt_dice(const CubeView& v, const Predicate& cond, std::optional<std::uint64_t> min_fact_count) {
  CubeView out = v;
  out.invalidate();
  if (cond.kind != Predicate::Kind::True) out.filters_.push_back(cond);
  if (min_fact_count) out.min_facts_ = std::max(out.min_facts_.value_or(0), *min_fact_count);
  return out;
}

CubeView stt_rollup(const CubeView& v, int slot, int level) {
  if (slot < 0 || slot >= kDims) throw std::invalid_argument("bad lattice slot");
  if (v.removed_[slot]) throw std::invalid_argument("slot was sliced away");
  if (level < v.coord_[slot] || level >= v.cube().lattice().level_counts()[slot]) {
    throw std::invalid_argument("roll-up must move to a coarser level");
  }
  CubeView out = v;
  out.invalidate();
  out.coord_[slot] = static_cast<std::uint8_t>(level);
  return out;
}

CubeView stt_drilldown(const CubeView& v, int slot, int level) {
  if (slot < 0 || slot >= kDims) throw std::invalid_argument("bad lattice slot");
  if (v.removed_[slot]) throw std::invalid_argument("slot was sliced away");
  if (level < 0 || level > v.coord_[slot]) throw std::invalid_argument("drill-down must move to a finer level");
  CubeView out = v;
  out.invalidate();
  out.coord_[slot] = static_cast<std::uint8_t>(level);
  return out;
}

}  // namespace sttcube
