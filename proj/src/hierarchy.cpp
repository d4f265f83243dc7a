#include "sttcube/hierarchy.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace sttcube {

void TextTaxonomy::add(std::string child, std::string parent, int parent_level) {
  if (parent_level < kTheme || parent_level > kConcept) {
    throw std::invalid_argument("text taxonomy parent level must be theme, topic or concept");
  }
  if (child.empty() || parent.empty()) throw std::invalid_argument("text taxonomy: empty key");
  up_[parent_level - 1].emplace(std::move(child), std::move(parent));
}

std::vector<std::tuple<std::string, std::string, int>> TextTaxonomy::links() const {
  std::vector<std::tuple<std::string, std::string, int>> out;
  for (int i = 0; i < 3; ++i) {
    for (const auto& [child, parent] : up_[i]) out.emplace_back(child, parent, i + 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

TextTaxonomy TextTaxonomy::from_stream(std::istream& in) {
  TextTaxonomy tax;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) f.push_back(cell);
    if (f.size() != 3) {
      throw std::runtime_error("text taxonomy line " + std::to_string(lineno) + ": expected 3 fields");
    }
    int level = -1;
    if (f[2] == "theme") level = kTheme;
    if (f[2] == "topic") level = kTopic;
    if (f[2] == "concept") level = kConcept;
    if (level < 0) {
      throw std::runtime_error("text taxonomy line " + std::to_string(lineno) + ": bad level");
    }
    tax.add(f[0], f[1], level);
  }
  return tax;
}

TextTaxonomy TextTaxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open text taxonomy " + path.string());
  return from_stream(in);
}

std::string TextTaxonomy::parent(std::string_view key, int from_level) const {
  if (from_level < kTerm || from_level >= kConcept) {
    throw std::invalid_argument("text taxonomy: no parent map above concept");
  }
  const auto& m = up_[from_level];
  auto it = m.find(std::string(key));
  return it == m.end() ? std::string(key) : it->second;
}

std::string TextTaxonomy::ancestor(std::string_view term, int level) const {
  if (level < kTerm || level > kConcept) throw std::invalid_argument("textual level out of range");
  std::string key(term);
  for (int l = kTerm; l < level; ++l) key = parent(key, l);
  return key;
}

std::size_t TextTaxonomy::size() const noexcept {
  return up_[0].size() + up_[1].size() + up_[2].size();
}

double ImportanceScores::get(std::string_view member) const {
  auto it = scores_.find(std::string(member));
  return it == scores_.end() ? 0.0 : it->second;
}

std::vector<std::pair<std::string, double>> ImportanceScores::entries() const {
  std::vector<std::pair<std::string, double>> out(scores_.begin(), scores_.end());
  std::sort(out.begin(), out.end());
  return out;
}

ImportanceScores ImportanceScores::from_stream(std::istream& in) {
  ImportanceScores out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    double v = 0;
    if (tab == std::string::npos) {
      throw std::runtime_error("score line " + std::to_string(lineno) + ": expected 2 fields");
    }
    auto res = std::from_chars(line.data() + tab + 1, line.data() + line.size(), v);
    if (res.ec != std::errc{}) {
      throw std::runtime_error("score line " + std::to_string(lineno) + ": bad number");
    }
    out.set(line.substr(0, tab), v);
  }
  return out;
}

ImportanceScores ImportanceScores::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open score file " + path.string());
  return from_stream(in);
}

TemporalMembers build_temporal(Instant t) {
  const CivilDate c = civil_from_days(day_number(t));
  const std::int64_t sod = second_of_day(t);
  const int h = static_cast<int>(sod / 3600);
  const int m = static_cast<int>((sod / 60) % 60);
  const int s = static_cast<int>(sod % 60);
  char buf[32];
  TemporalMembers out;
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
  out.day = buf;
  std::snprintf(buf, sizeof buf, "%04d-%02u", c.year, c.month);
  out.month = buf;
  std::snprintf(buf, sizeof buf, "%04d-Q%u", c.year, (c.month + 2) / 3);
  out.quarter = buf;
  std::snprintf(buf, sizeof buf, "%04d", c.year);
  out.year = buf;
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d", h, m, s);
  out.second = buf;
  std::snprintf(buf, sizeof buf, "%02d:%02d", h, m);
  out.minute = buf;
  std::snprintf(buf, sizeof buf, "%02d", h);
  out.hour = buf;
  return out;
}

std::vector<std::string> spatial_parents(std::string_view city, const GeoTaxonomy& geo) {
  if (city == kUnknownMember) {
    const std::string u(kUnknownMember);
    return {u, u, u, "ALL"};
  }
  const GeoMember* c = geo.find(city);
  if (!c || c->level != "city") throw std::invalid_argument("unknown city " + std::string(city));
  const GeoMember* r = geo.find(c->parent);
  const GeoMember* n = r ? geo.find(r->parent) : nullptr;
  if (!r || !n) throw std::runtime_error("geo taxonomy chain broken at " + c->id);
  return {c->id, r->id, n->id, "ALL"};
}

std::vector<std::string> textual_parents_replication(const std::vector<std::string>& terms,
                                                     const TextTaxonomy& tax, int level) {
  std::vector<std::string> out;
  out.reserve(terms.size());
  for (const auto& t : terms) out.push_back(tax.ancestor(t, level));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::string lift_theme(std::string theme, const TextTaxonomy& tax, int level) {
  for (int l = kTheme; l < level; ++l) theme = tax.parent(theme, l);
  return theme;
}

}  // namespace

std::string textual_parent_majority(const std::vector<std::string>& terms,
                                    const TextTaxonomy& tax, int level) {
  if (terms.empty()) throw std::invalid_argument("majority parent of an empty term list");
  if (level < kTheme || level > kConcept) throw std::invalid_argument("level must be above term");
  std::map<std::string, int> support;
  for (const auto& t : terms) ++support[tax.parent(t, kTerm)];
  auto best = support.begin();
  for (auto it = support.begin(); it != support.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return lift_theme(best->first, tax, level);
}

std::string textual_parent_custom(const std::vector<std::string>& terms, const TextTaxonomy& tax,
                                  const ImportanceScores& scores, int level) {
  if (terms.empty()) throw std::invalid_argument("custom parent of an empty term list");
  if (level < kTheme || level > kConcept) throw std::invalid_argument("level must be above term");
  std::vector<std::string> themes = textual_parents_replication(terms, tax, kTheme);
  const std::string* best = &themes.front();
  double best_score = scores.get(*best);
  for (const auto& th : themes) {
    const double s = scores.get(th);
    if (s > best_score) {
      best = &th;
      best_score = s;
    }
  }
  return lift_theme(*best, tax, level);
}

Dimension::Dimension(std::string name, std::vector<std::string> level_names)
    : name_(std::move(name)) {
  if (level_names.size() < 2) throw std::invalid_argument("dimension needs at least two levels");
  for (auto& n : level_names) levels_.push_back(Level{std::move(n), {}, {}, {}, {}, {}, {}});
  add(level_count() - 1, "ALL", kNoMember);
  refresh();
}

MemberId Dimension::find(int level, std::string_view key) const {
  const auto& idx = levels_.at(level).index;
  auto it = idx.find(std::string(key));
  return it == idx.end() ? kNoMember : it->second;
}

MemberId Dimension::add(int level, std::string_view key, MemberId parent, double area,
                        std::int64_t lo, std::int64_t hi) {
  Level& L = levels_.at(level);
  auto [it, inserted] = L.index.emplace(std::string(key), static_cast<MemberId>(L.keys.size()));
  if (!inserted) return it->second;
  if (level + 1 < level_count() && parent >= levels_[level + 1].keys.size()) {
    L.index.erase(it);
    throw std::invalid_argument("dimension " + name_ + ": parent id out of range");
  }
  L.keys.emplace_back(key);
  L.parents.push_back(parent);
  L.areas.push_back(area);
  L.lo.push_back(lo);
  L.hi.push_back(hi);
  return it->second;
}

MemberId Dimension::lift(int from, int to, MemberId id) const {
  if (to < from) throw std::invalid_argument("lift must go up the hierarchy");
  for (int l = from; l < to; ++l) id = levels_[l].parents[id];
  return id;
}

void Dimension::refresh() {
  const int n = level_count();
  lifts_.assign(n, std::vector<std::vector<MemberId>>(n));
  for (int from = 0; from < n; ++from) {
    const std::size_t count = levels_[from].keys.size();
    for (int to = from; to < n; ++to) {
      auto& table = lifts_[from][to];
      table.resize(count);
      if (to == from) {
        std::iota(table.begin(), table.end(), MemberId{0});
      } else {
        const auto& prev = lifts_[from][to - 1];
        const auto& parents = levels_[to - 1].parents;
        for (std::size_t i = 0; i < count; ++i) table[i] = parents[prev[i]];
      }
    }
  }
  ranks_.assign(n, {});
  for (int l = 0; l < n; ++l) {
    const auto& keys = levels_[l].keys;
    std::vector<MemberId> order(keys.size());
    std::iota(order.begin(), order.end(), MemberId{0});
    std::sort(order.begin(), order.end(), [&](MemberId a, MemberId b) { return keys[a] < keys[b]; });
    ranks_[l].resize(keys.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks_[l][order[r]] = static_cast<std::uint32_t>(r);
  }
}

const std::vector<MemberId>& Dimension::lift_table(int from, int to) const {
  return lifts_.at(from).at(to);
}

bool operator==(const Dimension& a, const Dimension& b) {
  if (a.name_ != b.name_ || a.levels_.size() != b.levels_.size()) return false;
  for (std::size_t l = 0; l < a.levels_.size(); ++l) {
    const auto& x = a.levels_[l];
    const auto& y = b.levels_[l];
    if (x.name != y.name || x.keys != y.keys || x.parents != y.parents || x.areas != y.areas ||
        x.lo != y.lo || x.hi != y.hi) {
      return false;
    }
  }
  return true;
}

}  // namespace sttcube
