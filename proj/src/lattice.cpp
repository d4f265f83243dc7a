#include "sttcube/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sttcube {

Lattice::Lattice(std::array<int, kDims> level_counts,
                 std::vector<std::vector<std::string>> level_names)
    : counts_(level_counts), names_(std::move(level_names)) {
  std::size_t n = 1;
  for (int d = 0; d < kDims; ++d) {
    if (counts_[d] < 1 || counts_[d] > 255) throw std::invalid_argument("bad level count");
    n *= static_cast<std::size_t>(counts_[d]);
  }
  names_.resize(kDims);
  for (int d = 0; d < kDims; ++d) {
    auto& names = names_[d];
    for (int l = static_cast<int>(names.size()); l < counts_[d]; ++l) {
      names.push_back(counts_[d] == 1 ? "-" : std::to_string(l));
    }
  }
  coords_.reserve(n);
  Coord c{};
  for (std::size_t i = 0; i < n; ++i) {
    coords_.push_back(c);
    for (int d = kDims - 1; d >= 0; --d) {
      if (++c[d] < counts_[d]) break;
      c[d] = 0;
    }
  }
  rows_.assign(n, kUnknownRows);
  materialized_.assign(n, 0);
  materialized_[0] = 1;
}

Lattice Lattice::enumerate(const CubeSchema& schema) {
  std::vector<std::vector<std::string>> names;
  for (int d = 0; d < kDims; ++d) names.push_back(schema.hierarchies.at(d).levels);
  return Lattice(schema.level_counts(), std::move(names));
}

std::optional<std::size_t> Lattice::index_of(const Coord& c) const noexcept {
  std::size_t i = 0;
  for (int d = 0; d < kDims; ++d) {
    if (c[d] >= counts_[d]) return std::nullopt;
    i = i * static_cast<std::size_t>(counts_[d]) + c[d];
  }
  return i;
}

std::size_t Lattice::index(const Coord& c) const {
  auto i = index_of(c);
  if (!i) throw std::out_of_range("coordinate outside the lattice");
  return *i;
}

std::string Lattice::name(std::size_t i) const {
  const Coord& c = coords_.at(i);
  std::string out;
  for (int d = 0; d < kDims; ++d) {
    if (counts_[d] == 1) continue;
    if (!out.empty()) out += '.';
    out += names_[d][c[d]];
  }
  return out.empty() ? "-" : out;
}

std::vector<std::pair<std::size_t, std::size_t>> Lattice::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (int d = 0; d < kDims; ++d) {
      Coord up = coords_[i];
      if (up[d] + 1 >= counts_[d]) continue;
      ++up[d];
      out.emplace_back(i, index(up));
    }
  }
  return out;
}

bool Lattice::dominates(const Coord& ancestor, const Coord& descendant) noexcept {
  for (int d = 0; d < kDims; ++d) {
    if (ancestor[d] > descendant[d]) return false;
  }
  return true;
}

std::vector<std::size_t> Lattice::descendants(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (dominates(coords_.at(i), coords_[j])) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> Lattice::ancestors(std::size_t i) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < size(); ++j) {
    if (dominates(coords_[j], coords_.at(i))) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> Lattice::materialized_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (materialized_[i]) out.push_back(i);
  }
  return out;
}

std::uint64_t Lattice::materialized_rows() const {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (materialized_[i] && rows_[i] != kUnknownRows) total += rows_[i];
  }
  return total;
}

bool Lattice::all_rows_known() const noexcept {
  return std::none_of(rows_.begin(), rows_.end(), [](std::uint64_t r) { return r == kUnknownRows; });
}

void Lattice::forget_unmaterialized_rows() {
  for (std::size_t i = 0; i < size(); ++i) {
    if (!materialized_[i]) rows_[i] = kUnknownRows;
  }
}

std::uint64_t Lattice::cost(std::size_t i) const {
  std::uint64_t best = kUnknownRows;
  for (std::size_t m = 0; m < size(); ++m) {
    if (materialized_[m] && dominates(coords_[m], coords_.at(i))) best = std::min(best, rows_[m]);
  }
  return best;
}

std::vector<std::uint64_t> Lattice::costs() const {
  std::vector<std::uint64_t> out(size(), kUnknownRows);
  const auto mats = materialized_nodes();
  for (std::size_t i = 0; i < size(); ++i) {
    for (auto m : mats) {
      if (dominates(coords_[m], coords_[i])) out[i] = std::min(out[i], rows_[m]);
    }
  }
  return out;
}

namespace {

std::uint64_t benefit_with(const Lattice& lat, const std::vector<std::uint64_t>& cost,
                           std::size_t i) {
  const std::uint64_t size = lat.rows(i);
  if (size == kUnknownRows) return 0;
  std::uint64_t total = 0;
  for (std::size_t j = 0; j < lat.size(); ++j) {
    if (!Lattice::dominates(lat.coord(i), lat.coord(j))) continue;
    if (cost[j] != kUnknownRows && cost[j] > size) total += cost[j] - size;
  }
  return total;
}

}  // namespace

std::uint64_t Lattice::benefit(std::size_t i) const { return benefit_with(*this, costs(), i); }

std::vector<std::uint64_t> Lattice::benefits() const {
  const auto cost = costs();
  std::vector<std::uint64_t> out(size(), 0);
  for (std::size_t i = 0; i < size(); ++i) {
    if (!materialized_[i]) out[i] = benefit_with(*this, cost, i);
  }
  return out;
}

void Lattice::dump(std::ostream& out) const {
  out << "coord\trow_count\tmaterialized\n";
  for (std::size_t i = 0; i < size(); ++i) {
    out << name(i) << '\t';
    if (rows_[i] == kUnknownRows) {
      out << "inf";
    } else {
      out << rows_[i];
    }
    out << '\t' << (materialized_[i] ? 'T' : 'F') << '\n';
  }
}

void Lattice::restore(std::istream& in) {
  std::string line;
  std::size_t i = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::stringstream ss(line);
    std::string name_field, rows_field, flag;
    std::getline(ss, name_field, '\t');
    std::getline(ss, rows_field, '\t');
    std::getline(ss, flag, '\t');
    if (i >= size() || name_field != name(i)) {
      throw std::runtime_error("lattice dump does not match the schema at '" + name_field + "'");
    }
    if (rows_field == "inf") {
      rows_[i] = kUnknownRows;
    } else {
      std::uint64_t v = 0;
      auto res = std::from_chars(rows_field.data(), rows_field.data() + rows_field.size(), v);
      if (res.ec != std::errc{}) throw std::runtime_error("lattice dump: bad row count");
      rows_[i] = v;
    }
    materialized_[i] = flag == "T" ? 1 : 0;
    ++i;
  }
  if (i != size()) throw std::runtime_error("lattice dump is incomplete");
}

}  // namespace sttcube
