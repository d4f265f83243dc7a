#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "sttcube/hierarchy.hpp"
#include "sttcube/ingest.hpp"
#include "sttcube/kernels.hpp"
#include "sttcube/lattice.hpp"
#include "sttcube/materialize.hpp"
#include "sttcube/model.hpp"

namespace sttcube {

struct CubeConfig {
  SpatialScheme spatial_scheme = SpatialScheme::Semantic;
  TextualScheme textual_scheme = TextualScheme::Replication;
  KeywordSet keywords;
  GridConfig grid;
  double geocode_cutoff_km = default_geocode_cutoff_km();
  double location_area_km2 = 1.0;  // nominal area of a single location point

  void check() const;
  friend bool operator==(const CubeConfig&, const CubeConfig&) = default;
};

struct Taxonomies {
  std::shared_ptr<const GeoTaxonomy> geo;
  std::shared_ptr<const TextTaxonomy> text;
  std::shared_ptr<const ImportanceScores> scores;

  /// Fills absent pieces with empty defaults; a geo taxonomy is mandatory.
  Taxonomies resolved() const;
};

/// Columnar, append-only fact store. Both spatial base links and both
/// single-parent themes are kept so any scheme can be evaluated from facts.
struct FactStore {
  std::vector<MemberId> date;      // day member
  std::vector<MemberId> tod;       // second member
  std::vector<MemberId> location;  // semantic base member
  std::vector<MemberId> cell;      // grid level-0 member
  std::vector<MemberId> majority_theme;
  std::vector<MemberId> custom_theme;
  std::vector<std::uint64_t> term_offsets{0};
  std::vector<MemberId> terms;  // term members, multiset in input order

  std::size_t size() const noexcept { return date.size(); }
  std::span<const MemberId> terms_of(std::size_t i) const noexcept {
    return {terms.data() + term_offsets[i], terms.data() + term_offsets[i + 1]};
  }
  friend bool operator==(const FactStore&, const FactStore&) = default;
};

/// Dimension stores, facts and the base cuboid. Shared between cube
/// variants that differ only in their materialized cuboids.
struct CubeData {
  CubeConfig config;
  CubeSchema schema;
  Taxonomies taxonomies;
  Dimension date, tod, semantic, grid, text;
  FactStore facts;
  Cuboid base;
  std::size_t rejected = 0;

  const Dimension& spatial(SpatialScheme s) const { return s == SpatialScheme::Grid ? grid : semantic; }
  const Dimension& spatial() const { return spatial(config.spatial_scheme); }
  bool is_keyword(MemberId term) const { return text.lo(kTerm, term) != 0; }
};

class SttCube {
 public:
  SttCube() = default;
  SttCube(std::shared_ptr<const CubeData> data, Lattice lattice);

  const CubeData& data() const noexcept { return *data_; }
  std::shared_ptr<const CubeData> shared_data() const noexcept { return data_; }
  const CubeSchema& schema() const noexcept { return data_->schema; }
  const CubeConfig& config() const noexcept { return data_->config; }
  const Lattice& lattice() const noexcept { return lattice_; }
  Lattice& lattice() noexcept { return lattice_; }
  std::size_t fact_count() const noexcept { return data_->facts.size(); }

  /// Dimension behind a lattice slot under the cube's schemes.
  const Dimension& dimension(int slot) const;
  /// Absolute textual level of a textual coordinate index.
  int text_level(int coord_index) const noexcept { return coord_index + schema().text_base_level(); }

  const Coord& base_coord() const noexcept { return lattice_.coord(0); }
  const Cuboid* cuboid(const Coord& c) const;
  const std::map<Coord, std::shared_ptr<const Cuboid>>& cuboids() const noexcept { return store_; }
  /// Storage rows of a materialized cuboid, 0 when absent.
  std::uint64_t cuboid_rows(const Coord& c) const;
  void put_cuboid(std::shared_ptr<const Cuboid> c);
  void drop_cuboids();

  const MaterializationConfig& materialization() const noexcept { return mat_; }
  void set_materialization(const MaterializationConfig& m) { mat_ = m; }

  /// Storage rows over all materialized cuboids.
  std::uint64_t total_rows() const;
  /// Surface area of a spatial member of the active scheme at a coordinate level.
  double area(int spatial_level, MemberId id) const { return dimension(kSpatialDim).area(spatial_level, id); }

  /// Group-by lifts from `source` to `target`, which must be dominated by `source`.
  LiftSpec lift_spec(const Coord& source, const Coord& target,
                     std::optional<std::uint32_t> top_k = std::nullopt) const;
  /// Exact aggregation of `target` from the materialized untruncated `source`.
  Cuboid aggregate(const Coord& target, const Coord& source,
                   std::optional<std::uint32_t> top_k = std::nullopt) const;
  /// Smallest materialized untruncated ancestor of `c`.
  Coord smallest_exact_ancestor(const Coord& c) const;

  MeasureCell cell(const Cuboid& cuboid, std::size_t group) const;

 private:
  std::shared_ptr<const CubeData> data_;
  Lattice lattice_;
  std::map<Coord, std::shared_ptr<const Cuboid>> store_;
  std::map<Coord, std::uint64_t> rows_;
  MaterializationConfig mat_;
};

struct ConstructResult {
  SttCube cube;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

/// Builds dimensions, facts and the base cuboid, then applies `mat`.
ConstructResult construct(const std::vector<SttObject>& objects, const Taxonomies& taxonomies,
                          const CubeConfig& config, const MaterializationConfig& mat = {});

/// Appends facts and re-aggregates the touched groups of every materialized
/// cuboid. With `full_rebuild`, cuboids are recomputed from the new base.
ConstructResult update(const SttCube& cube, const std::vector<SttObject>& objects,
                       bool full_rebuild = false);

/// One single-fact group per fact in [first, last) under the given schemes.
/// Entries may repeat a keyword; only aggregation kernels consume this.
Cuboid fact_groups(const CubeData& data, std::size_t first, std::size_t last,
                   SpatialScheme spatial, TextualScheme textual);

/// Group-by lifts between two coordinates of the lattice for the given
/// schemes. `source` must dominate `target`.
LiftSpec make_lift_spec(const CubeData& data, SpatialScheme spatial, TextualScheme textual,
                        const Coord& source, const Coord& target,
                        std::optional<std::uint32_t> top_k = std::nullopt);

/// Absolute textual level of coordinate index 0 under a scheme.
inline int text_base_level(TextualScheme s) noexcept { return s == TextualScheme::Replication ? 0 : 1; }

}  // namespace sttcube
