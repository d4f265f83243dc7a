#pragma once

#include <filesystem>

#include "sttcube/cube.hpp"

namespace sttcube {

inline constexpr int kStoreVersion = 1;

/// Writes the cube as a directory: schema.json, members/*.tsv, facts.bin,
/// cuboids/<coord>.tsv, lattice.tsv and the taxonomies it was built with.
/// Existing files of the same names are replaced.
void save_cube(const SttCube& cube, const std::filesystem::path& dir);

/// Throws std::runtime_error on a missing, malformed or newer store.
SttCube load_cube(const std::filesystem::path& dir);

}  // namespace sttcube
