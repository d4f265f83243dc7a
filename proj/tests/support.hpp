#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

#include "sttcube/cube.hpp"
#include "sttcube/hierarchy.hpp"
#include "sttcube/ingest.hpp"

#ifndef STTCUBE_FIXTURES
#error "STTCUBE_FIXTURES must point at tests/fixtures"
#endif

namespace fixtures {

inline std::filesystem::path path(const char* name) {
  return std::filesystem::path(STTCUBE_FIXTURES) / name;
}

inline sttcube::Taxonomies taxonomies() {
  sttcube::Taxonomies t;
  t.geo = std::make_shared<const sttcube::GeoTaxonomy>(sttcube::GeoTaxonomy::load(path("geo_dk.tsv")));
  t.text = std::make_shared<const sttcube::TextTaxonomy>(
      sttcube::TextTaxonomy::load(path("text_taxonomy.tsv")));
  t.scores = std::make_shared<const sttcube::ImportanceScores>(
      sttcube::ImportanceScores::load(path("scores.tsv")));
  return t;
}

inline std::vector<sttcube::SttObject> sample_records() {
  std::ifstream in(path("sample_records.jsonl"));
  if (!in) throw std::runtime_error("missing sample records fixture");
  std::vector<sttcube::SttObject> out;
  for (auto& r : sttcube::parse_records(in, sttcube::RecordFormat::Jsonl,
                                        sttcube::StopwordList::builtin())) {
    if (r.object) out.push_back(*r.object);
  }
  return out;
}

}  // namespace fixtures
