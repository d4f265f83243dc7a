#include <doctest.h>

#include <sstream>

#include "sttcube/synth.hpp"

using namespace sttcube;

TEST_CASE("generation is deterministic") {
  SynthConfig sc;
  sc.objects = 500;
  const auto a = synthesize(sc);
  const auto b = synthesize(sc);
  CHECK(a.objects == b.objects);
  CHECK(a.text_links == b.text_links);
  sc.seed = 8;
  CHECK_FALSE(synthesize(sc).objects == a.objects);
}

TEST_CASE("generated records validate and re-parse") {
  SynthConfig sc;
  sc.objects = 300;
  const auto ds = synthesize(sc);
  for (const auto& o : ds.objects) CHECK(validate(o).accepted);
  std::stringstream s;
  write_jsonl(s, ds.objects);
  const auto back = parse_records(s, RecordFormat::Jsonl, StopwordList{});
  REQUIRE(back.size() == ds.objects.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    REQUIRE(back[i].object);
    CHECK(back[i].object->terms == ds.objects[i].terms);
  }
}

TEST_CASE("invalid shapes are rejected") {
  SynthConfig sc;
  sc.min_terms = 5;
  sc.max_terms = 2;
  CHECK_THROWS(sc.check());
}
