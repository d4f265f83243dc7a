#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sttcube/materialize.hpp"
#include "sttcube/persist.hpp"
#include "sttcube/query.hpp"
#include "sttcube/synth.hpp"

using namespace sttcube;

namespace {

std::filesystem::path scratch(const char* name) {
  auto p = std::filesystem::temp_directory_path() / ("sttcube_test_" + std::to_string(::getpid()) + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("save and load round trip") {
  SynthConfig sc;
  sc.objects = 1000;
  sc.days = 3;
  const auto ds = synthesize(sc);
  for (auto t : {TextualScheme::Replication, TextualScheme::Custom}) {
    CubeConfig cfg;
    cfg.textual_scheme = t;
    MaterializationConfig m;
    m.strategy = Strategy::PAM;
    m.top_k = 5;
    m.budget = 20000;
    const auto cube = construct(ds.objects, ds.taxonomies(), cfg, m).cube;
    const auto dir = scratch(t == TextualScheme::Custom ? "c" : "r");
    save_cube(cube, dir);
    const auto back = load_cube(dir);
    CHECK(back.config() == cube.config());
    CHECK(back.schema() == cube.schema());
    CHECK(back.data().facts == cube.data().facts);
    CHECK(back.data().text == cube.data().text);
    REQUIRE(back.cuboids().size() == cube.cuboids().size());
    for (const auto& [c, p] : cube.cuboids()) {
      REQUIRE(back.cuboid(c) != nullptr);
      CHECK(*back.cuboid(c) == *p);
    }
    CHECK(back.materialization().top_k == cube.materialization().top_k);
    QuerySpec q;
    q.textual_level = kTheme;
    q.k = 4;
    CHECK(evaluate(back, q).groups.size() == evaluate(cube, q).groups.size());
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("loading rejects broken stores") {
  const auto dir = scratch("bad");
  CHECK_THROWS_AS(load_cube(dir), std::runtime_error);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "schema.json") << "{ nope";
  CHECK_THROWS_AS(load_cube(dir), std::runtime_error);
  std::filesystem::remove_all(dir);
}
