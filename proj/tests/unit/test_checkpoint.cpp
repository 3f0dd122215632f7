#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "fixtures.hpp"
#include "hyper/checkpoint.hpp"
#include "hyper/error.hpp"

using namespace hyper;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hyper_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("checkpoint round-trip preserves every tensor and predictions") {
    const PhaModel m(ModelConfig{}, 5);
    const auto path = temp_path("ckpt.json");
    save_checkpoint(m, path, R"({"seed":5})");
    const PhaModel back = load_checkpoint(path, ModelConfig{});
    CHECK(back.config() == m.config());
    const auto a = m.parameters().all();
    const auto b = back.parameters().all();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i]->name == b[i]->name);
      CHECK(a[i]->value == b[i]->value);
    }
    const auto rec = testing::make_scene();
    Rng r1(3), r2(3);
    CHECK(rollout(rec, m, r1, {}).log_likelihood == rollout(rec, back, r2, {}).log_likelihood);
    CHECK(checkpoint_provenance(path).find("\"seed\":5") != std::string::npos);
  }

  TEST_CASE("saving twice gives byte-identical files") {
    const PhaModel m(ModelConfig{}, 5);
    const auto p1 = temp_path("c1.json"), p2 = temp_path("c2.json");
    save_checkpoint(m, p1);
    save_checkpoint(m, p2);
    std::ifstream a(p1), b(p2);
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
  }

  TEST_CASE("config mismatch and missing file") {
    const PhaModel m(ModelConfig{}, 5);
    const auto path = temp_path("ckpt2.json");
    save_checkpoint(m, path);
    ModelConfig other;
    other.hidden_size = 16;
    try {
      load_checkpoint(path, other);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kCheckpointMismatch);
    }
    try {
      load_checkpoint(temp_path("absent.json"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMissingCheckpoint);
    }
  }

  TEST_CASE("tampered tensor shape is rejected") {
    const PhaModel m(testing::tiny_config(), 5);
    const auto path = temp_path("ckpt3.json");
    save_checkpoint(m, path);
    std::ifstream in(path);
    auto j = nlohmann::json::parse(in);
    in.close();
    j["parameters"]["decoder.cell.bias"]["shape"][0] = 99;
    std::ofstream(path) << j.dump();
    CHECK_THROWS_AS(load_checkpoint(path), Error);
    j["parameters"].erase("decoder.cell.bias");
    std::ofstream(path) << j.dump();
    CHECK_THROWS_AS(load_checkpoint(path), Error);
  }
}
