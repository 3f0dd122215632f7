#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "hyper/dataset_io.hpp"
#include "hyper/error.hpp"
#include "hyper/synthetic.hpp"

using namespace hyper;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "hyper_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_SUITE("data-pipeline") {
  TEST_CASE("write then read gives equal records") {
    const auto records = generate_synthetic(10, 5, default_mix());
    const auto path = temp_file("roundtrip.jsonl");
    write_dataset(records, path, R"({"seed":5})");
    const auto back = read_dataset(path);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) CHECK(back[i] == records[i]);
    CHECK(read_dataset_meta(path).find("\"seed\":5") != std::string::npos);
  }

  TEST_CASE("single record line round-trips bit-exactly") {
    const auto records = generate_synthetic(3, 9, default_mix());
    for (const auto& r : records) CHECK(record_from_line(record_to_line(r)) == r);
  }

  TEST_CASE("truncated line is reported with its line number") {
    const auto records = generate_synthetic(3, 5, default_mix());
    const auto path = temp_file("truncated.jsonl");
    {
      std::ofstream out(path);
      out << record_to_line(records[0]) << "\n";
      const auto line = record_to_line(records[1]);
      out << line.substr(0, line.size() / 2) << "\n";
    }
    try {
      read_dataset(path);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kMalformedLine);
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }

  TEST_CASE("empty file reads as an empty dataset") {
    const auto path = temp_file("empty.jsonl");
    { std::ofstream out(path); }
    CHECK(read_dataset(path).empty());
  }

  TEST_CASE("missing file is an io error") {
    try {
      read_dataset(temp_file("does_not_exist.jsonl"));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kIo);
    }
  }

  TEST_CASE("schema violations are malformed lines") {
    CHECK_THROWS_AS(record_from_line(R"({"scene_id":"a"})"), Error);
    CHECK_THROWS_AS(record_from_line(R"({"scene_id":"a","observed":[[0]],"future":[],"future_modes":[],"centerlines":[]})"),
                    Error);
    CHECK_THROWS_AS(record_from_line("not json"), Error);
  }
}
