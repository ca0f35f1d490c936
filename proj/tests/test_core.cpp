#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "daytrip/config.hpp"
#include "daytrip/csv.hpp"
#include "daytrip/manifest.hpp"
#include "daytrip/rng.hpp"
#include "temp.hpp"

using namespace daytrip;

TEST_CASE("fnv1a64 matches the published test vectors", "[rng]") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("seed derivation is stable and label-sensitive", "[rng]") {
  CHECK(mix_seed(1, "synth") == mix_seed(1, "synth"));
  CHECK(mix_seed(1, "synth") != mix_seed(1, "plans"));
  CHECK(mix_seed(1, "synth") != mix_seed(2, "synth"));
  CHECK(mix_seed(7, std::string_view("x")) == mix_seed(7, fnv1a64("x")));
}

TEST_CASE("rng draws are reproducible and in range", "[rng]") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng r(7);
  for (int i = 0; i < 1000; ++i) {
    double u = r.next_double();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.next_below(13) < 13);
    auto v = r.uniform_int(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
  }
}

TEST_CASE("rng shuffle is a permutation", "[rng]") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  Rng r(5);
  r.shuffle(v);
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("csv round-trips quoted fields", "[csv]") {
  testutil::TempDir tmp("csv");
  const std::string path = tmp.file("t.csv");
  {
    CsvWriter w(path, {"id", "name", "note"});
    w.write_row({"1", "plain", "hello"});
    w.write_row({"2", "with,comma", "a \"quoted\" word"});
    w.write_row({"3", "multi\nline", ""});
  }
  CsvReader r(path);
  std::vector<std::vector<std::string>> rows;
  r.for_each([&](const CsvRow& row) {
    rows.push_back({row.get("id"), row.get("name"), row.get("note")});
  });
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][1] == "with,comma");
  CHECK(rows[1][2] == "a \"quoted\" word");
  CHECK(rows[2][1] == "multi\nline");
  CHECK(rows[2][2] == "");
}

TEST_CASE("csv reader rejects missing columns and bad numbers", "[csv]") {
  testutil::TempDir tmp("csv");
  const std::string path = tmp.file("t.csv");
  {
    std::ofstream out(path);
    out << "a,b\n1,x\n";
  }
  CsvReader r(path);
  r.for_each([&](const CsvRow& row) {
    CHECK(row.get_int("a") == 1);
    CHECK_THROWS_AS(row.get("missing"), Error);
    CHECK_THROWS_AS(row.get_double("b"), Error);
  });
}

TEST_CASE("config survives a serialize-parse round trip", "[config]") {
  ProjectConfig cfg;
  cfg.seed = 99;
  cfg.threads = 4;
  cfg.paths.nodes = "nodes.csv";
  cfg.scoring.modes[Mode::car].constant = -12.5;
  cfg.drt.fleet_size = 10;
  cfg.amod.induced = true;
  cfg.calibration.objective.intervals[Mode::walk] = {0.05, 0.09};

  std::string once = dump_config(cfg);
  ProjectConfig back = config_from_json(ojson::parse(once));
  std::string twice = dump_config(back);
  CHECK(once == twice);
  CHECK(back.seed == 99);
  CHECK(back.scoring.modes[Mode::car].constant == -12.5);
  CHECK(back.drt.fleet_size == 10);
  CHECK(back.amod.induced);
  CHECK(back.calibration.objective.intervals[Mode::walk].first == 0.05);
}

TEST_CASE("default config is fully explicit in its own dump", "[config]") {
  ProjectConfig cfg;
  ojson j = config_to_json(cfg);
  CHECK(j.contains("seed"));
  CHECK(j.contains("paths"));
  CHECK(j["scoring"]["modes"].contains("car"));
  CHECK(j["scoring"]["modes"]["car"]["constant"].get<double>() == -10.0);
  CHECK(j["scoring"]["modes"]["pt"]["constant"].get<double>() == -225.0);
  CHECK(j["scoring"]["modes"]["bike"]["utils_per_h"].get<double>() == -36.0);
  CHECK(j["replanning"]["plan_memory"].get<int>() == 5);
  CHECK(j["simulation"]["flow_capacity_factor"].get<double>() == 0.25);
  CHECK(j["drt"]["max_wait_s"].get<double>() == 1800.0);
  CHECK(j["calibration"]["objective"].contains("car"));
}

TEST_CASE("config rejects unknown keys with their location", "[config]") {
  ojson j = config_to_json(ProjectConfig{});
  j["simulation"]["typo_key"] = 1;
  try {
    config_from_json(j);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
  }
}

TEST_CASE("config load and save work through files", "[config]") {
  testutil::TempDir tmp("config");
  ProjectConfig cfg;
  cfg.seed = 31;
  save_config(cfg, tmp.file("c.json"));
  ProjectConfig back = load_config(tmp.file("c.json"));
  CHECK(back.seed == 31);
  CHECK(dump_config(back) == dump_config(cfg));
}

TEST_CASE("file hash equals the in-memory hash of the same bytes", "[manifest]") {
  testutil::TempDir tmp("hash");
  const std::string content = "alpha,beta\n1,2\n";
  {
    std::ofstream out(tmp.file("x.csv"), std::ios::binary);
    out << content;
  }
  CHECK(file_fnv1a64(tmp.file("x.csv")) == fnv1a64(content));
  CHECK(hash_hex(fnv1a64("")) == "cbf29ce484222325");
}

TEST_CASE("manifest json carries the run description", "[manifest]") {
  testutil::TempDir tmp("manifest");
  {
    std::ofstream out(tmp.file("in.csv"));
    out << "a\n1\n";
  }
  RunManifest m;
  m.stage = "plans";
  m.global_seed = 5;
  m.stage_seed = derive_stage_seed(5, "plans");
  m.threads = 2;
  m.inputs = {tmp.file("in.csv")};
  m.parameters = ojson{{"p", 1.54}};
  m.wall_time_s = 0.25;
  write_manifest(m, tmp.file("manifest.json"));

  std::ifstream in(tmp.file("manifest.json"));
  ojson j = ojson::parse(in);
  CHECK(j["stage"] == "plans");
  CHECK(j["global_seed"].get<std::uint64_t>() == 5);
  CHECK(j["stage_seed"].get<std::uint64_t>() == mix_seed(5, "plans"));
  CHECK(j["inputs"].size() == 1);
  CHECK(j["inputs"][0]["fnv1a64"] == hash_hex(file_fnv1a64(tmp.file("in.csv"))));
  CHECK(j["parameters"]["p"].get<double>() == 1.54);
  CHECK(j.contains("wall_time_s"));
}
