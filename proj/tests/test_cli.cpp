// File-level tests driving the installed CLI binary (path in argv[1]).

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "iotrace/device.hpp"
#include "iotrace/io.hpp"
#include "iotrace/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace iotrace;

namespace {

std::string g_cli;
fs::path g_work;

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = g_cli + " " + args + " >" + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  REQUIRE(f);
  f << content;
}

std::set<std::string> published_set(const fs::path& p) {
  const json j = json::parse(slurp(p));
  std::set<std::string> out;
  for (const auto& b : j["beacons"]) out.insert(b.get<std::string>());
  return out;
}

const std::string kSmokeConfig = R"({
  "seed": 5,
  "mode": "centralized",
  "slot_len_s": 60,
  "broadcast_interval_s": 10,
  "epsilon_slots": 1,
  "risk_threshold_s": 120,
  "duration_s": 600,
  "totems": [{"id": "T-0001", "x": 0, "y": 0, "radio_range_m": 50}],
  "devices": {"count": 3, "dwell_mean_s": 600},
  "infections": [{"device": 0, "diagnosis_time_s": 480}],
  "adversary": {"coverage": "global", "targets": [0]}
})";

}  // namespace

TEST_CASE("simulate writes artifacts and is byte-reproducible") {
  const fs::path cfg = g_work / "cfg.json";
  spit(cfg, kSmokeConfig);

  const fs::path out1 = g_work / "out1";
  const fs::path out2 = g_work / "out2";
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out1.string(),
                g_work / "sim1.log") == 0);
  CHECK(fs::exists(out1 / "metrics.json"));
  CHECK(fs::exists(out1 / "published_0.json"));
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out2.string(),
                g_work / "sim2.log") == 0);

  for (const auto& entry : fs::directory_iterator(out1)) {
    const fs::path other = out2 / entry.path().filename();
    REQUIRE_MESSAGE(fs::exists(other), other.string());
    CHECK_MESSAGE(slurp(entry.path()) == slurp(other), entry.path().filename().string());
  }

  SUBCASE("a non-empty output directory needs --overwrite") {
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out1.string(),
                  g_work / "sim3.log") == 2);
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out1.string() + " --overwrite",
                  g_work / "sim4.log") == 0);
  }
}

TEST_CASE("simulate --sweep fans out one run per seed") {
  const fs::path cfg = g_work / "sweep_cfg.json";
  spit(cfg, kSmokeConfig);
  const fs::path out = g_work / "sweep_out";
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out.string() +
                    " --sweep seeds=3..6",
                g_work / "sweep.log") == 0);
  for (int seed = 3; seed <= 6; ++seed) {
    CHECK(fs::exists(out / std::to_string(seed) / "metrics.json"));
  }
  CHECK_FALSE(fs::exists(out / "7"));

  SUBCASE("honest simulated records pass detect-fraud clean") {
    const fs::path flagged = g_work / "sweep_flagged.json";
    spit(g_work / "sweep_totems.json", R"({"totems":[{"id":"T-0001","x":0,"y":0}]})");
    CHECK(run_cli("detect-fraud --records " + (out / "3" / "records.jsonl").string() +
                      " --totems " + (g_work / "sweep_totems.json").string() +
                      " --v-max 42 --slot-len 60 --out " + flagged.string(),
                  g_work / "sweep_fraud.log") == 0);
    CHECK(json::parse(slurp(flagged))["flagged"].empty());
  }
}

TEST_CASE("simulate rejects malformed configs naming the field") {
  const fs::path cfg = g_work / "bad.json";
  spit(cfg, R"({"seed": 1, "mode": "centralized", "duration_s": 60,
                "totems": [{"id":"T","x":0,"y":0,"radio_range_m":50}]})");
  const fs::path log = g_work / "bad.log";
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + (g_work / "badout").string(),
                log) == 2);
  CHECK(slurp(log).find("devices") != std::string::npos);

  spit(cfg, "{ not json");
  CHECK(run_cli("simulate --config " + cfg.string() + " --out " + (g_work / "badout2").string(),
                log) == 2);
}

TEST_CASE("reconcile matches the checked-in brute-force oracle fixture") {
  const fs::path fixtures = fs::path(IOTRACE_TESTS_DIR) / "fixtures";
  const fs::path out = g_work / "published.json";
  CHECK(run_cli("reconcile --records " + (fixtures / "reconcile_records.jsonl").string() +
                    " --positives " + (fixtures / "reconcile_positives.json").string() +
                    " --epsilon 1 --seed 9 --out " + out.string(),
                g_work / "rec.log") == 0);

  std::set<std::string> expected;
  {
    std::ifstream f(fixtures / "reconcile_expected_beacons.txt");
    std::string line;
    while (std::getline(f, line)) {
      if (!line.empty()) expected.insert(line);
    }
  }
  CHECK(published_set(out) == expected);

  SUBCASE("duplicate records do not change the output bytes") {
    const std::string doubled =
        slurp(fixtures / "reconcile_records.jsonl") + slurp(fixtures / "reconcile_records.jsonl");
    const fs::path dup = g_work / "dup.jsonl";
    spit(dup, doubled);
    const fs::path out2 = g_work / "published_dup.json";
    CHECK(run_cli("reconcile --records " + dup.string() + " --positives " +
                      (fixtures / "reconcile_positives.json").string() +
                      " --epsilon 1 --seed 9 --out " + out2.string(),
                  g_work / "rec2.log") == 0);
    CHECK(slurp(out2) == slurp(out));
  }

  SUBCASE("empty records publish exactly the positives") {
    const fs::path none = g_work / "none.jsonl";
    spit(none, "");
    const fs::path out3 = g_work / "published_none.json";
    CHECK(run_cli("reconcile --records " + none.string() + " --positives " +
                      (fixtures / "reconcile_positives.json").string() +
                      " --epsilon 1 --seed 9 --out " + out3.string(),
                  g_work / "rec3.log") == 0);
    CHECK(published_set(out3) == std::set<std::string>{std::string(32, 'a')});
  }

  SUBCASE("a malformed JSONL line reports its line number") {
    const fs::path broken = g_work / "broken.jsonl";
    spit(broken, "{\"totem\":\"T\",\"slot\":1,\"beacon\":\"" + std::string(32, 'a') +
                     "\"}\nnot json\n");
    const fs::path log = g_work / "rec4.log";
    CHECK(run_cli("reconcile --records " + broken.string() + " --positives " +
                      (fixtures / "reconcile_positives.json").string() + " --out " +
                      (g_work / "x.json").string(),
                  log) == 2);
    CHECK(slurp(log).find("line 2") != std::string::npos);
  }
}

TEST_CASE("detect-fraud flags the replayed beacon and validates totems") {
  const std::string hot = std::string(32, 'a');
  const std::string cold = std::string(32, 'b');
  const fs::path records = g_work / "fraud_records.jsonl";
  spit(records, "{\"totem\":\"T-A\",\"slot\":5,\"beacon\":\"" + hot + "\"}\n" +
                    "{\"totem\":\"T-B\",\"slot\":5,\"beacon\":\"" + hot + "\"}\n" +
                    "{\"totem\":\"T-A\",\"slot\":5,\"beacon\":\"" + cold + "\"}\n");
  const fs::path totems = g_work / "totems.json";
  spit(totems, R"({"totems":[{"id":"T-A","x":0,"y":0},{"id":"T-B","x":30000,"y":0}]})");

  const fs::path out = g_work / "flagged.json";
  CHECK(run_cli("detect-fraud --records " + records.string() + " --totems " + totems.string() +
                    " --v-max 42 --slot-len 600 --out " + out.string(),
                g_work / "fraud.log") == 0);
  const json j = json::parse(slurp(out));
  REQUIRE(j["flagged"].size() == 1);
  CHECK(j["flagged"][0].get<std::string>() == hot);

  SUBCASE("missing totem position exits 2 naming the totem") {
    spit(totems, R"({"totems":[{"id":"T-A","x":0,"y":0}]})");
    const fs::path log = g_work / "fraud2.log";
    CHECK(run_cli("detect-fraud --records " + records.string() + " --totems " + totems.string() +
                      " --out " + (g_work / "y.json").string(),
                  log) == 2);
    CHECK(slurp(log).find("T-B") != std::string::npos);
  }
}

TEST_CASE("match regenerates and reports like the library") {
  DeviceState dev;
  Rng rng(81);
  rng.fill(dev.key.key.data(), dev.key.key.size());
  dev.slot_len_s = 600;
  dev.risk_threshold_s = 1200;

  PublishedList list;
  list.published_at_s = 3 * 600;
  for (SlotIndex s = 1; s <= 3; ++s) list.beacons.insert(derive_beacon(dev.key, s));

  const fs::path published = g_work / "match_published.json";
  spit(published, publish(list, 3));

  std::string key_hex;
  for (std::uint8_t byte : dev.key.key) {
    static const char* digits = "0123456789abcdef";
    key_hex += digits[byte >> 4];
    key_hex += digits[byte & 0xf];
  }
  const fs::path out = g_work / "match_report.json";
  CHECK(run_cli("match --key " + key_hex + " --published " + published.string() +
                    " --now 1800 --threshold 1200 --slot-len 600 --out " + out.string(),
                g_work / "match.log") == 0);

  const json j = json::parse(slurp(out));
  const ExposureReport expected = match_published(dev, list, 1800);
  CHECK(j["notified"].get<bool>() == expected.notified);
  CHECK(j["exposure_seconds"].get<std::uint64_t>() == expected.exposure_seconds);
  CHECK(j["matched_slots"].size() == expected.matched_slots.size());

  SUBCASE("bad key hex exits 2") {
    CHECK(run_cli("match --key zz --published " + published.string() + " --now 0 --out " +
                      (g_work / "z.json").string(),
                  g_work / "match2.log") == 2);
  }
}

TEST_CASE("attack runs the offline analyses over files") {
  // two co-located published beacons, one captured near the victim
  const std::string b1 = std::string(32, 'a');
  const std::string b2 = std::string(32, 'b');
  const fs::path log_path = g_work / "eaves.jsonl";
  spit(log_path, "{\"payload\":\"" + b1 + "\",\"t\":1.0,\"x\":0.0,\"y\":0.0}\n" +
                     "{\"payload\":\"" + b2 + "\",\"t\":2.0,\"x\":0.0,\"y\":0.0}\n");
  const fs::path published = g_work / "attack_published.json";
  spit(published, "{\"published_at\":600,\"beacons\":[\"" + b1 + "\",\"" + b2 + "\"]}\n");
  const fs::path targets = g_work / "targets.json";
  spit(targets, "{\"targets\":[{\"id\":\"victim\",\"payloads\":[\"" + b1 + "\"]}]}");

  const fs::path out = g_work / "attack_report.json";
  CHECK(run_cli("attack --eavesdrop " + log_path.string() + " --published " + published.string() +
                    " --targets " + targets.string() +
                    " --epsilon 0 --slot-len 600 --radius 10 --seed 4 --out " + out.string(),
                g_work / "attack.log") == 0);
  const json j = json::parse(slurp(out));
  REQUIRE(j["health_inference"].size() == 1);
  CHECK(j["health_inference"][0]["verdict"] == "positive");
  CHECK(j["health_inference"][0]["k"] == 2);
  CHECK(j["health_inference"][0]["confidence"].get<double>() == doctest::Approx(0.5));
  CHECK(j["trajectory"].size() == 1);  // one (location, slot) cluster
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-iotrace-binary>\n");
    return 1;
  }
  g_cli = argv[1];
  g_work = fs::temp_directory_path() / ("iotrace_cli_test_" + std::to_string(::getpid()));
  fs::remove_all(g_work);
  fs::create_directories(g_work);
  doctest::Context context;
  context.applyCommandLine(1, argv);
  const int rc = context.run();
  fs::remove_all(g_work);
  return rc;
}
