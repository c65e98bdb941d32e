#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "iotrace/metrics.hpp"
#include "scenarios.hpp"

using namespace iotrace;
using iotrace::testing::pinned_scenario;

TEST_CASE("k profile: a lone positive at an empty totem scores k = 1") {
  const SimOutput out = run(pinned_scenario(71, 1, 3));
  const KAnonymityProfile profile = k_anonymity_profile(out);
  REQUIRE_FALSE(profile.histogram.empty());
  CHECK(profile.histogram.size() == 1);
  CHECK(profile.histogram.begin()->first == 1);
  CHECK(profile.min_k == 1);
  CHECK(profile.median_k == 1.0);
}

TEST_CASE("k profile: five co-present devices score k = 5 per sighting") {
  const SimOutput out = run(pinned_scenario(72, 5, 3));
  const KAnonymityProfile profile = k_anonymity_profile(out);
  REQUIRE_FALSE(profile.histogram.empty());
  // ground truth: 5 devices present in every window slot
  for (const auto& [k, count] : profile.histogram) CHECK(k == 5);
  CHECK(profile.min_k == 5);
  CHECK(profile.median_k == 5.0);
}

TEST_CASE("k profile: no publications, empty histogram") {
  SimConfig c = pinned_scenario(73, 3, 3);
  c.infections.clear();
  const SimOutput out = run(c);
  const KAnonymityProfile profile = k_anonymity_profile(out);
  CHECK(profile.histogram.empty());
  CHECK(profile.min_k == 0);
}

TEST_CASE("notification accuracy on a perfect-coverage scenario is 1/1") {
  const SimOutput out = run(pinned_scenario(74, 4, 4, 60, 1, 120));
  const NotificationAccuracy acc = notification_accuracy(out);
  REQUIRE(acc.precision);
  REQUIRE(acc.recall);
  CHECK(*acc.precision == 1.0);
  CHECK(*acc.recall == 1.0);
  CHECK(acc.coverage_missed == 0);
}

TEST_CASE("notification accuracy reports nulls with no diagnoses") {
  SimConfig c = pinned_scenario(75, 3, 3);
  c.infections.clear();
  const SimOutput out = run(c);
  const NotificationAccuracy acc = notification_accuracy(out);
  CHECK_FALSE(acc.precision);
  CHECK_FALSE(acc.recall);
}

TEST_CASE("replay attack without the filter drops precision below 1") {
  const SimOutput out = run(iotrace::testing::replay_scenario(76, 3, false));
  const NotificationAccuracy acc = notification_accuracy(out);
  REQUIRE(acc.precision);
  CHECK(*acc.precision < 1.0);
}

TEST_CASE("meetings away from every totem are counted as coverage misses") {
  SimConfig c = pinned_scenario(77, 2, 4, 60, 1, 120);
  // move both devices to a bare meeting place instead of the totem
  c.places.push_back(PlaceSpec{"yard", 5000.0, 5000.0});
  c.devices.transition = {{1.0, 0.0}, {0.0, 1.0}};
  c.devices.initial_zone = {1, 1};
  const SimOutput out = run(c);
  REQUIRE(out.publications.size() == 1);
  // nothing recorded, nobody notified, but the co-dwell is a missed contact
  CHECK(out.records.empty());
  const NotificationAccuracy acc = notification_accuracy(out);
  CHECK(acc.coverage_missed >= 1);
  for (const auto& [d, report] : out.reports) {
    if (d != 0) CHECK_FALSE(report.notified);
  }
}

TEST_CASE("cost model reproduces the transmit-only formulas") {
  CostModelParams p;  // nRF51822-class defaults

  SUBCASE("tx bytes per minute is f * 16 = 1920 at 500 ms intervals") {
    const CostReport r = cost_report(p, 60.0, false);
    CHECK(r.tx_bytes_per_min == 1920.0);
    CHECK(r.contact_storage_B == 0.0);
    CHECK(r.crypto_ms_per_day == 23.3652);
  }

  SUBCASE("transmit-only vs 50% duty scanning is a >100x energy gap") {
    const CostReport off = cost_report(p, 60.0, false);
    const CostReport on = cost_report(p, 60.0, true);
    CHECK(off.rf_energy_mJ_per_min == doctest::Approx(3.2760).epsilon(0.01));
    CHECK(on.rf_energy_mJ_per_min > 1000.0);  // scan-dominated, order of 1.2e3
    CHECK(off.rf_energy_mJ_per_min / on.rf_energy_mJ_per_min < 1.0 / 100.0);
  }

  SUBCASE("doubling beacon frequency doubles TX rates exactly") {
    CostModelParams fast = p;
    fast.beacon_interval_s = p.beacon_interval_s / 2.0;
    const CostReport base = cost_report(p, 60.0, false);
    const CostReport doubled = cost_report(fast, 60.0, false);
    CHECK(doubled.tx_bytes_per_min == 2.0 * base.tx_bytes_per_min);
    CHECK(doubled.rf_energy_mJ_per_min == doctest::Approx(2.0 * base.rf_energy_mJ_per_min));
  }

  SUBCASE("baseline protocols pay n * entry_size storage") {
    CostModelParams baseline = p;
    baseline.contact_entry_size_B = 24.0;  // DP-3T-style entries
    baseline.contact_list_n = 1000;
    const CostReport r = cost_report(baseline, 60.0, true);
    CHECK(r.contact_storage_B == 24'000.0);
  }
}

TEST_CASE("adversary pinpoint rate tracks 1/k on controlled clusters") {
  // small version of the acceptance batch: k = 4, 300 seeded runs
  const std::uint32_t k = 4;
  const int n_runs = 300;
  int hits = 0;
  for (int i = 0; i < n_runs; ++i) {
    const SimOutput out = run(pinned_scenario(1000 + i, k, 3));
    REQUIRE(out.inferences.size() == 1);
    const TargetInference& inf = out.inferences[0];
    REQUIRE(inf.positive);
    REQUIRE(inf.cluster_k == k);
    REQUIRE(inf.pinpoint);
    REQUIRE(inf.matched);
    if (*inf.pinpoint == *inf.matched) ++hits;
  }
  const double rate = static_cast<double>(hits) / n_runs;
  const double expected = 1.0 / k;
  const double se = std::sqrt(expected * (1 - expected) / n_runs);
  CHECK(std::abs(rate - expected) <= 3 * se);
}
