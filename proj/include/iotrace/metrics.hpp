#pragma once

// Evaluative quantities: k-anonymity profile, notification accuracy against
// ground truth, and the analytical radio/storage/crypto cost model.

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "iotrace/sim.hpp"

namespace iotrace {

struct CostModelParams {
  double tx_power_mw = 31.5;
  double tx_time_per_beacon_s = 0.0008667;
  double rx_power_mw = 39.9;
  double scan_duty_cycle = 0.5;
  double beacon_interval_s = 0.5;
  std::uint32_t beacon_size_B = 16;
  double crypto_ms_per_day = 23.3652;
  // Baseline protocols store n contact entries of this size; 0 = transmit-only.
  double contact_entry_size_B = 0.0;
  std::uint64_t contact_list_n = 0;
};

CostModelParams cost_params_from(const EnergySpec& e);

struct CostReport {
  double rf_energy_mJ_per_min = 0.0;
  double tx_bytes_per_min = 0.0;
  double contact_storage_B = 0.0;
  double crypto_ms_per_day = 0.0;
};

CostReport cost_report(const CostModelParams& params, double duration_s, bool scan_enabled);

struct KAnonymityProfile {
  std::map<std::uint64_t, std::uint64_t> histogram;  // k -> sighting count
  std::uint64_t min_k = 0;
  double median_k = 0.0;
};

// For each positive sighting (totem, tau): k = distinct beacons published from
// that totem's [tau - eps, tau + eps] window, the positive included.
KAnonymityProfile k_anonymity_profile(const SimOutput& output);

struct NotificationAccuracy {
  std::optional<double> precision;  // null when nothing was notified
  std::optional<double> recall;     // null when there are no true contacts
  std::uint64_t coverage_missed = 0;  // physical contacts outside all totem ranges
};

NotificationAccuracy notification_accuracy(const SimOutput& output);

}  // namespace iotrace
