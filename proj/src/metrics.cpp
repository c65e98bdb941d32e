#include "iotrace/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace iotrace {

CostModelParams cost_params_from(const EnergySpec& e) {
  CostModelParams p;
  p.tx_power_mw = e.tx_power_mw;
  p.tx_time_per_beacon_s = e.tx_time_per_beacon_s;
  p.rx_power_mw = e.rx_power_mw;
  p.scan_duty_cycle = e.scan_duty_cycle;
  p.beacon_interval_s = e.beacon_interval_s;
  p.beacon_size_B = e.beacon_size_B;
  p.crypto_ms_per_day = e.crypto_ms_per_day;
  return p;
}

CostReport cost_report(const CostModelParams& params, double duration_s, bool scan_enabled) {
  (void)duration_s;  // the reported quantities are rates
  const double beacons_per_min = 60.0 / params.beacon_interval_s;
  CostReport r;
  r.rf_energy_mJ_per_min = params.tx_power_mw * params.tx_time_per_beacon_s * beacons_per_min;
  if (scan_enabled) {
    r.rf_energy_mJ_per_min += params.rx_power_mw * params.scan_duty_cycle * 60.0;
  }
  r.tx_bytes_per_min = beacons_per_min * static_cast<double>(params.beacon_size_B);
  r.contact_storage_B =
      static_cast<double>(params.contact_list_n) * params.contact_entry_size_B;
  r.crypto_ms_per_day = params.crypto_ms_per_day;
  return r;
}

KAnonymityProfile k_anonymity_profile(const SimOutput& output) {
  KAnonymityProfile profile;

  // (totem, slot) -> recorded beacons, rebuilt from the record dump so the
  // profile works identically across architectures.
  std::map<std::pair<std::string, SlotIndex>, std::set<Beacon>> by_totem_slot;
  for (const BeaconRecord& r : output.records) {
    by_totem_slot[{r.totem_id, r.slot}].insert(r.beacon);
  }
  const std::uint32_t eps = output.config.epsilon_slots;

  std::vector<std::uint64_t> ks;
  for (const Publication& pub : output.publications) {
    for (const auto& [tau, positive] : pub.disclosure.entries) {
      if (output.fraud_flagged.count(positive) > 0) continue;
      for (const TotemSpec& totem : output.config.totems) {
        auto seed = by_totem_slot.find({totem.id, tau});
        if (seed == by_totem_slot.end() || seed->second.count(positive) == 0) continue;
        // one sighting (totem, tau)
        std::set<Beacon> window{positive};
        const SlotIndex lo = tau >= eps ? tau - eps : 0;
        for (SlotIndex s = lo; s <= tau + eps; ++s) {
          auto it = by_totem_slot.find({totem.id, s});
          if (it == by_totem_slot.end()) continue;
          window.insert(it->second.begin(), it->second.end());
        }
        std::uint64_t k = 0;
        for (const Beacon& b : window) {
          if (pub.list.beacons.count(b) > 0) ++k;
        }
        ++profile.histogram[k];
        ks.push_back(k);
      }
    }
  }
  if (!ks.empty()) {
    std::sort(ks.begin(), ks.end());
    profile.min_k = ks.front();
    const std::size_t n = ks.size();
    profile.median_k = n % 2 == 1
                           ? static_cast<double>(ks[n / 2])
                           : (static_cast<double>(ks[n / 2 - 1]) + static_cast<double>(ks[n / 2])) / 2.0;
  }
  return profile;
}

NotificationAccuracy notification_accuracy(const SimOutput& output) {
  NotificationAccuracy acc;
  std::set<std::uint32_t> notified;
  for (const auto& [device, report] : output.reports) {
    if (report.notified) notified.insert(device);
  }
  const std::set<std::uint32_t>& truth = output.truth.true_contacts;

  std::size_t hits = 0;
  for (std::uint32_t d : notified) {
    if (truth.count(d) > 0) ++hits;
  }
  if (!notified.empty()) {
    acc.precision = static_cast<double>(hits) / static_cast<double>(notified.size());
  }
  if (!truth.empty()) {
    acc.recall = static_cast<double>(hits) / static_cast<double>(truth.size());
  }
  for (std::uint32_t d : output.truth.physical_contacts_of_diagnosed) {
    if (truth.count(d) == 0) ++acc.coverage_missed;
  }
  return acc;
}

}  // namespace iotrace
