#include "iotrace/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <set>

namespace iotrace {

namespace {

std::optional<Beacon> as_beacon(const std::vector<std::uint8_t>& payload) {
  if (payload.size() != 16) return std::nullopt;
  Beacon b;
  std::memcpy(b.bytes.data(), payload.data(), 16);
  return b;
}

std::set<Beacon> published_union(const std::vector<PublishedList>& lists) {
  std::set<Beacon> all;
  for (const PublishedList& l : lists) all.insert(l.beacons.begin(), l.beacons.end());
  return all;
}

}  // namespace

std::vector<TargetInference> infer_health_status(const EavesdropLog& log,
                                                 const std::vector<PublishedList>& lists,
                                                 const std::vector<TargetCapture>& targets,
                                                 double colocate_radius_m,
                                                 std::uint32_t epsilon_slots,
                                                 std::uint32_t slot_len_s, Rng& pinpoint_rng) {
  const std::set<Beacon> published = published_union(lists);
  std::vector<TargetInference> out;
  out.reserve(targets.size());

  for (const TargetCapture& target : targets) {
    TargetInference inf;
    inf.target_id = target.target_id;

    const EavesdropEntry* anchor = nullptr;
    for (const EavesdropEntry& e : target.entries) {
      auto b = as_beacon(e.payload);
      if (b && published.count(*b) > 0) {
        inf.matched = *b;
        anchor = &e;
        break;
      }
    }
    if (anchor == nullptr) {
      out.push_back(std::move(inf));
      continue;
    }

    // Publication cluster around the sighting: co-located, co-timed log
    // entries whose beacons all appear in a list. The positive hides among
    // these k.
    const SlotIndex anchor_slot = slot_of_ms(anchor->t_ms, slot_len_s);
    std::set<Beacon> cluster{*inf.matched};
    for (const EavesdropEntry& e : log.entries) {
      auto b = as_beacon(e.payload);
      if (!b || published.count(*b) == 0) continue;
      const double dist = std::hypot(e.x_m - anchor->x_m, e.y_m - anchor->y_m);
      if (dist > colocate_radius_m) continue;
      const SlotIndex slot = slot_of_ms(e.t_ms, slot_len_s);
      const SlotIndex delta = slot > anchor_slot ? slot - anchor_slot : anchor_slot - slot;
      if (delta > epsilon_slots) continue;
      cluster.insert(*b);
    }

    inf.positive = true;
    inf.cluster_k = cluster.size();
    inf.confidence = 1.0 / static_cast<double>(cluster.size());
    auto it = cluster.begin();
    std::advance(it, static_cast<long>(pinpoint_rng.below(cluster.size())));
    inf.pinpoint = *it;
    out.push_back(std::move(inf));
  }
  return out;
}

std::vector<TrajectoryPoint> recover_trajectory(const EavesdropLog& log,
                                                const std::vector<PublishedList>& lists,
                                                std::uint32_t slot_len_s) {
  const std::set<Beacon> published = published_union(lists);
  std::map<std::tuple<SlotIndex, double, double>, std::set<Beacon>> grouped;
  for (const EavesdropEntry& e : log.entries) {
    auto b = as_beacon(e.payload);
    if (!b || published.count(*b) == 0) continue;
    grouped[{slot_of_ms(e.t_ms, slot_len_s), e.x_m, e.y_m}].insert(*b);
  }
  std::vector<TrajectoryPoint> out;
  out.reserve(grouped.size());
  for (const auto& [key, beacons] : grouped) {
    TrajectoryPoint p;
    p.slot = std::get<0>(key);
    p.x_m = std::get<1>(key);
    p.y_m = std::get<2>(key);
    p.beacons.assign(beacons.begin(), beacons.end());
    out.push_back(std::move(p));
  }
  return out;
}

Transmission replay_inject(const EavesdropEntry& captured) {
  Transmission tx;
  tx.payload = captured.payload;
  return tx;
}

}  // namespace iotrace
