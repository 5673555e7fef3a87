#pragma once

// Concurrent-stream bookkeeping. A reservation claims one stream slot on
// every hop of a path over a half-open interval of simulated minutes.
// Reservations are admission-time claims on future intervals; feasibility
// means the overlap count stays within the hop capacity at every instant.
//
// A hop is keyed by link class plus the constrained endpoint:
//   PS-CLIENT      -> the proxy (its aggregate upload to its clients)
//   CLIENT-CLIENT  -> the parent client (its upload slots)
//   TR-PS          -> the tracker (the group backbone)
//   PS-PS          -> the serving proxy
//   TR-TR          -> the serving (remote) tracker
//   MMS-TR         -> the tracker, i.e. the group's WAN pipe; since the MMS
//                     is unique this coincides with the node pair.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "topology.hpp"

namespace vodsim {

struct Hop {
  LinkClass cls = LinkClass::PS_CLIENT;
  int anchor = 0;

  friend bool operator==(const Hop&, const Hop&) = default;
};

using ReservationId = std::size_t;

struct Reservation {
  std::vector<Hop> path;
  double begin = 0;
  double end = 0;  // shrinks on truncation; begin == end means fully released

  bool empty() const { return !(end > begin); }
};

class BandwidthLedger {
 public:
  BandwidthLedger() = default;
  explicit BandwidthLedger(const Topology& topo) : links_(topo.links()) {}

  int capacity(LinkClass c) const { return links_.at(c).capacity; }

  bool can_reserve(std::span<const Hop> path, double begin, double end) const {
    if (!(end > begin)) return true;  // zero-length claims are no-ops
    for (const Hop& hop : path) {
      if (peak_overlap(hop, begin, end) + 1 > capacity(hop.cls)) return false;
    }
    return true;
  }

  std::optional<ReservationId> reserve(std::span<const Hop> path, double begin, double end) {
    if (!can_reserve(path, begin, end)) return std::nullopt;
    ReservationId id = records_.size();
    records_.push_back(Reservation{{path.begin(), path.end()}, begin, std::max(begin, end)});
    for (const Hop& hop : path) by_hop_[key(hop)].push_back(id);
    return id;
  }

  /// Cancel the unused tail of a reservation; usage before `at` remains
  /// on the books as historical load.
  void truncate(ReservationId id, double at) {
    Reservation& r = record(id);
    r.end = std::min(r.end, std::max(r.begin, at));
  }

  void release(ReservationId id) {
    Reservation& r = record(id);
    r.end = r.begin;
  }

  const Reservation& at(ReservationId id) const {
    if (id >= records_.size()) throw std::invalid_argument("ledger: bad reservation id");
    return records_[id];
  }
  std::size_t size() const { return records_.size(); }

  /// Peak concurrent reservations on one hop across all time. Used by the
  /// post-run audit: peak must never exceed the class capacity.
  int audit_peak(const Hop& hop) const {
    return peak_overlap(hop, -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity());
  }

  std::vector<Hop> known_hops() const {
    std::vector<Hop> hops;
    hops.reserve(by_hop_.size());
    for (const auto& [k, ids] : by_hop_) hops.push_back(unkey(k));
    return hops;
  }

 private:
  static std::int64_t key(const Hop& h) {
    return static_cast<std::int64_t>(static_cast<int>(h.cls)) * (1LL << 32) + h.anchor;
  }
  static Hop unkey(std::int64_t k) {
    return Hop{static_cast<LinkClass>(k >> 32), static_cast<int>(k & 0xffffffff)};
  }

  Reservation& record(ReservationId id) {
    if (id >= records_.size()) throw std::invalid_argument("ledger: bad reservation id");
    return records_[id];
  }

  /// Max number of existing reservations simultaneously active at some
  /// instant within [begin, end).
  int peak_overlap(const Hop& hop, double begin, double end) const {
    auto it = by_hop_.find(key(hop));
    if (it == by_hop_.end()) return 0;
    // Sweep over interval endpoints clipped to the probe window.
    std::vector<std::pair<double, int>> steps;  // (+1 at start, -1 at end)
    int base = 0;
    for (ReservationId id : it->second) {
      const Reservation& r = records_[id];
      if (r.empty()) continue;
      const double s = r.begin, e = r.end;
      if (e <= begin || s >= end) continue;
      if (s <= begin)
        ++base;
      else
        steps.emplace_back(s, +1);
      if (e < end) steps.emplace_back(e, -1);
    }
    std::sort(steps.begin(), steps.end());
    int best = base, cur = base;
    for (std::size_t i = 0; i < steps.size();) {
      std::size_t j = i;
      // apply all steps at the same instant together (ends before starts
      // do not matter for half-open intervals: at time t an interval
      // ending at t is inactive, one starting at t is active)
      double t = steps[i].first;
      int delta = 0;
      while (j < steps.size() && steps[j].first == t) delta += steps[j++].second;
      cur += delta;
      best = std::max(best, cur);
      i = j;
    }
    return best;
  }

  LinkTable links_{};
  std::vector<Reservation> records_;
  std::unordered_map<std::int64_t, std::vector<ReservationId>> by_hop_;
};

}  // namespace vodsim
