#pragma once

// Client-chaining state: per-video streaming-clients lists (SCL), chain
// admission against the pref-1 threshold, LAC construction, the two
// closing cases and failure recovery.
//
// A chain is a path of clients ordered by arrival; the head is fed by the
// proxy, every other member by its parent client. A member that finishes
// playback while still feeding a child keeps relaying (DRAINING) and
// auto-closes once that child finishes or detaches. DRAINING members count
// toward IS-STREAMING but are never handed out as new parents.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "topology.hpp"

namespace vodsim {

enum class ChainState : uint8_t { STREAMING, DRAINING, CLOSED, FAILED };

inline const char* chain_state_name(ChainState s) {
  switch (s) {
    case ChainState::STREAMING: return "STREAMING";
    case ChainState::DRAINING: return "DRAINING";
    case ChainState::CLOSED: return "CLOSED";
    case ChainState::FAILED: return "FAILED";
  }
  return "?";
}

struct ChainNode {
  NodeId client;
  double arrival_min = 0;
  std::optional<std::size_t> parent;  // empty: fed by the proxy
  std::optional<std::size_t> child;
  ChainState state = ChainState::STREAMING;
  int request_id = -1;  // simulation backref, unused by the chain logic

  bool active() const { return state == ChainState::STREAMING || state == ChainState::DRAINING; }
};

/// One SCL entry: <video id - sz(pref-1) - chain of clients>.
class SclEntry {
 public:
  SclEntry(VideoId video, double sz_pref1_min) : video_(video), sz_pref1_(sz_pref1_min) {}

  VideoId video() const { return video_; }
  double sz_pref1_min() const { return sz_pref1_; }
  const std::vector<ChainNode>& nodes() const { return nodes_; }
  ChainNode& node(std::size_t i) { return nodes_.at(i); }

  bool is_streaming() const {
    for (const ChainNode& n : nodes_)
      if (n.active()) return true;
    return false;
  }

  std::optional<std::size_t> member_index(const NodeId& client) const {
    for (std::size_t i = nodes_.size(); i-- > 0;)
      if (nodes_[i].client == client && nodes_[i].active()) return i;
    return std::nullopt;
  }

  /// Latest-arrival STREAMING member: the only node new clients may attach
  /// to. DRAINING members are on their way out.
  std::optional<std::size_t> last_streaming() const {
    for (std::size_t i = nodes_.size(); i-- > 0;)
      if (nodes_[i].state == ChainState::STREAMING) return i;
    return std::nullopt;
  }

  std::vector<NodeId> active_clients() const {
    std::vector<NodeId> out;
    for (const ChainNode& n : nodes_)
      if (n.active()) out.push_back(n.client);
    return out;
  }

  std::size_t append(const NodeId& client, double arrival_min,
                     std::optional<std::size_t> parent, int request_id) {
    if (!nodes_.empty() && arrival_min < nodes_.back().arrival_min)
      throw std::invalid_argument("scl: arrivals must be non-decreasing");
    ChainNode n;
    n.client = client;
    n.arrival_min = arrival_min;
    n.parent = parent;
    n.request_id = request_id;
    nodes_.push_back(n);
    const std::size_t idx = nodes_.size() - 1;
    if (parent) {
      ChainNode& p = nodes_.at(*parent);
      if (p.child)
        throw std::logic_error("scl: attaching to a parent that already has a child");
      p.child = idx;
    }
    return idx;
  }

  /// Structural invariants: links are mutual, parents precede children in
  /// both index and arrival order, and no client appears twice among the
  /// active nodes.
  void validate() const {
    std::vector<int> child_of(nodes_.size(), -1);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const ChainNode& n = nodes_[i];
      if (n.parent) {
        if (*n.parent >= i) throw std::logic_error("scl: parent must precede child");
        if (n.active() && nodes_[*n.parent].arrival_min > n.arrival_min)
          throw std::logic_error("scl: arrival order violated");
      }
      if (n.child) {
        if (*n.child <= i) throw std::logic_error("scl: child must follow parent");
        if (child_of[*n.child] != -1) throw std::logic_error("scl: node has two parents");
        child_of[*n.child] = static_cast<int>(i);
        if (!(nodes_[*n.child].parent && *nodes_[*n.child].parent == i))
          throw std::logic_error("scl: parent/child links disagree");
      }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (!nodes_[i].active()) continue;
      for (std::size_t j = i + 1; j < nodes_.size(); ++j)
        if (nodes_[j].active() && nodes_[j].client == nodes_[i].client)
          throw std::logic_error("scl: client active twice in one chain");
    }
  }

 private:
  VideoId video_;
  double sz_pref1_;
  std::vector<ChainNode> nodes_;
};

struct Lac {
  std::vector<NodeId> members;  // candidate parents, designated parent last
};

/// The last min(d, streaming-count) attachable members, order preserved.
inline Lac build_lac(const SclEntry& entry, int d) {
  Lac lac;
  if (d <= 0) return lac;
  std::vector<NodeId> streaming;
  for (const ChainNode& n : entry.nodes())
    if (n.state == ChainState::STREAMING) streaming.push_back(n.client);
  const std::size_t take = std::min<std::size_t>(d, streaming.size());
  lac.members.assign(streaming.end() - take, streaming.end());
  return lac;
}

/// Non-mutating admission probe: the index of the parent a new client would
/// attach to, or nullopt when the chain cannot take it (not streaming, the
/// arrival gap exceeds the pref-1 threshold, or the client is already in).
inline std::optional<std::size_t> can_join(const SclEntry& entry, const NodeId& client,
                                           double now_min) {
  if (entry.member_index(client)) return std::nullopt;
  const std::optional<std::size_t> last = entry.last_streaming();
  if (!last) return std::nullopt;
  if (now_min - entry.nodes()[*last].arrival_min > entry.sz_pref1_min()) return std::nullopt;
  return last;
}

struct AdmitResult {
  enum class Kind { JOIN, NEW_STREAM } kind = Kind::NEW_STREAM;
  NodeId parent;     // JOIN only
  Lac lac;           // JOIN only; built before the newcomer is appended
  std::size_t node_index = 0;
};

/// Admission: join the existing chain when the gap to the most recent
/// streaming member is within sz(pref-1), else tell the caller to start a
/// fresh stream (and a fresh entry).
inline AdmitResult try_admit(SclEntry& entry, const NodeId& client, double now_min, int d,
                             int request_id = -1) {
  if (entry.member_index(client))
    throw std::invalid_argument("try_admit: client already in this chain");
  for (const ChainNode& n : entry.nodes())
    if (n.arrival_min > now_min)
      throw std::invalid_argument("try_admit: now precedes a chain arrival");
  const std::optional<std::size_t> parent = can_join(entry, client, now_min);
  if (!parent) return AdmitResult{};
  AdmitResult res;
  res.kind = AdmitResult::Kind::JOIN;
  res.parent = entry.nodes()[*parent].client;
  res.lac = build_lac(entry, d);
  res.node_index = entry.append(client, now_min, parent, request_id);
  return res;
}

namespace detail {
/// Close one node, detach it from its parent and cascade: a DRAINING parent
/// whose child just went away has nothing left to feed.
inline void close_and_cascade(SclEntry& entry, std::size_t idx, ChainState final_state,
                              std::vector<NodeId>& newly_closed) {
  auto& nodes = const_cast<std::vector<ChainNode>&>(entry.nodes());
  nodes.at(idx).state = final_state;
  newly_closed.push_back(nodes[idx].client);
  std::optional<std::size_t> p = nodes[idx].parent;
  nodes[idx].parent.reset();
  while (p) {
    ChainNode& parent = nodes.at(*p);
    if (parent.child && *parent.child == idx) parent.child.reset();
    if (parent.state != ChainState::DRAINING) break;
    parent.state = ChainState::CLOSED;
    newly_closed.push_back(parent.client);
    idx = *p;
    p = parent.parent;
    parent.parent.reset();
  }
}
}  // namespace detail

struct CloseResult {
  bool draining = false;               // kept alive to finish feeding a child
  std::vector<NodeId> newly_closed;    // this client plus any cascade
};

/// Case 1: playback finished. Keep relaying while a child is still fed,
/// otherwise close and let any DRAINING ancestors follow.
inline CloseResult close_finished(SclEntry& entry, const NodeId& client) {
  const std::optional<std::size_t> idx = entry.member_index(client);
  if (!idx) throw std::invalid_argument("close_finished: client not in chain");
  ChainNode& n = entry.node(*idx);
  if (n.state != ChainState::STREAMING)
    throw std::invalid_argument("close_finished: client not streaming");
  CloseResult res;
  const bool child_active = n.child && entry.nodes()[*n.child].active();
  if (child_active) {
    n.state = ChainState::DRAINING;
    res.draining = true;
    return res;
  }
  n.child.reset();
  detail::close_and_cascade(entry, *idx, ChainState::CLOSED, res.newly_closed);
  return res;
}

enum class EarlyCloseKind { CLOSED_ONLY, SPLICED, RESTREAM };

struct EarlyCloseResult {
  EarlyCloseKind kind = EarlyCloseKind::CLOSED_ONLY;
  std::optional<NodeId> child;       // present for SPLICED and RESTREAM
  std::optional<NodeId> new_parent;  // SPLICED: the leaver's parent client
  std::vector<NodeId> newly_closed;
};

/// Case 2: mid-stream departure. When the child's and the grandparent's
/// arrivals are within sz(pref-1), splice the chain around the leaver;
/// otherwise (or when the leaver was the head) the proxy must restream the
/// child from its current offset.
inline EarlyCloseResult close_early(SclEntry& entry, const NodeId& client) {
  const std::optional<std::size_t> idx = entry.member_index(client);
  if (!idx) throw std::invalid_argument("close_early: client not in chain");
  auto& nodes = const_cast<std::vector<ChainNode>&>(entry.nodes());
  ChainNode& n = nodes.at(*idx);
  if (n.state != ChainState::STREAMING)
    throw std::invalid_argument("close_early: client not streaming");

  EarlyCloseResult res;
  const bool child_active = n.child && nodes[*n.child].active();
  if (!child_active) {
    n.child.reset();
    detail::close_and_cascade(entry, *idx, ChainState::CLOSED, res.newly_closed);
    return res;
  }

  const std::size_t child_idx = *n.child;
  res.child = nodes[child_idx].client;
  if (n.parent) {
    const std::size_t gp = *n.parent;
    const double gap = std::abs(nodes[child_idx].arrival_min - nodes[gp].arrival_min);
    if (gap <= entry.sz_pref1_min()) {
      res.kind = EarlyCloseKind::SPLICED;
      res.new_parent = nodes[gp].client;
      nodes[gp].child = child_idx;
      nodes[child_idx].parent = gp;
      n.parent.reset();
      n.child.reset();
      n.state = ChainState::CLOSED;
      res.newly_closed.push_back(client);
      return res;
    }
  }
  // Head departure or gap too wide: the child falls back to the proxy.
  res.kind = EarlyCloseKind::RESTREAM;
  nodes[child_idx].parent.reset();
  n.child.reset();
  detail::close_and_cascade(entry, *idx, ChainState::CLOSED, res.newly_closed);
  return res;
}

struct RecoveryRecord {
  NodeId failed;
  std::optional<NodeId> child;             // the member that detected the failure
  std::optional<NodeId> new_parent;        // empty: the proxy takes over
  std::vector<NodeId> newly_closed;
  double detect_time_min = 0;
};

/// Failure recovery: at detection (g seconds after the failure) the failed
/// member's child re-attaches to the failed member's parent -- or to the
/// proxy when the head failed -- and the SCL drops the failed member.
/// Descendants below the child are untouched.
inline RecoveryRecord detect_and_recover_failure(SclEntry& entry, const NodeId& failed,
                                                 double now_min, double g_sec) {
  const std::optional<std::size_t> idx = entry.member_index(failed);
  if (!idx) throw std::invalid_argument("detect_and_recover_failure: client not in chain");
  auto& nodes = const_cast<std::vector<ChainNode>&>(entry.nodes());
  ChainNode& n = nodes.at(*idx);

  RecoveryRecord rec;
  rec.failed = failed;
  rec.detect_time_min = now_min;
  (void)g_sec;  // detection latency is charged by the caller's scheduler

  const bool child_active = n.child && nodes[*n.child].active();
  if (!child_active) {
    n.child.reset();
    detail::close_and_cascade(entry, *idx, ChainState::FAILED, rec.newly_closed);
    rec.newly_closed.erase(rec.newly_closed.begin());  // the failed node itself
    return rec;
  }

  const std::size_t child_idx = *n.child;
  rec.child = nodes[child_idx].client;
  if (n.parent) {
    const std::size_t gp = *n.parent;
    nodes[gp].child = child_idx;
    nodes[child_idx].parent = gp;
    rec.new_parent = nodes[gp].client;
    n.parent.reset();
  } else {
    nodes[child_idx].parent.reset();
  }
  n.child.reset();
  n.state = ChainState::FAILED;
  return rec;
}

/// Per-group SCL registry. A video accumulates entry generations: admission
/// always targets the newest one; older generations drain out on their own.
class SclRegistry {
 public:
  SclRegistry() = default;
  explicit SclRegistry(int j_lpsgs) : per_lpsg_(j_lpsgs) {}

  SclEntry* newest(int lpsg, VideoId v) {
    auto& m = per_lpsg_.at(lpsg);
    auto it = m.find(v);
    if (it == m.end() || it->second.empty()) return nullptr;
    return it->second.back().get();
  }
  const SclEntry* newest(int lpsg, VideoId v) const {
    return const_cast<SclRegistry*>(this)->newest(lpsg, v);
  }

  SclEntry& create(int lpsg, VideoId v, double sz_pref1_min) {
    auto& gens = per_lpsg_.at(lpsg)[v];
    gens.push_back(std::make_unique<SclEntry>(v, sz_pref1_min));
    return *gens.back();
  }

  template <typename Fn>
  void for_each_entry(Fn&& fn) const {
    for (const auto& m : per_lpsg_)
      for (const auto& [v, gens] : m)
        for (const auto& e : gens) fn(*e);
  }

 private:
  std::vector<std::unordered_map<VideoId, std::vector<std::unique_ptr<SclEntry>>>> per_lpsg_;
};

}  // namespace vodsim
