#pragma once

// Video Distribution Manager state: which proxy hosts each pref-1, which
// tracker hosts each pref-2, and the capacity bookkeeping behind both.
//
// Placement runs in descending popularity. A pref-1 lives on at most one
// proxy of its group; pref-1 and pref-2 placements are independent, so a
// video may hold either one alone. Eviction is least-popular-first and
// never removes a prefix with live streams on it.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "catalog.hpp"
#include "topology.hpp"

namespace vodsim {

struct CachedPrefix {
  double minutes = 0;
  double start_min = 0;  // offset of the cached range within the video
  int streaming_refcount = 0;
};

struct NodeCache {
  double capacity_min = 0;
  double used_min = 0;
  std::map<VideoId, CachedPrefix> prefixes;  // ordered for deterministic scans

  double free_min() const { return capacity_min - used_min; }
};

class CacheState {
 public:
  CacheState() = default;
  CacheState(const Topology& topo, double ps_capacity_min, double tr_capacity_min) {
    ps_.resize(static_cast<std::size_t>(topo.j_lpsgs()) * topo.ps_per_lpsg());
    tr_.resize(topo.j_lpsgs());
    for (NodeCache& c : ps_) c.capacity_min = ps_capacity_min;
    for (NodeCache& c : tr_) c.capacity_min = tr_capacity_min;
    m_ = topo.ps_per_lpsg();
  }

  NodeCache& ps_cache(int p, int q) { return ps_.at(static_cast<std::size_t>(p) * m_ + q); }
  const NodeCache& ps_cache(int p, int q) const {
    return ps_.at(static_cast<std::size_t>(p) * m_ + q);
  }
  NodeCache& tr_cache(int p) { return tr_.at(p); }
  const NodeCache& tr_cache(int p) const { return tr_.at(p); }

  NodeCache& node_cache(const NodeId& n) {
    if (n.kind == NodeKind::PS) return ps_cache(n.lpsg, n.ps);
    if (n.kind == NodeKind::TR) return tr_cache(n.lpsg);
    throw std::invalid_argument("cache: node has no cache");
  }
  const NodeCache& node_cache(const NodeId& n) const {
    return const_cast<CacheState*>(this)->node_cache(n);
  }

  bool insert(const NodeId& node, VideoId v, double minutes, double start_min) {
    NodeCache& c = node_cache(node);
    if (c.prefixes.count(v)) throw std::logic_error("cache: prefix already present");
    if (minutes > c.free_min() + 1e-12) return false;
    c.prefixes[v] = CachedPrefix{minutes, start_min, 0};
    c.used_min += minutes;
    return true;
  }

  void erase(const NodeId& node, VideoId v) {
    NodeCache& c = node_cache(node);
    auto it = c.prefixes.find(v);
    if (it == c.prefixes.end()) throw std::logic_error("cache: erasing absent prefix");
    if (it->second.streaming_refcount != 0)
      throw std::logic_error("cache: erasing pinned prefix");
    c.used_min -= it->second.minutes;
    c.prefixes.erase(it);
  }

  void pin(const NodeId& node, VideoId v) {
    auto& p = node_cache(node).prefixes;
    auto it = p.find(v);
    if (it == p.end()) throw std::logic_error("cache: pinning absent prefix");
    ++it->second.streaming_refcount;
  }
  void unpin(const NodeId& node, VideoId v) {
    auto& p = node_cache(node).prefixes;
    auto it = p.find(v);
    if (it == p.end() || it->second.streaming_refcount <= 0)
      throw std::logic_error("cache: unbalanced unpin");
    --it->second.streaming_refcount;
  }

  /// used == sum of prefix minutes and used <= capacity, on every node.
  bool consistent() const {
    auto ok = [](const NodeCache& c) {
      double sum = 0;
      for (const auto& [v, pre] : c.prefixes) sum += pre.minutes;
      return std::abs(sum - c.used_min) < 1e-9 && c.used_min <= c.capacity_min + 1e-9;
    };
    for (const NodeCache& c : ps_)
      if (!ok(c)) return false;
    for (const NodeCache& c : tr_)
      if (!ok(c)) return false;
    return true;
  }

 private:
  std::vector<NodeCache> ps_;
  std::vector<NodeCache> tr_;
  int m_ = 1;
};

struct PlanEntry {
  std::optional<int> host_ps_q;  // proxy hosting pref-1, if any
  double w1_min = 0;
  bool tr_cached = false;  // pref-2 present at the group tracker
  double w2_min = 0;
  double w2_start_min = 0;
};

class PrefixPlan {
 public:
  PrefixPlan() = default;
  explicit PrefixPlan(int j_lpsgs) : per_lpsg_(j_lpsgs) {}

  const PlanEntry* entry(int lpsg, VideoId v) const {
    const auto& m = per_lpsg_.at(lpsg);
    auto it = m.find(v);
    return it == m.end() ? nullptr : &it->second;
  }
  PlanEntry& mutable_entry(int lpsg, VideoId v) { return per_lpsg_.at(lpsg)[v]; }

  void drop_ps_side(int lpsg, VideoId v) {
    auto& m = per_lpsg_.at(lpsg);
    auto it = m.find(v);
    if (it == m.end()) return;
    it->second.host_ps_q.reset();
    it->second.w1_min = 0;
    if (!it->second.tr_cached) m.erase(it);
  }
  void drop_tr_side(int lpsg, VideoId v) {
    auto& m = per_lpsg_.at(lpsg);
    auto it = m.find(v);
    if (it == m.end()) return;
    it->second.tr_cached = false;
    it->second.w2_min = 0;
    it->second.w2_start_min = 0;
    if (!it->second.host_ps_q) m.erase(it);
  }

  int lpsg_count() const { return static_cast<int>(per_lpsg_.size()); }
  const std::unordered_map<VideoId, PlanEntry>& lpsg_entries(int lpsg) const {
    return per_lpsg_.at(lpsg);
  }

 private:
  std::vector<std::unordered_map<VideoId, PlanEntry>> per_lpsg_;
};

/// Tracker database lookup: the proxy in `lpsg` hosting the video's pref-1.
inline std::optional<NodeId> lookup_pref1(const PrefixPlan& plan, int lpsg, VideoId v) {
  const PlanEntry* e = plan.entry(lpsg, v);
  if (e == nullptr || !e->host_ps_q) return std::nullopt;
  return NodeId::proxy(lpsg, *e->host_ps_q);
}

namespace detail {
/// Catalog ids ordered by descending popularity; ties resolve to the lower
/// id (the better Zipf rank).
inline std::vector<VideoId> popularity_order(const Catalog& catalog,
                                             const PopularityEstimate& est) {
  std::vector<VideoId> ids;
  ids.reserve(catalog.size());
  for (const Video& v : catalog.videos()) ids.push_back(v.id);
  std::stable_sort(ids.begin(), ids.end(), [&](VideoId a, VideoId b) {
    const double xa = est.x_of(a), xb = est.x_of(b);
    if (xa != xb) return xa > xb;
    return a < b;
  });
  return ids;
}
}  // namespace detail

/// Distribution-time placement: walk videos in descending popularity; put
/// pref-1 on the group proxy with the most free space (ties to the lowest
/// index) and pref-2 on the tracker, skipping whatever does not fit.
inline PrefixPlan distribute_videos(const Catalog& catalog, const PopularityEstimate& est,
                                    const Topology& topo, CacheState& cache,
                                    double x_scale = 1.0) {
  PrefixPlan plan(topo.j_lpsgs());
  const std::vector<VideoId> order = detail::popularity_order(catalog, est);
  for (int p = 0; p < topo.j_lpsgs(); ++p) {
    for (VideoId id : order) {
      const Video& video = catalog.by_id(id);
      const double x = scaled_x(est.x_of(id), x_scale, est.bounds().x_max);
      const PrefixSizes w = prefix_sizes(x, video.duration_min);
      int best_q = -1;
      double best_free = -1;
      for (int q = 0; q < topo.ps_per_lpsg(); ++q) {
        const double free = cache.ps_cache(p, q).free_min();
        if (free + 1e-12 >= w.w1_min && free > best_free + 1e-12) {
          best_free = free;
          best_q = q;
        }
      }
      if (best_q >= 0 && cache.insert(NodeId::proxy(p, best_q), id, w.w1_min, 0.0)) {
        PlanEntry& e = plan.mutable_entry(p, id);
        e.host_ps_q = best_q;
        e.w1_min = w.w1_min;
      }
      if (cache.tr_cache(p).free_min() + 1e-12 >= w.w2_min &&
          cache.insert(NodeId::tr(p), id, w.w2_min, w.w1_min)) {
        PlanEntry& e = plan.mutable_entry(p, id);
        e.tr_cached = true;
        e.w2_min = w.w2_min;
        e.w2_start_min = w.w1_min;
      }
    }
  }
  return plan;
}

/// Free at least `needed_min` on one node by evicting unpinned prefixes in
/// ascending popularity (ties evict the higher id first). Returns the
/// evicted ids, or nullopt -- with the cache untouched -- when even a full
/// sweep cannot free enough.
inline std::optional<std::vector<VideoId>> make_room(CacheState& cache, const NodeId& node,
                                                     double needed_min,
                                                     const PopularityEstimate& est) {
  if (needed_min < 0) throw std::invalid_argument("make_room: needed_min must be >= 0");
  NodeCache& c = cache.node_cache(node);
  if (c.free_min() + 1e-12 >= needed_min) return std::vector<VideoId>{};

  std::vector<VideoId> candidates;
  for (const auto& [v, pre] : c.prefixes)
    if (pre.streaming_refcount == 0) candidates.push_back(v);
  std::stable_sort(candidates.begin(), candidates.end(), [&](VideoId a, VideoId b) {
    const double xa = est.x_of(a), xb = est.x_of(b);
    if (xa != xb) return xa < xb;
    return a > b;
  });

  std::vector<VideoId> evict;
  double freed = c.free_min();
  for (VideoId v : candidates) {
    if (freed + 1e-12 >= needed_min) break;
    freed += c.prefixes.at(v).minutes;
    evict.push_back(v);
  }
  if (freed + 1e-12 < needed_min) return std::nullopt;
  for (VideoId v : evict) cache.erase(node, v);
  return evict;
}

struct CacheMissResult {
  bool w1_cached = false;
  bool w2_cached = false;
  std::vector<VideoId> evicted_ps;
  std::vector<VideoId> evicted_tr;
};

/// On-demand caching after an MMS fetch: pref-1 goes to the requesting
/// client's parent proxy, pref-2 to the group tracker, evicting as needed.
/// Partial success is fine; a fully failed attempt changes nothing.
inline CacheMissResult cache_on_miss(PrefixPlan& plan, CacheState& cache, const Video& video,
                                     double x, const NodeId& parent_ps,
                                     const PopularityEstimate& est) {
  if (parent_ps.kind != NodeKind::PS)
    throw std::invalid_argument("cache_on_miss: parent_ps must be a proxy");
  const int lpsg = parent_ps.lpsg;
  const PlanEntry* existing = plan.entry(lpsg, video.id);
  if (existing != nullptr && existing->host_ps_q)
    throw std::logic_error("cache_on_miss: video already cached in this group");

  const PrefixSizes w = prefix_sizes(x, video.duration_min);
  CacheMissResult result;

  if (auto evicted = make_room(cache, parent_ps, w.w1_min, est)) {
    for (VideoId v : *evicted) plan.drop_ps_side(lpsg, v);
    result.evicted_ps = std::move(*evicted);
    if (cache.insert(parent_ps, video.id, w.w1_min, 0.0)) {
      PlanEntry& e = plan.mutable_entry(lpsg, video.id);
      e.host_ps_q = parent_ps.ps;
      e.w1_min = w.w1_min;
      result.w1_cached = true;
    }
  }

  const NodeId tr = NodeId::tr(lpsg);
  const bool tr_has = existing != nullptr && existing->tr_cached;
  if (!tr_has) {
    if (auto evicted = make_room(cache, tr, w.w2_min, est)) {
      for (VideoId v : *evicted) plan.drop_tr_side(lpsg, v);
      result.evicted_tr = std::move(*evicted);
      if (cache.insert(tr, video.id, w.w2_min, w.w1_min)) {
        PlanEntry& e = plan.mutable_entry(lpsg, video.id);
        e.tr_cached = true;
        e.w2_min = w.w2_min;
        e.w2_start_min = w.w1_min;
        result.w2_cached = true;
      }
    }
  }
  return result;
}

}  // namespace vodsim
