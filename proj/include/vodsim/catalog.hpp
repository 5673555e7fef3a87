#pragma once

// Video catalog, Zipf popularity model, sliding-window popularity
// estimation and prefix sizing.
//
// Popularity of a video is its share of the requests observed in the
// trailing window, clamped into (0,1) so that the prefix formulas
//   w1 = x * S        (pref-1, cached at a proxy)
//   w2 = x * (S - w1) (pref-2, cached at the tracker)
// stay total. w1 + w2 < S holds strictly for every x in (0,1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace vodsim {

using VideoId = int;

struct Video {
  VideoId id = 0;            // unique within a catalog; ids follow rank order
  double duration_min = 0;   // playback length in simulated minutes
  double playback_units_per_hour = 200.0;  // minutes -> storage units, reporting only

  double storage_units() const {
    return duration_min / 60.0 * playback_units_per_hour;
  }
};

class Catalog {
 public:
  Catalog() = default;

  explicit Catalog(std::vector<Video> videos) : videos_(std::move(videos)) {
    std::unordered_map<VideoId, int> seen;
    for (const Video& v : videos_) {
      if (!(v.duration_min > 0.0))
        throw std::invalid_argument("catalog: video duration must be > 0");
      if (!(v.playback_units_per_hour > 0.0))
        throw std::invalid_argument("catalog: playback rate must be > 0");
      if (!seen.emplace(v.id, 1).second)
        throw std::invalid_argument("catalog: duplicate video id " + std::to_string(v.id));
    }
    index_.reserve(videos_.size());
    for (std::size_t i = 0; i < videos_.size(); ++i) index_[videos_[i].id] = i;
  }

  const Video& by_id(VideoId id) const {
    auto it = index_.find(id);
    if (it == index_.end())
      throw std::invalid_argument("catalog: unknown video id " + std::to_string(id));
    return videos_[it->second];
  }

  bool contains(VideoId id) const { return index_.count(id) != 0; }
  const std::vector<Video>& videos() const { return videos_; }
  std::size_t size() const { return videos_.size(); }

 private:
  std::vector<Video> videos_;
  std::unordered_map<VideoId, std::size_t> index_;
};

/// Normalized Zipf pmf over ranks 1..n: entry k proportional to 1/k^exponent.
inline std::vector<double> zipf_pmf(std::size_t n_videos, double exponent) {
  if (n_videos == 0) throw std::invalid_argument("zipf_pmf: n_videos must be >= 1");
  if (exponent < 0.0) throw std::invalid_argument("zipf_pmf: exponent must be >= 0");
  std::vector<double> pmf(n_videos);
  double norm = 0.0;
  for (std::size_t k = 0; k < n_videos; ++k) {
    pmf[k] = 1.0 / std::pow(static_cast<double>(k + 1), exponent);
    norm += pmf[k];
  }
  for (double& p : pmf) p /= norm;
  return pmf;
}

struct ZipfModel {
  std::size_t n_videos = 1;
  double exponent = 0.0;

  std::vector<double> pmf() const { return zipf_pmf(n_videos, exponent); }
};

/// Clamp range for the popularity share x. The share is kept strictly
/// inside (0,1); both bounds are scenario knobs.
struct ClampBounds {
  double x_min = 0.05;
  double x_max = 0.95;

  void validate() const {
    if (!(x_min > 0.0) || !(x_max < 1.0) || !(x_min <= x_max))
      throw std::invalid_argument("clamp bounds must satisfy 0 < x_min <= x_max < 1");
  }
  double clamp(double x) const { return std::min(x_max, std::max(x_min, x)); }
};

struct RequestRecord {
  double time_min = 0;
  VideoId video = 0;
};

/// Popularity snapshot: per-video request share from the trailing window.
/// Videos absent from the window report the clamp floor.
class PopularityEstimate {
 public:
  PopularityEstimate() = default;

  PopularityEstimate(std::unordered_map<VideoId, long long> counts, long long total,
                     double window_min, ClampBounds bounds)
      : counts_(std::move(counts)), total_(total), window_min_(window_min), bounds_(bounds) {
    bounds_.validate();
    if (total_ > 0) {
      for (const auto& [v, n] : counts_)
        share_[v] = static_cast<double>(n) / static_cast<double>(total_);
    }
  }

  /// Synthesize an estimate directly from a pmf (rank k of the pmf maps to
  /// video id k+1). Used to bootstrap the distribution-time popularity
  /// before any request history exists.
  static PopularityEstimate from_pmf(std::span<const double> pmf, ClampBounds bounds = {}) {
    PopularityEstimate est;
    est.bounds_ = bounds;
    est.bounds_.validate();
    for (std::size_t k = 0; k < pmf.size(); ++k)
      est.share_[static_cast<VideoId>(k + 1)] = pmf[k];
    return est;
  }

  double x_of(VideoId v) const {
    auto it = share_.find(v);
    if (it == share_.end()) return bounds_.x_min;
    return bounds_.clamp(it->second);
  }

  long long total() const { return total_; }
  long long count_of(VideoId v) const {
    auto it = counts_.find(v);
    return it == counts_.end() ? 0 : it->second;
  }
  double window_min() const { return window_min_; }
  const ClampBounds& bounds() const { return bounds_; }

 private:
  std::unordered_map<VideoId, long long> counts_;
  std::unordered_map<VideoId, double> share_;
  long long total_ = 0;
  double window_min_ = 0;
  ClampBounds bounds_{};
};

/// Count requests with timestamp in (now - window, now] and derive shares.
inline PopularityEstimate estimate_popularity(std::span<const RequestRecord> log,
                                              double window_min, double now_min,
                                              ClampBounds bounds = {}) {
  std::unordered_map<VideoId, long long> counts;
  long long total = 0;
  for (const RequestRecord& r : log) {
    if (r.time_min > now_min)
      throw std::invalid_argument("estimate_popularity: timestamp beyond now");
    if (r.time_min > now_min - window_min) {
      ++counts[r.video];
      ++total;
    }
  }
  return PopularityEstimate(std::move(counts), total, window_min, bounds);
}

struct PrefixSizes {
  double w1_min = 0;
  double w2_min = 0;
};

inline PrefixSizes prefix_sizes(double x, double duration_min) {
  if (!(x > 0.0 && x < 1.0))
    throw std::invalid_argument("prefix_sizes: x must be in (0,1)");
  if (!(duration_min > 0.0))
    throw std::invalid_argument("prefix_sizes: duration must be > 0");
  const double w1 = x * duration_min;
  const double w2 = x * (duration_min - w1);
  return {w1, w2};
}

/// Sweep knob: scales an already-clamped share, capped at x_max. The floor
/// is deliberately not re-applied so small scales actually shrink prefixes.
inline double scaled_x(double x_clamped, double x_scale, double x_max) {
  return std::min(x_clamped * x_scale, x_max);
}

}  // namespace vodsim
