#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "calmnet/core.hpp"
#include "calmnet/timeutil.hpp"

namespace calmnet {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTileSideM = 50.0;

struct GpsPoint {
  Timestamp timestamp = 0;
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

inline const GpsPoint& validate_gps(const GpsPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 || p.lat > 90.0 ||
      p.lon < -180.0 || p.lon > 180.0)
    throw ValidationError("gps coordinates out of range: (" + std::to_string(p.lat) +
                          ", " + std::to_string(p.lon) + ")");
  return p;
}

/// Great-circle distance in meters.
inline double haversine(const GpsPoint& p, const GpsPoint& q) {
  const double lat1 = p.lat * kPi / 180.0, lat2 = q.lat * kPi / 180.0;
  const double dlat = lat2 - lat1;
  const double dlon = (q.lon - p.lon) * kPi / 180.0;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

/// Local equirectangular projection: meters north/east of `origin`. Good to
/// well under a meter at campus scale.
inline std::array<double, 2> project_local(const GpsPoint& p, const GpsPoint& origin) {
  const double north = (p.lat - origin.lat) * kPi / 180.0 * kEarthRadiusM;
  const double east = (p.lon - origin.lon) * kPi / 180.0 * kEarthRadiusM *
                      std::cos(origin.lat * kPi / 180.0);
  return {north, east};
}

/// One 50 m x 50 m square of the location grid.
struct TileId {
  std::int64_t row = 0;
  std::int64_t col = 0;

  friend bool operator==(const TileId&, const TileId&) = default;
  friend auto operator<=>(const TileId&, const TileId&) = default;
};

inline TileId tile_id(const GpsPoint& p, const GpsPoint& origin) {
  const auto [north, east] = project_local(p, origin);
  return {static_cast<std::int64_t>(std::floor(north / kTileSideM)),
          static_cast<std::int64_t>(std::floor(east / kTileSideM))};
}

/// Minimal insert/delete/substitute edits between two sequences; two-row
/// dynamic program.
template <typename T>
std::size_t levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  const std::size_t m = a.size(), n = b.size();
  if (m == 0) return n;
  if (n == 0) return m;
  std::vector<std::size_t> prev(n + 1), cur(n + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= n; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[n];
}

/// Shannon entropy (nats) of the distribution of distance traveled over the
/// day's 144 ten-minute bins. Each consecutive step is assigned to the bin of
/// its earlier point. Zero when nothing moved.
inline double distance_entropy(const std::vector<GpsPoint>& points, Timestamp day_start) {
  constexpr int kBins = 144;
  std::array<double, kBins> dist{};
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    int bin = static_cast<int>((points[i].timestamp - day_start) / 600);
    bin = std::clamp(bin, 0, kBins - 1);
    dist[bin] += haversine(points[i], points[i + 1]);
  }
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double d : dist)
    if (d > 0.0) {
      const double p = d / total;
      h -= p * std::log(p);
    }
  return h;
}

namespace detail {

inline double cross(const std::array<double, 2>& o, const std::array<double, 2>& a,
                    const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

}  // namespace detail

/// Area (m^2) of the convex hull of the projected points, by monotone chain
/// and the shoelace formula. Fewer than 3 non-collinear points give 0.
inline double convex_hull_area(const std::vector<GpsPoint>& points) {
  if (points.size() < 3) return 0.0;
  GpsPoint centroid{0, 0.0, 0.0};
  for (const GpsPoint& p : points) {
    centroid.lat += p.lat;
    centroid.lon += p.lon;
  }
  centroid.lat /= static_cast<double>(points.size());
  centroid.lon /= static_cast<double>(points.size());
  std::vector<std::array<double, 2>> pts;
  pts.reserve(points.size());
  for (const GpsPoint& p : points) pts.push_back(project_local(p, centroid));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n < 3) return 0.0;
  std::vector<std::array<double, 2>> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k);
  double area2 = 0.0;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i)
    area2 += hull[i][0] * hull[i + 1][1] - hull[i + 1][0] * hull[i][1];
  return std::abs(area2) / 2.0;
}

/// Number of density-connected components: points within `radius_m` of each
/// other are connected; components with fewer than `min_pts` points are not
/// counted.
inline int cluster_count(const std::vector<GpsPoint>& points, double radius_m = 100.0,
                         int min_pts = 5) {
  const std::size_t n = points.size();
  if (n == 0) return 0;
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (haversine(points[i], points[j]) <= radius_m) {
        const std::size_t a = find(i), c = find(j);
        if (a != c) parent[a] = c;
      }
  std::vector<int> size(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
  int clusters = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (find(i) == i && size[i] >= min_pts) ++clusters;
  return clusters;
}

/// Collapses the day's visit sequence: one tile per stay, consecutive
/// duplicates removed so the result is sampling-rate independent.
inline std::vector<TileId> tile_sequence(const std::vector<GpsPoint>& points,
                                         const GpsPoint& origin) {
  std::vector<TileId> seq;
  for (const GpsPoint& p : points) {
    const TileId t = tile_id(p, origin);
    if (seq.empty() || !(seq.back() == t)) seq.push_back(t);
  }
  return seq;
}

struct DayInterval {
  DayIndex first = 0;
  DayIndex last = -1;  // inclusive; default interval is empty

  bool contains(DayIndex d) const { return d >= first && d <= last; }
};

/// Term phases for the indicator covariates; supplied per cohort.
struct TermCalendar {
  DayInterval term_start;
  DayInterval midterm;
  DayInterval term_end;
};

/// The eight engineered daily GPS features plus four calendar indicators.
struct LocationFeatureVector {
  double total_distance_m = 0.0;
  double max_displacement_m = 0.0;
  double distance_entropy_nats = 0.0;
  double distance_stddev_m = 0.0;
  int unique_tiles = 0;
  int tile_seq_edit_distance = 0;
  double convex_hull_area_m2 = 0.0;
  int cluster_count = 0;
  int is_term_start = 0;
  int is_midterm = 0;
  int is_term_end = 0;
  int is_weekend = 0;

  static constexpr int kDim = 12;

  std::array<double, kDim> as_array() const {
    return {total_distance_m,
            max_displacement_m,
            distance_entropy_nats,
            distance_stddev_m,
            static_cast<double>(unique_tiles),
            static_cast<double>(tile_seq_edit_distance),
            convex_hull_area_m2,
            static_cast<double>(cluster_count),
            static_cast<double>(is_term_start),
            static_cast<double>(is_midterm),
            static_cast<double>(is_term_end),
            static_cast<double>(is_weekend)};
  }

  static std::array<const char*, kDim> field_names() {
    return {"total_distance_m", "max_displacement_m", "distance_entropy_nats",
            "distance_stddev_m", "unique_tiles", "tile_seq_edit_distance",
            "convex_hull_area_m2", "cluster_count", "is_term_start", "is_midterm",
            "is_term_end", "is_weekend"};
  }
};

struct LocationConfig {
  GpsPoint origin;  // projection/tile origin, typically the cohort centroid
  double cluster_radius_m = 100.0;
  int cluster_min_pts = 5;
  int utc_offset_hours = kDefaultUtcOffsetHours;
  TermCalendar calendar;
};

/// Daily feature extraction for one subject-day. `points` must be sorted by
/// time; `prev_day_tiles` is the previous day's collapsed tile sequence.
inline LocationFeatureVector extract_daily_location_features(
    const std::vector<GpsPoint>& points, const std::vector<TileId>& prev_day_tiles,
    const LocationConfig& config, DayIndex day, int* degenerate_days = nullptr) {
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (points[i].timestamp > points[i + 1].timestamp)
      throw ValidationError("gps points for a day must be sorted by time");

  LocationFeatureVector f;
  f.is_term_start = config.calendar.term_start.contains(day) ? 1 : 0;
  f.is_midterm = config.calendar.midterm.contains(day) ? 1 : 0;
  f.is_term_end = config.calendar.term_end.contains(day) ? 1 : 0;
  f.is_weekend = is_weekend(day) ? 1 : 0;

  const std::vector<TileId> today = tile_sequence(points, config.origin);
  f.tile_seq_edit_distance = static_cast<int>(levenshtein(today, prev_day_tiles));
  f.unique_tiles = static_cast<int>(std::set<TileId>(today.begin(), today.end()).size());

  if (points.size() < 2) {
    if (degenerate_days) ++*degenerate_days;
    return f;
  }

  std::vector<double> steps;
  steps.reserve(points.size() - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    steps.push_back(haversine(points[i], points[i + 1]));
  f.total_distance_m = std::accumulate(steps.begin(), steps.end(), 0.0);
  for (const GpsPoint& p : points)
    f.max_displacement_m = std::max(f.max_displacement_m, haversine(points.front(), p));
  const double mean = f.total_distance_m / static_cast<double>(steps.size());
  double var = 0.0;
  for (double s : steps) var += (s - mean) * (s - mean);
  f.distance_stddev_m = std::sqrt(var / static_cast<double>(steps.size()));
  f.distance_entropy_nats =
      distance_entropy(points, day_start_utc(day, config.utc_offset_hours));
  f.convex_hull_area_m2 = convex_hull_area(points);
  f.cluster_count = cluster_count(points, config.cluster_radius_m, config.cluster_min_pts);
  return f;
}

}  // namespace calmnet
