#include "mep/geo/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mep/error.hpp"

namespace mep::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg)) {
    throw Error(ErrorCode::InvalidCoordinate, "coordinate must be finite");
  }
  if (lat_deg < -90.0 || lat_deg > 90.0) {
    throw Error(ErrorCode::InvalidCoordinate, "latitude out of range: " + std::to_string(lat_deg));
  }
  if (lon_deg < -180.0 || lon_deg > 180.0) {
    throw Error(ErrorCode::InvalidCoordinate, "longitude out of range: " + std::to_string(lon_deg));
  }
  lat_ = lat_deg;
  lon_ = lon_deg == 180.0 ? -180.0 : lon_deg;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
  // fabs of the deltas plus the commutative cos product keeps d(a,b) == d(b,a)
  // bit for bit.
  const double dlat = std::fabs(b.lat_deg() - a.lat_deg()) * kDegToRad;
  const double dlon = std::fabs(b.lon_deg() - a.lon_deg()) * kDegToRad;
  const double s_lat = std::sin(dlat * 0.5);
  const double s_lon = std::sin(dlon * 0.5);
  const double cos_prod = std::cos(a.lat_deg() * kDegToRad) * std::cos(b.lat_deg() * kDegToRad);
  const double h = s_lat * s_lat + cos_prod * (s_lon * s_lon);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

bool within_radius(const GeoPoint& center, const GeoPoint& p, double radius_m) {
  if (!(radius_m >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "radius must be nonnegative");
  }
  return haversine_distance(center, p) <= radius_m;
}

UnitVector to_unit_vector(const GeoPoint& p) noexcept {
  const double lat = p.lat_deg() * kDegToRad;
  const double lon = p.lon_deg() * kDegToRad;
  const double c = std::cos(lat);
  return {c * std::cos(lon), c * std::sin(lon), std::sin(lat)};
}

double chord2_for_distance(double meters) noexcept {
  const double theta = std::min(meters / kEarthRadiusM, std::numbers::pi);
  const double chord = 2.0 * std::sin(theta * 0.5);
  return chord * chord;
}

Track::Track(std::vector<GeoPoint> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "track needs at least two points");
  }
  cumulative_.reserve(points_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    cumulative_.push_back(cumulative_.back() + haversine_distance(points_[i - 1], points_[i]));
  }
}

double track_length(const Track& track) noexcept { return track.length_m(); }

GeoPoint point_at_distance(const Track& track, double distance_m) {
  if (!(distance_m >= 0.0) || distance_m > track.length_m()) {
    throw Error(ErrorCode::InvalidArgument,
                "distance " + std::to_string(distance_m) + " outside track of length " +
                    std::to_string(track.length_m()));
  }
  const auto pts = track.points();
  const auto cum = track.cumulative_m();
  if (distance_m == 0.0) return pts.front();
  if (distance_m == track.length_m()) return pts.back();

  // first vertex whose cumulative distance is >= distance_m
  const auto it = std::lower_bound(cum.begin(), cum.end(), distance_m);
  const std::size_t hi = static_cast<std::size_t>(it - cum.begin());
  const std::size_t lo = hi - 1;
  const double seg = cum[hi] - cum[lo];
  const double t = seg > 0.0 ? (distance_m - cum[lo]) / seg : 0.0;
  const GeoPoint& a = pts[lo];
  const GeoPoint& b = pts[hi];
  return GeoPoint(a.lat_deg() + t * (b.lat_deg() - a.lat_deg()),
                  a.lon_deg() + t * (b.lon_deg() - a.lon_deg()));
}

}  // namespace mep::geo
