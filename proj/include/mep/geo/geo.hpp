#pragma once

#include <span>
#include <vector>

namespace mep::geo {

inline constexpr double kEarthRadiusM = 6371000.0;

// WGS84 position in decimal degrees. Latitude must lie in [-90, 90] and
// longitude in [-180, 180]; longitude is stored normalized to [-180, 180).
class GeoPoint {
 public:
  GeoPoint(double lat_deg, double lon_deg);

  double lat_deg() const noexcept { return lat_; }
  double lon_deg() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
// Bit-exactly symmetric in its arguments.
double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

// Closed ball: true iff haversine_distance(center, p) <= radius_m.
// Throws InvalidArgument for a negative or non-finite radius.
bool within_radius(const GeoPoint& center, const GeoPoint& p, double radius_m);

// Unit vector on the sphere; the chord between two such vectors is a monotone
// function of their great-circle distance.
struct UnitVector {
  double x, y, z;
};

UnitVector to_unit_vector(const GeoPoint& p) noexcept;

// Squared chord length (unit sphere) corresponding to an arc of `meters`.
double chord2_for_distance(double meters) noexcept;

// Polyline with cumulative arc length per vertex.
class Track {
 public:
  explicit Track(std::vector<GeoPoint> points);

  std::span<const GeoPoint> points() const noexcept { return points_; }
  std::span<const double> cumulative_m() const noexcept { return cumulative_; }
  double length_m() const noexcept { return cumulative_.back(); }

 private:
  std::vector<GeoPoint> points_;
  std::vector<double> cumulative_;
};

double track_length(const Track& track) noexcept;

// Position after walking `distance_m` from the first vertex. Interpolation is
// linear in lat/lon inside the containing segment. Throws InvalidArgument when
// distance_m is outside [0, track_length].
GeoPoint point_at_distance(const Track& track, double distance_m);

}  // namespace mep::geo
