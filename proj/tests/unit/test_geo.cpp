#include <doctest.h>

#include <cmath>
#include <random>

#include "mep/error.hpp"
#include "mep/geo/geo.hpp"
#include "oracle_data.hpp"

using namespace mep::geo;
using mep::Error;
using mep::ErrorCode;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected mep::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("one degree of latitude on the equator") {
  const auto oracle = mep::testing::read_json(mep::testing::data_path("geo_oracle.json"));
  const double d = haversine_distance({0, 0}, {1, 0});
  CHECK(d == doctest::Approx(oracle["equator_one_degree_m"].get<double>()).epsilon(1e-12));
  CHECK(d == doctest::Approx(111194.9266).epsilon(1e-9));
}

TEST_CASE("Kyoto pair matches the oracle") {
  const auto oracle = mep::testing::read_json(mep::testing::data_path("geo_oracle.json"));
  const double d = haversine_distance({35.0301, 135.7717}, {35.0050, 135.7690});
  CHECK(d == doctest::Approx(oracle["kyoto_pair_m"].get<double>()).epsilon(1e-9));
}

TEST_CASE("identity and exact symmetry") {
  const GeoPoint a{35.0301, 135.7717};
  const GeoPoint b{-12.5, -77.25};
  CHECK(haversine_distance(a, a) == 0.0);
  CHECK(haversine_distance(a, b) == haversine_distance(b, a));
}

TEST_CASE("frozen random pairs agree to 1e-9 relative") {
  const auto pairs = mep::testing::read_oracle_pairs();
  REQUIRE(pairs.size() == 10000);
  double worst = 0.0;
  for (const auto& p : pairs) {
    const double d = haversine_distance({p.lat1, p.lon1}, {p.lat2, p.lon2});
    worst = std::max(worst, std::fabs(d - p.distance_m) / p.distance_m);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("coordinate validation") {
  CHECK(code_of([] { GeoPoint(90.0001, 0); }) == ErrorCode::InvalidCoordinate);
  CHECK(code_of([] { GeoPoint(0, -180.5); }) == ErrorCode::InvalidCoordinate);
  CHECK(code_of([] { GeoPoint(NAN, 0); }) == ErrorCode::InvalidCoordinate);
  CHECK(code_of([] { GeoPoint(0, INFINITY); }) == ErrorCode::InvalidCoordinate);
  CHECK(GeoPoint(0, 180).lon_deg() == -180.0);
  CHECK(GeoPoint(-90, -180).lat_deg() == -90.0);
}

TEST_CASE("antimeridian neighbours are close") {
  CHECK(haversine_distance({0, 179.9995}, {0, -179.9995}) == doctest::Approx(111.19492).epsilon(1e-6));
}

TEST_CASE("within_radius is a closed ball") {
  const GeoPoint c{35.0, 135.0};
  const GeoPoint p{35.001, 135.0};
  const double d = haversine_distance(c, p);
  CHECK(within_radius(c, p, d));
  CHECK_FALSE(within_radius(c, p, std::nextafter(d, 0.0)));
  CHECK(within_radius(c, c, 0.0));
  CHECK(code_of([&] { within_radius(c, p, -1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { within_radius(c, p, NAN); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("chord2 is monotone in distance and consistent with unit vectors") {
  const GeoPoint a{35.0, 135.0};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> off(-0.05, 0.05);
  for (int i = 0; i < 1000; ++i) {
    const GeoPoint b{35.0 + off(rng), 135.0 + off(rng)};
    const auto ua = to_unit_vector(a);
    const auto ub = to_unit_vector(b);
    const double dx = ua.x - ub.x, dy = ua.y - ub.y, dz = ua.z - ub.z;
    const double c2 = dx * dx + dy * dy + dz * dz;
    CHECK(c2 == doctest::Approx(chord2_for_distance(haversine_distance(a, b))).epsilon(1e-8));
  }
  CHECK(chord2_for_distance(0.0) == 0.0);
  CHECK(chord2_for_distance(100.0) < chord2_for_distance(101.0));
  CHECK(chord2_for_distance(1e9) == doctest::Approx(4.0));
}

TEST_CASE("Kamo track is 4 km and the flowers sit on it") {
  const auto oracle = mep::testing::read_json(mep::testing::data_path("geo_oracle.json"));
  std::vector<GeoPoint> pts;
  for (const auto& v : oracle["kamo_track"]) pts.emplace_back(v[0].get<double>(), v[1].get<double>());
  const Track track(pts);
  CHECK(track_length(track) ==
        doctest::Approx(oracle["kamo_track_length_m"].get<double>()).epsilon(1e-9));
  for (const auto& f : oracle["flowers"]) {
    const GeoPoint p = point_at_distance(track, f["at_m"].get<double>());
    // oracle rounds to 7 decimals (about 1 cm)
    CHECK(std::fabs(p.lat_deg() - f["lat"].get<double>()) <= 6e-8);
    CHECK(std::fabs(p.lon_deg() - f["lon"].get<double>()) <= 6e-8);
  }
}

TEST_CASE("point_at_distance endpoints and range") {
  const Track t({{0, 0}, {0, 1}, {1, 1}});
  CHECK(point_at_distance(t, 0.0) == GeoPoint(0, 0));
  CHECK(point_at_distance(t, t.length_m()) == GeoPoint(1, 1));
  const GeoPoint corner = point_at_distance(t, t.cumulative_m()[1]);
  CHECK(corner.lat_deg() == doctest::Approx(0.0));
  CHECK(corner.lon_deg() == doctest::Approx(1.0));
  CHECK(code_of([&] { point_at_distance(t, -1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { point_at_distance(t, t.length_m() + 1.0); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { Track({{0, 0}}); }) == ErrorCode::InvalidArgument);
}
