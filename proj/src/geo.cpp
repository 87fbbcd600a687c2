#include "ctmap/geo.hpp"

#include <cmath>
#include <stdexcept>

namespace ctmap::geo {

namespace {
constexpr double kPi = 3.14159265358979323846;
inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

std::atomic<DistanceMode> g_mode{DistanceMode::Haversine};
}  // namespace

bool valid_coordinates(const LatLon &p) {
  return p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

double haversine_km(const LatLon &a, const LatLon &b) {
  if (a == b) return 0.0;
  const double lat1 = deg2rad(a.lat), lat2 = deg2rad(b.lat);
  const double dlat = lat2 - lat1;
  const double dlon = deg2rad(b.lon - a.lon);
  const double sin_dlat = std::sin(0.5 * dlat);
  const double sin_dlon = std::sin(0.5 * dlon);
  const double h =
      sin_dlat * sin_dlat + std::cos(lat1) * std::cos(lat2) * sin_dlon * sin_dlon;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double equirectangular_km(const LatLon &a, const LatLon &b) {
  if (a == b) return 0.0;
  const double mean_lat = deg2rad(0.5 * (a.lat + b.lat));
  const double dx = deg2rad(b.lon - a.lon) * std::cos(mean_lat);
  const double dy = deg2rad(b.lat - a.lat);
  return kEarthRadiusKm * std::sqrt(dx * dx + dy * dy);
}

void set_distance_mode(DistanceMode mode) { g_mode.store(mode); }

DistanceMode distance_mode() { return g_mode.load(); }

DistanceMode parse_distance_mode(const std::string &name) {
  if (name == "haversine") return DistanceMode::Haversine;
  if (name == "equirectangular") return DistanceMode::Equirectangular;
  throw std::invalid_argument("unknown distance mode: " + name);
}

double distance_km(const LatLon &a, const LatLon &b) {
  return g_mode.load() == DistanceMode::Haversine ? haversine_km(a, b)
                                                  : equirectangular_km(a, b);
}

LocalProjection::LocalProjection(const LatLon &origin)
    : origin_(origin), cos_lat0_(std::cos(deg2rad(origin.lat))) {}

XY LocalProjection::to_xy(const LatLon &p) const {
  return {kEarthRadiusKm * deg2rad(p.lon - origin_.lon) * cos_lat0_,
          kEarthRadiusKm * deg2rad(p.lat - origin_.lat)};
}

LatLon LocalProjection::to_latlon(const XY &p) const {
  return {origin_.lat + rad2deg(p.y / kEarthRadiusKm),
          origin_.lon + rad2deg(p.x / (kEarthRadiusKm * cos_lat0_))};
}

}  // namespace ctmap::geo
