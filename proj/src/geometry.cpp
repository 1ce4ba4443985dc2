#include "fpindex/geometry.hpp"

#include <cmath>

#include "fpindex/error.hpp"

namespace fpindex {

double normalize_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod of a tiny negative value can round up to exactly 2 pi.
  if (r >= kTwoPi) r = 0.0;
  return r;
}

double angle_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  if (d <= -kPi) d += kTwoPi;
  return d;
}

char kind_code(MinutiaKind kind) {
  switch (kind) {
    case MinutiaKind::ridge_ending: return 'E';
    case MinutiaKind::bifurcation: return 'B';
    case MinutiaKind::unknown: return 'U';
  }
  return 'U';
}

MinutiaKind kind_from_code(char code) {
  switch (code) {
    case 'E': return MinutiaKind::ridge_ending;
    case 'B': return MinutiaKind::bifurcation;
    case 'U': return MinutiaKind::unknown;
    default:
      fail(ErrorKind::format, std::string("unknown minutia kind '") + code + "'");
  }
}

Eigen::Matrix2d RigidMotion::matrix() const {
  const double c = std::cos(rotation);
  const double s = std::sin(rotation);
  Eigen::Matrix2d r;
  r << c, -s, s, c;
  return r;
}

Eigen::Vector2d RigidMotion::apply(const Eigen::Vector2d& p) const {
  return matrix() * p + translation;
}

Minutia RigidMotion::apply(const Minutia& m) const {
  const Eigen::Vector2d p = apply(m.position());
  return Minutia(p.x(), p.y(), m.theta + rotation, m.kind);
}

RigidMotion RigidMotion::inverse() const {
  RigidMotion inv;
  inv.rotation = -rotation;
  inv.translation = -(inv.matrix() * translation);
  return inv;
}

RigidMotion RigidMotion::about(const Eigen::Vector2d& centre, double angle,
                               const Eigen::Vector2d& shift) {
  RigidMotion m;
  m.rotation = angle;
  m.translation = centre - m.matrix() * centre + shift;
  return m;
}

}  // namespace fpindex
