#pragma once

#include <numbers>

#include <Eigen/Core>

namespace fpindex {

// Coordinate convention used everywhere (sampling ring, Gabor carriers,
// template alignment, synthesis): pixel coordinates with x to the right and
// y downward; a direction theta is the unit vector (cos theta, sin theta) in
// those coordinates. Rotations use the same matrix [[c, -s], [s, c]].

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any angle into [0, 2 pi).
double normalize_angle(double a);

/// Signed smallest difference a - b, in (-pi, pi].
double angle_difference(double a, double b);

inline double degrees(double rad) { return rad * 180.0 / kPi; }
inline double radians(double deg) { return deg * kPi / 180.0; }

enum class MinutiaKind { ridge_ending, bifurcation, unknown };

char kind_code(MinutiaKind kind);
MinutiaKind kind_from_code(char code);

struct Minutia {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // [0, 2 pi)
  MinutiaKind kind = MinutiaKind::unknown;

  Minutia() = default;
  Minutia(double x_, double y_, double theta_, MinutiaKind kind_ = MinutiaKind::unknown)
      : x(x_), y(y_), theta(normalize_angle(theta_)), kind(kind_) {}

  Eigen::Vector2d position() const { return {x, y}; }
  bool operator==(const Minutia&) const = default;
};

/// p -> R(rotation) p + translation.
struct RigidMotion {
  double rotation = 0.0;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();

  Eigen::Matrix2d matrix() const;
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;
  Minutia apply(const Minutia& m) const;
  RigidMotion inverse() const;

  /// Rotation by `angle` about `centre` followed by `shift`.
  static RigidMotion about(const Eigen::Vector2d& centre, double angle,
                           const Eigen::Vector2d& shift = Eigen::Vector2d::Zero());
};

}  // namespace fpindex
