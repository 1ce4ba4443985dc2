#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "fpindex/descriptor.hpp"
#include "fpindex/geometry.hpp"

namespace fpindex {

struct MatchGates {
  double max_distance = 12.0;          // px, after alignment
  double max_angle = radians(20.0);
  double dedup_distance = 4.0;         // appended minutiae closer than this...
  double dedup_angle = radians(10.0);  // ...and this are dropped as duplicates

  void validate() const;
};

struct Template {
  std::vector<Minutia> minutiae;
  std::vector<MinutiaDescriptor> descriptors;  // parallel to minutiae
  std::size_t source_count = 1;

  std::size_t size() const { return minutiae.size(); }
  void validate() const;
  bool operator==(const Template&) const = default;
};

Template make_template(DescribedMinutiae described);

/// One-to-one pairs (index in a, index in b) plus the motion mapping b onto a.
struct Correspondence {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  RigidMotion transform;
};

/// Every minutia pair proposes the rigid motion that superimposes them; the
/// proposal under which the most minutiae of b land inside the gates of some
/// minutia of a wins (first proposal in (i, j) order on ties). Pairs are then
/// assigned greedily nearest-first under the gates, the motion is refit by
/// least squares, and the assignment is repeated.
Correspondence correspond(const Template& a, const Template& b, const MatchGates& gates = {});

/// Greedy one-to-one assignment of b (moved by `motion`) onto a under the gates.
std::vector<std::pair<std::size_t, std::size_t>> match_under(const Template& a,
                                                             const Template& b,
                                                             const RigidMotion& motion,
                                                             const MatchGates& gates);

/// Least-squares rotation + translation taking the b side of `pairs` onto the a side.
RigidMotion fit_rigid(const std::vector<Eigen::Vector2d>& a_points,
                      const std::vector<Eigen::Vector2d>& b_points);

/// Weighted circular mean of two directions; keeps `a` when the resultant vanishes.
double weighted_direction_mean(double a, double wa, double b, double wb);

/// Paired minutiae are averaged with weights (super.source_count, t.source_count);
/// unpaired minutiae of t are moved into the super-template frame and appended.
Template merge(const Template& super_t, const Template& t, const Correspondence& corr,
               const MatchGates& gates = {});

/// Fold of correspond + merge in input order, seeded by the first template.
Template build_super_template(const std::vector<Template>& templates,
                              const MatchGates& gates = {});

}  // namespace fpindex
