#include "fpindex/template.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "fpindex/error.hpp"

namespace fpindex {

void MatchGates::validate() const {
  require(max_distance > 0.0 && max_angle > 0.0, ErrorKind::parameter,
          "match gates must be positive");
  require(dedup_distance >= 0.0 && dedup_angle >= 0.0, ErrorKind::parameter,
          "dedup gates must be non-negative");
}

void Template::validate() const {
  require(!minutiae.empty(), ErrorKind::empty_template, "template has no minutiae");
  require(minutiae.size() == descriptors.size(), ErrorKind::parameter,
          "template has " + std::to_string(minutiae.size()) + " minutiae but " +
              std::to_string(descriptors.size()) + " descriptors");
  require(source_count >= 1, ErrorKind::parameter, "template source_count must be >= 1");
}

Template make_template(DescribedMinutiae described) {
  Template t;
  t.minutiae = std::move(described.minutiae);
  t.descriptors = std::move(described.descriptors);
  t.source_count = 1;
  t.validate();
  return t;
}

namespace {

bool within_gates(const Minutia& p, const Minutia& q, double distance, double angle) {
  return (p.position() - q.position()).norm() <= distance &&
         std::abs(angle_difference(p.theta, q.theta)) <= angle;
}

std::size_t alignment_support(const Template& a, const std::vector<Minutia>& moved,
                              const MatchGates& gates) {
  std::size_t support = 0;
  for (const Minutia& q : moved)
    for (const Minutia& p : a.minutiae)
      if (within_gates(p, q, gates.max_distance, gates.max_angle)) {
        ++support;
        break;
      }
  return support;
}

RigidMotion pair_motion(const Minutia& p, const Minutia& q) {
  RigidMotion m;
  m.rotation = angle_difference(p.theta, q.theta);
  m.translation = p.position() - m.matrix() * q.position();
  return m;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> match_under(const Template& a,
                                                             const Template& b,
                                                             const RigidMotion& motion,
                                                             const MatchGates& gates) {
  struct Candidate {
    double distance;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Candidate> candidates;
  for (std::size_t j = 0; j < b.minutiae.size(); ++j) {
    const Minutia q = motion.apply(b.minutiae[j]);
    for (std::size_t i = 0; i < a.minutiae.size(); ++i) {
      const Minutia& p = a.minutiae[i];
      if (within_gates(p, q, gates.max_distance, gates.max_angle))
        candidates.push_back({(p.position() - q.position()).norm(), i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const auto& l, const auto& r) {
    return std::tie(l.distance, l.i, l.j) < std::tie(r.distance, r.i, r.j);
  });

  std::vector<bool> used_a(a.minutiae.size(), false);
  std::vector<bool> used_b(b.minutiae.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const Candidate& c : candidates) {
    if (used_a[c.i] || used_b[c.j]) continue;
    used_a[c.i] = used_b[c.j] = true;
    pairs.emplace_back(c.i, c.j);
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

RigidMotion fit_rigid(const std::vector<Eigen::Vector2d>& a_points,
                      const std::vector<Eigen::Vector2d>& b_points) {
  require(a_points.size() == b_points.size() && !a_points.empty(), ErrorKind::parameter,
          "rigid fit needs matching, non-empty point lists");
  Eigen::Vector2d ca = Eigen::Vector2d::Zero();
  Eigen::Vector2d cb = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < a_points.size(); ++i) {
    ca += a_points[i];
    cb += b_points[i];
  }
  ca /= static_cast<double>(a_points.size());
  cb /= static_cast<double>(b_points.size());
  double dot = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < a_points.size(); ++i) {
    const Eigen::Vector2d pa = a_points[i] - ca;
    const Eigen::Vector2d pb = b_points[i] - cb;
    dot += pb.x() * pa.x() + pb.y() * pa.y();
    cross += pb.x() * pa.y() - pb.y() * pa.x();
  }
  RigidMotion m;
  m.rotation = std::atan2(cross, dot);
  m.translation = ca - m.matrix() * cb;
  return m;
}

Correspondence correspond(const Template& a, const Template& b, const MatchGates& gates) {
  gates.validate();
  require(!a.minutiae.empty() && !b.minutiae.empty(), ErrorKind::parameter,
          "correspondence needs two non-empty templates");

  RigidMotion best;
  std::size_t best_support = 0;
  std::vector<Minutia> moved(b.minutiae.size());
  for (const Minutia& p : a.minutiae) {
    for (const Minutia& q : b.minutiae) {
      const RigidMotion motion = pair_motion(p, q);
      for (std::size_t j = 0; j < b.minutiae.size(); ++j)
        moved[j] = motion.apply(b.minutiae[j]);
      const std::size_t support = alignment_support(a, moved, gates);
      if (support > best_support) {
        best_support = support;
        best = motion;
      }
    }
  }

  Correspondence corr;
  corr.transform = best;
  corr.pairs = match_under(a, b, best, gates);
  for (int round = 0; round < 2 && corr.pairs.size() >= 2; ++round) {
    std::vector<Eigen::Vector2d> pa;
    std::vector<Eigen::Vector2d> pb;
    for (const auto& [i, j] : corr.pairs) {
      pa.push_back(a.minutiae[i].position());
      pb.push_back(b.minutiae[j].position());
    }
    const RigidMotion refined = fit_rigid(pa, pb);
    auto pairs = match_under(a, b, refined, gates);
    if (pairs.size() < corr.pairs.size()) break;
    corr.transform = refined;
    corr.pairs = std::move(pairs);
  }
  return corr;
}

double weighted_direction_mean(double a, double wa, double b, double wb) {
  const double delta = angle_difference(b, a);
  const double along = wa + wb * std::cos(delta);
  const double across = wb * std::sin(delta);
  if (std::hypot(along, across) < 1e-12) return normalize_angle(a);
  return normalize_angle(a + std::atan2(across, along));
}

Template merge(const Template& super_t, const Template& t, const Correspondence& corr,
               const MatchGates& gates) {
  super_t.validate();
  t.validate();
  const double ws = static_cast<double>(super_t.source_count);
  const double wt = static_cast<double>(t.source_count);
  const double alpha = wt / (ws + wt);

  Template out = super_t;
  out.source_count = super_t.source_count + t.source_count;
  std::vector<bool> paired(t.minutiae.size(), false);
  for (const auto& [i, j] : corr.pairs) {
    require(i < super_t.size() && j < t.size(), ErrorKind::parameter,
            "correspondence index out of range");
    paired[j] = true;
    const Minutia moved = corr.transform.apply(t.minutiae[j]);
    Minutia& m = out.minutiae[i];
    // a + alpha (b - a) leaves equal inputs bit-identical.
    m.x += alpha * (moved.x - m.x);
    m.y += alpha * (moved.y - m.y);
    m.theta = weighted_direction_mean(m.theta, ws, moved.theta, wt);
    out.descriptors[i] += alpha * (t.descriptors[j] - out.descriptors[i]);
  }

  for (std::size_t j = 0; j < t.minutiae.size(); ++j) {
    if (paired[j]) continue;
    const Minutia moved = corr.transform.apply(t.minutiae[j]);
    const bool duplicate = std::any_of(
        out.minutiae.begin(), out.minutiae.end(), [&](const Minutia& m) {
          return (m.position() - moved.position()).norm() < gates.dedup_distance &&
                 std::abs(angle_difference(m.theta, moved.theta)) < gates.dedup_angle;
        });
    if (duplicate) continue;
    out.minutiae.push_back(moved);
    out.descriptors.push_back(t.descriptors[j]);
  }
  return out;
}

Template build_super_template(const std::vector<Template>& templates,
                              const MatchGates& gates) {
  require(!templates.empty(), ErrorKind::parameter, "need at least one template");
  Template super_t = templates.front();
  super_t.validate();
  for (std::size_t i = 1; i < templates.size(); ++i)
    super_t = merge(super_t, templates[i], correspond(super_t, templates[i], gates), gates);
  return super_t;
}

}  // namespace fpindex
