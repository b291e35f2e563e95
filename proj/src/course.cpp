#include "pathtrack/course.hpp"

#include <algorithm>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace pathtrack {

namespace {

double chord(const PathPoint& a, const PathPoint& b) { return std::hypot(b.x - a.x, b.y - a.y); }

}  // namespace

Course::Course(std::vector<PathPoint> points, bool closed, double nominal_spacing)
    : points_(std::move(points)), closed_(closed) {
  if (points_.size() < 2) throw DomainError("a course needs at least two points");
  for (const auto& p : points_) {
    for (double v : {p.x, p.y, p.theta, p.kappa, p.s}) require_finite(v, "path point");
  }
  if (nominal_spacing <= 0.0) {
    std::vector<double> gaps;
    for (std::size_t i = 0; i + 1 < points_.size(); ++i) gaps.push_back(chord(points_[i], points_[i + 1]));
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    nominal_spacing = gaps[gaps.size() / 2];
  }
  spacing_ = nominal_spacing;
  const std::size_t segs = closed_ ? points_.size() : points_.size() - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const PathPoint& a = points_[i];
    const PathPoint& b = points_[(i + 1) % points_.size()];
    const double gap = chord(a, b);
    if (!(gap > 0.0) || gap > 2.0 * spacing_ + 1e-9) {
      throw DomainError("course spacing out of range at point " + std::to_string(i));
    }
    if (i + 1 < points_.size() && !(b.s > a.s)) {
      throw DomainError("arc length must be strictly increasing");
    }
    const double dir = std::atan2(b.y - a.y, b.x - a.x);
    if (std::abs(wrap_angle(dir - a.theta)) > 0.1) {
      throw DomainError("path heading inconsistent with chord at point " + std::to_string(i));
    }
  }
  length_ = points_.back().s;
  if (closed_) length_ += chord(points_.back(), points_.front());
}

PathPoint Course::on_segment(std::size_t seg, double t) const {
  const PathPoint& a = points_[seg];
  const PathPoint& b = points_[(seg + 1) % points_.size()];
  const double sb = (closed_ && seg + 1 == points_.size()) ? length_ : b.s;
  PathPoint p;
  p.x = a.x + t * (b.x - a.x);
  p.y = a.y + t * (b.y - a.y);
  p.theta = wrap_angle(a.theta + t * wrap_angle(b.theta - a.theta));
  p.kappa = a.kappa + t * (b.kappa - a.kappa);
  p.s = a.s + t * (sb - a.s);
  return p;
}

PathPoint Course::at_arc(double s) const {
  if (closed_) {
    s = std::fmod(s, length_);
    if (s < 0) s += length_;
  } else {
    if (s > length_ + 1e-9) throw EndOfCourse("arc length past the end of the course");
    s = std::clamp(s, 0.0, length_);
  }
  // Last segment whose start is <= s.
  auto it = std::upper_bound(points_.begin(), points_.end(), s,
                             [](double v, const PathPoint& p) { return v < p.s; });
  std::size_t seg = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - points_.begin() - 1, 0));
  if (!closed_ && seg + 1 >= points_.size()) seg = points_.size() - 2;
  const double s0 = points_[seg].s;
  const double s1 = (closed_ && seg + 1 == points_.size()) ? length_ : points_[seg + 1].s;
  return on_segment(seg, std::clamp((s - s0) / (s1 - s0), 0.0, 1.0));
}

namespace {

using Fn = std::function<double(double)>;

/// Samples y = f(x) uniformly in x; heading and curvature are analytic.
Course sample_graph(double x_end, double spacing, const Fn& y, const Fn& dy, const Fn& ddy) {
  const auto n = static_cast<std::size_t>(std::llround(x_end / spacing)) + 1;
  const double step = x_end / static_cast<double>(n - 1);
  std::vector<PathPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = step * static_cast<double>(i);
    const double d1 = dy(x);
    PathPoint& p = pts[i];
    p.x = x;
    p.y = y(x);
    p.theta = std::atan(d1);
    p.kappa = ddy(x) / std::pow(1.0 + d1 * d1, 1.5);
    p.s = i == 0 ? 0.0 : pts[i - 1].s + chord(pts[i - 1], p);
  }
  return Course(std::move(pts), false, step);
}

}  // namespace

Course gen_straight(double length, double spacing) {
  if (!(spacing > 0.0) || !(length > spacing)) throw DomainError("need length > spacing > 0");
  auto zero = [](double) { return 0.0; };
  return sample_graph(length, spacing, zero, zero, zero);
}

Course gen_circle(double radius, double spacing) {
  if (!(radius > 0.0) || !(spacing > 0.0)) throw DomainError("radius and spacing must be positive");
  const auto n = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::ceil(2.0 * kPi * radius / spacing)));
  const double dphi = 2.0 * kPi / static_cast<double>(n);
  const double seg = 2.0 * radius * std::sin(0.5 * dphi);
  std::vector<PathPoint> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = dphi * static_cast<double>(i);
    pts[i] = {radius * std::cos(phi), radius * std::sin(phi), wrap_angle(phi + kPi / 2), 1.0 / radius,
              seg * static_cast<double>(i)};
  }
  return Course(std::move(pts), true, seg);
}

Course gen_lane_change(double approach, double transition, double offset, double exit,
                       double spacing) {
  if (!(approach > 0 && transition > 0 && offset > 0 && exit > 0 && spacing > 0)) {
    throw DomainError("lane change dimensions must be positive");
  }
  const double t_len = transition;
  auto u = [=](double x) { return std::clamp((x - approach) / t_len, 0.0, 1.0); };
  auto inside = [=](double x) { return x > approach && x < approach + t_len; };
  auto y = [=](double x) {
    const double v = u(x);
    return offset * v * v * v * (10.0 - 15.0 * v + 6.0 * v * v);
  };
  auto dy = [=](double x) {
    if (!inside(x)) return 0.0;
    const double v = u(x);
    return offset / t_len * 30.0 * v * v * (1.0 - v) * (1.0 - v);
  };
  auto ddy = [=](double x) {
    if (!inside(x)) return 0.0;
    const double v = u(x);
    return offset / (t_len * t_len) * 60.0 * v * (1.0 - v) * (1.0 - 2.0 * v);
  };
  return sample_graph(approach + transition + exit, spacing, y, dy, ddy);
}

Course gen_sine(double amplitude, double wavelength, double length, double spacing) {
  if (!(amplitude >= 0 && wavelength > 0 && length > 0 && spacing > 0)) {
    throw DomainError("sine course dimensions must be positive");
  }
  const double w = 2.0 * kPi / wavelength;
  return sample_graph(
      length, spacing, [=](double x) { return amplitude * std::sin(w * x); },
      [=](double x) { return amplitude * w * std::cos(w * x); },
      [=](double x) { return -amplitude * w * w * std::sin(w * x); });
}

NearestResult nearest_point(const Course& course, const Eigen::Vector2d& position,
                            std::optional<std::size_t> hint, double window) {
  const std::size_t segs = course.segments();
  const std::size_t n = course.size();
  std::size_t first = 0;
  std::size_t count = segs;
  if (hint) {
    first = std::min(*hint, segs - 1);
    const double s0 = course[first].s;
    count = 0;
    for (std::size_t k = 0; k < segs; ++k) {
      const std::size_t seg = (first + k) % segs;
      if (!course.closed() && first + k >= segs) break;
      double ds = course[seg].s - s0;
      if (ds < 0) ds += course.length();
      if (k > 0 && ds > window) break;
      ++count;
    }
  }
  NearestResult best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t seg = (first + k) % segs;
    const PathPoint& a = course[seg];
    const PathPoint& b = course[(seg + 1) % n];
    const Eigen::Vector2d pa(a.x, a.y);
    const Eigen::Vector2d d(b.x - a.x, b.y - a.y);
    const double t = std::clamp((position - pa).dot(d) / d.squaredNorm(), 0.0, 1.0);
    const double dist = (position - (pa + t * d)).norm();
    if (dist < best.distance) {
      best.distance = dist;
      best.index = seg;
      best.point = course.on_segment(seg, t);
    }
  }
  return best;
}

Eigen::Vector2d reference_point(const SimState& state, const VehicleParams& params,
                                ReferencePoint ref) {
  const Eigen::Vector2d heading(std::cos(state.theta), std::sin(state.theta));
  const Eigen::Vector2d anchor(state.x, state.y);
  // Offset of the requested point ahead of the anchor along the heading.
  const double anchor_from_rear = state.anchor == Anchor::RearAxle ? 0.0 : params.lr;
  double from_rear = 0.0;
  switch (ref) {
    case ReferencePoint::RearAxle: from_rear = 0.0; break;
    case ReferencePoint::CenterOfGravity: from_rear = params.lr; break;
    case ReferencePoint::FrontAxle: from_rear = params.wheelbase; break;
  }
  return anchor + (from_rear - anchor_from_rear) * heading;
}

TrackingError tracking_errors(const Course& course, const SimState& state,
                              const VehicleParams& params, ReferencePoint ref,
                              std::optional<std::size_t> hint) {
  const Eigen::Vector2d p = reference_point(state, params, ref);
  const NearestResult near = nearest_point(course, p, hint);
  TrackingError err;
  err.nearest = near.point;
  err.index = near.index;
  err.theta_p = near.point.theta;
  err.kappa = near.point.kappa;
  err.e = -std::sin(err.theta_p) * (p.x() - near.point.x) + std::cos(err.theta_p) * (p.y() - near.point.y);
  err.theta_e = wrap_angle(state.theta - err.theta_p);
  err.omega_p = err.kappa * state.vx;
  return err;
}

LookaheadResult lookahead_point(const Course& course, const Eigen::Vector2d& rear_axle,
                                double heading, double lookahead, std::optional<std::size_t> hint) {
  if (!(lookahead > 0.0)) throw DomainError("lookahead must be positive");
  const NearestResult near = nearest_point(course, rear_axle, hint);
  LookaheadResult out;
  out.index = near.index;
  out.goal = course.at_arc(near.point.s + lookahead);
  out.e_ld = -std::sin(heading) * (out.goal.x - rear_axle.x()) +
             std::cos(heading) * (out.goal.y - rear_axle.y());
  return out;
}

void write_course_csv(std::ostream& out, const Course& course) {
  out << "s,x,y,theta_p,kappa\n";
  out.precision(17);
  for (const auto& p : course.points()) {
    out << p.s << ',' << p.x << ',' << p.y << ',' << p.theta << ',' << p.kappa << '\n';
  }
}

Course read_course_csv(std::istream& in, bool closed) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("s,x,y,theta_p,kappa", 0) != 0) {
    throw ConfigError("course CSV must start with header s,x,y,theta_p,kappa");
  }
  std::vector<PathPoint> pts;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    PathPoint p;
    char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    if (!(ls >> p.s >> c1 >> p.x >> c2 >> p.y >> c3 >> p.theta >> c4 >> p.kappa) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',') {
      throw ConfigError("malformed course CSV row " + std::to_string(row));
    }
    pts.push_back(p);
  }
  return Course(std::move(pts), closed);
}

}  // namespace pathtrack
