#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pathtrack/vehicle.hpp"

namespace pathtrack {

struct PathPoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // path heading
  double kappa = 0.0;  // signed curvature, positive turning left
  double s = 0.0;      // arc length from the first point
};

/// Immutable discretised reference path.
class Course {
 public:
  /// Validates ordering, spacing (against `nominal_spacing`, or the median
  /// spacing when zero) and heading/chord consistency.
  Course(std::vector<PathPoint> points, bool closed, double nominal_spacing = 0.0);

  const std::vector<PathPoint>& points() const noexcept { return points_; }
  const PathPoint& operator[](std::size_t i) const { return points_[i]; }
  std::size_t size() const noexcept { return points_.size(); }
  bool closed() const noexcept { return closed_; }
  double spacing() const noexcept { return spacing_; }
  /// Total arc length; for closed courses includes the closing segment.
  double length() const noexcept { return length_; }

  /// Number of segments (closed courses have one extra closing segment).
  std::size_t segments() const noexcept { return closed_ ? size() : size() - 1; }
  /// Point at arc length `s`, linearly interpolated. Closed courses wrap;
  /// open courses throw EndOfCourse when `s` is past the end.
  PathPoint at_arc(double s) const;
  /// Interpolated point on segment `seg` at fraction t in [0, 1].
  PathPoint on_segment(std::size_t seg, double t) const;

 private:
  std::vector<PathPoint> points_;
  bool closed_;
  double spacing_;
  double length_;
};

Course gen_straight(double length, double spacing);
/// Counter-clockwise circle about the origin starting at (R, 0).
Course gen_circle(double radius, double spacing);
/// Straight approach, quintic smoothstep lateral shift, straight exit.
Course gen_lane_change(double approach, double transition, double offset, double exit,
                       double spacing);
/// y = A sin(2 pi x / wavelength) for x in [0, length].
Course gen_sine(double amplitude, double wavelength, double length, double spacing);

struct NearestResult {
  PathPoint point;        // projection onto the polyline
  std::size_t index = 0;  // segment start index
  double distance = 0.0;
};

/// Nearest point on the course. Without a hint the whole course is searched;
/// with a hint only a forward window (`window` metres of arc) starting at the
/// hinted segment is searched, so progress is monotone.
NearestResult nearest_point(const Course& course, const Eigen::Vector2d& position,
                            std::optional<std::size_t> hint = std::nullopt,
                            double window = 5.0);

enum class ReferencePoint { CenterOfGravity, FrontAxle, RearAxle };

/// Position of a vehicle reference point given a rear-axle or CG anchored state.
Eigen::Vector2d reference_point(const SimState& state, const VehicleParams& params,
                                ReferencePoint ref);

struct TrackingError {
  double e = 0.0;        // signed lateral error of the requested reference point
  double theta_e = 0.0;  // wrap(theta - theta_p)
  double omega_p = 0.0;  // kappa * vx
  double kappa = 0.0;
  double theta_p = 0.0;
  std::size_t index = 0;
  PathPoint nearest;
};

/// Signed distance from `ref` to the tangent line at its nearest path point.
/// Positive when the vehicle is left of the path.
TrackingError tracking_errors(const Course& course, const SimState& state,
                              const VehicleParams& params, ReferencePoint ref,
                              std::optional<std::size_t> hint = std::nullopt);

struct LookaheadResult {
  PathPoint goal;
  double e_ld = 0.0;  // lateral offset of the goal in the vehicle heading frame
  std::size_t index = 0;
};

/// Goal point `lookahead` metres of arc ahead of the point nearest to the
/// rear axle. Throws EndOfCourse when an open course ends first.
LookaheadResult lookahead_point(const Course& course, const Eigen::Vector2d& rear_axle,
                                double heading, double lookahead,
                                std::optional<std::size_t> hint = std::nullopt);

/// CSV with header `s,x,y,theta_p,kappa`.
void write_course_csv(std::ostream& out, const Course& course);
Course read_course_csv(std::istream& in, bool closed);

}  // namespace pathtrack
