#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dsk3dom/grid.hpp"
#include "dsk3dom/measurement.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

struct BoxShape {
  Vec3 half_extents = Vec3::Ones();
};

struct CylinderShape {
  double radius = 0.5;
  double half_height = 0.5;  // axis along local z
};

/// Scene object moving at constant velocity (zero velocity = static).
struct ObjectSpec {
  std::string id;
  std::variant<BoxShape, CylinderShape> shape;
  Pose pose;  // pose at t = 0
  Vec3 velocity = Vec3::Zero();

  bool dynamic() const { return velocity.squaredNorm() > 0.0; }
  Pose pose_at(double t) const {
    Pose p = pose;
    p.translation += t * velocity;
    return p;
  }
  bool contains(const Vec3& world_point, double t) const;
};

/// Virtual spinning LiDAR: `channels` elevation rings spread uniformly over
/// [-vertical_fov_deg, +vertical_fov_deg], full azimuth sweep per frame.
struct LidarSpec {
  int channels = 16;
  double vertical_fov_deg = 15.0;
  double azimuth_step_deg = 1.0;
  double max_range = 10.0;
  double rate = 10.0;  // frames per second
};

struct EgoWaypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
};

struct Scenario {
  std::string name;
  std::vector<ObjectSpec> objects;
  std::vector<EgoWaypoint> ego_waypoints;  // piecewise-linear, sorted by t
  LidarSpec lidar;
  double duration = 1.0;
  std::optional<double> ground_plane;  // z height of an infinite ground

  Vec3 ego_position(double t) const;
  Pose ego_pose(double t) const {
    Pose p;
    p.translation = ego_position(t);
    return p;
  }
  int frame_count() const {
    return static_cast<int>(std::lround(duration * lidar.rate));
  }
  double frame_time(int n) const { return n / lidar.rate; }
};

/// Per-ray metadata kept alongside the world-frame ray for the log format.
struct SimulatedRay {
  int channel = 0;
  double azimuth_deg = 0.0;
  Ray ray;
};

struct SimulatedFrame {
  double timestamp = 0.0;
  Pose sensor_pose;
  std::vector<SimulatedRay> rays;
};

/// Casts the full scan pattern from the ego pose at time t against all
/// objects at their time-t poses (plus the ground plane if configured).
/// Deterministic: no randomness anywhere.
SimulatedFrame simulate_frame(const Scenario& scenario, double t);

MeasurementFrame to_measurement(const SimulatedFrame& frame);

/// Per-cell ground-truth label by cell-center containment: 'D' when a
/// dynamic object contains the center, else 'S' when a static object does,
/// else 'F'.
std::vector<char> ground_truth_labels(const Scenario& scenario, double t, const GridSpec& spec);

// Ray-primitive intersections in world frame; return the smallest ray
// parameter t >= 0 with origin + t*dir on the surface, or nullopt.
std::optional<double> ray_box(const Vec3& origin, const Vec3& dir, const BoxShape& box,
                              const Pose& pose);
std::optional<double> ray_cylinder(const Vec3& origin, const Vec3& dir,
                                   const CylinderShape& cylinder, const Pose& pose);

}  // namespace dsk3dom
