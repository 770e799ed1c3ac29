#include "dsk3dom/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsk3dom {

bool ObjectSpec::contains(const Vec3& world_point, double t) const {
  const Vec3 local = pose_at(t).inverse().apply(world_point);
  if (const auto* box = std::get_if<BoxShape>(&shape)) {
    return std::abs(local.x()) <= box->half_extents.x() &&
           std::abs(local.y()) <= box->half_extents.y() &&
           std::abs(local.z()) <= box->half_extents.z();
  }
  const auto& cyl = std::get<CylinderShape>(shape);
  return local.head<2>().squaredNorm() <= cyl.radius * cyl.radius &&
         std::abs(local.z()) <= cyl.half_height;
}

Vec3 Scenario::ego_position(double t) const {
  if (ego_waypoints.empty()) return Vec3::Zero();
  if (t <= ego_waypoints.front().t) return ego_waypoints.front().position;
  for (std::size_t i = 1; i < ego_waypoints.size(); ++i) {
    const auto& a = ego_waypoints[i - 1];
    const auto& b = ego_waypoints[i];
    if (t <= b.t) {
      const double span = b.t - a.t;
      const double u = span > 0.0 ? (t - a.t) / span : 1.0;
      return a.position + u * (b.position - a.position);
    }
  }
  return ego_waypoints.back().position;
}

std::optional<double> ray_box(const Vec3& origin, const Vec3& dir, const BoxShape& box,
                              const Pose& pose) {
  const Pose inv = pose.inverse();
  const Vec3 o = inv.apply(origin);
  const Vec3 d = inv.rotation * dir;
  double t0 = 0.0;
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const double he = box.half_extents[a];
    if (d[a] == 0.0) {
      if (std::abs(o[a]) > he) return std::nullopt;
      continue;
    }
    double ta = (-he - o[a]) / d[a];
    double tb = (he - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

std::optional<double> ray_cylinder(const Vec3& origin, const Vec3& dir,
                                   const CylinderShape& cylinder, const Pose& pose) {
  const Pose inv = pose.inverse();
  const Vec3 o = inv.apply(origin);
  const Vec3 d = inv.rotation * dir;
  double best = std::numeric_limits<double>::infinity();

  // lateral surface: quadratic in the xy plane
  const double a = d.head<2>().squaredNorm();
  if (a > 0.0) {
    const double b = 2.0 * o.head<2>().dot(d.head<2>());
    const double c = o.head<2>().squaredNorm() - cylinder.radius * cylinder.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (t >= 0.0 && t < best && std::abs(o.z() + t * d.z()) <= cylinder.half_height)
          best = t;
      }
    }
  }
  // end caps
  if (d.z() != 0.0) {
    for (double zc : {-cylinder.half_height, cylinder.half_height}) {
      const double t = (zc - o.z()) / d.z();
      if (t >= 0.0 && t < best &&
          (o.head<2>() + t * d.head<2>()).squaredNorm() <= cylinder.radius * cylinder.radius)
        best = t;
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

SimulatedFrame simulate_frame(const Scenario& scenario, double t) {
  SimulatedFrame frame;
  frame.timestamp = t;
  frame.sensor_pose = scenario.ego_pose(t);
  const Vec3 origin = frame.sensor_pose.translation;
  const LidarSpec& lidar = scenario.lidar;

  std::vector<Pose> poses;
  poses.reserve(scenario.objects.size());
  for (const auto& obj : scenario.objects) poses.push_back(obj.pose_at(t));

  const int azimuth_steps = static_cast<int>(std::lround(360.0 / lidar.azimuth_step_deg));
  frame.rays.reserve(static_cast<std::size_t>(lidar.channels) * azimuth_steps);

  for (int ch = 0; ch < lidar.channels; ++ch) {
    const double elev_deg =
        lidar.channels > 1
            ? -lidar.vertical_fov_deg + 2.0 * lidar.vertical_fov_deg * ch / (lidar.channels - 1)
            : 0.0;
    const double elev = elev_deg * M_PI / 180.0;
    for (int az = 0; az < azimuth_steps; ++az) {
      const double azimuth_deg = az * lidar.azimuth_step_deg;
      const double azim = azimuth_deg * M_PI / 180.0;
      const Vec3 dir(std::cos(elev) * std::cos(azim), std::cos(elev) * std::sin(azim),
                     std::sin(elev));

      double nearest = lidar.max_range;
      bool hit = false;
      for (std::size_t i = 0; i < scenario.objects.size(); ++i) {
        std::optional<double> ti;
        if (const auto* box = std::get_if<BoxShape>(&scenario.objects[i].shape))
          ti = ray_box(origin, dir, *box, poses[i]);
        else
          ti = ray_cylinder(origin, dir, std::get<CylinderShape>(scenario.objects[i].shape),
                            poses[i]);
        if (ti && *ti < nearest) {
          nearest = *ti;
          hit = true;
        }
      }
      if (scenario.ground_plane && dir.z() != 0.0) {
        const double tg = (*scenario.ground_plane - origin.z()) / dir.z();
        if (tg >= 0.0 && tg < nearest) {
          nearest = tg;
          hit = true;
        }
      }

      SimulatedRay sr;
      sr.channel = ch;
      sr.azimuth_deg = azimuth_deg;
      sr.ray.origin = origin;
      sr.ray.endpoint = origin + nearest * dir;
      sr.ray.hit = hit;
      frame.rays.push_back(sr);
    }
  }
  return frame;
}

MeasurementFrame to_measurement(const SimulatedFrame& frame) {
  MeasurementFrame m;
  m.timestamp = frame.timestamp;
  m.sensor_pose = frame.sensor_pose;
  m.rays.reserve(frame.rays.size());
  for (const auto& sr : frame.rays) m.rays.push_back(sr.ray);
  return m;
}

std::vector<char> ground_truth_labels(const Scenario& scenario, double t, const GridSpec& spec) {
  std::vector<char> labels(static_cast<std::size_t>(spec.cell_count()), 'F');
  for (std::int64_t c = 0; c < spec.cell_count(); ++c) {
    const Vec3 center = spec.cell_center(c);
    for (const auto& obj : scenario.objects) {
      if (!obj.contains(center, t)) continue;
      if (obj.dynamic()) {
        labels[static_cast<std::size_t>(c)] = 'D';
        break;  // dynamic wins over static
      }
      labels[static_cast<std::size_t>(c)] = 'S';
    }
  }
  return labels;
}

}  // namespace dsk3dom
