#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsk3dom/bba.hpp"
#include "dsk3dom/grid.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

/// One sensor ray in world coordinates. hit=true means the endpoint is a
/// surface return; hit=false a max-range miss.
struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 endpoint = Vec3::Zero();
  bool hit = false;
};

struct MeasurementFrame {
  double timestamp = 0.0;
  Pose sensor_pose;
  std::vector<Ray> rays;
};

struct KernelParams {
  double sigma_0 = 0.1;  // kernel scale
  double length = 0.5;   // length scale l (m)
};

/// Compactly supported sparse kernel; zero for d >= l, sigma_0 at d = 0.
double kernel(double d, const KernelParams& params);

/// Closest point on the segment [origin, endpoint] to the query, used as
/// the ray's free-space measurement. Returns nullopt when the projection
/// clamps onto the endpoint of a hit ray (that point is the occupied
/// measurement, not free evidence).
std::optional<Vec3> free_point_on_ray(const Ray& ray, const Vec3& query);

/// Dense per-cell kernel evidence for one frame. Candidate cells are found
/// by walking each ray through the lattice and padding by ceil(l/edge)
/// cells; every (cell, ray) pair is counted once. Accumulation runs over a
/// fixed number of ray chunks merged in chunk order, so results are
/// deterministic regardless of thread count.
class EvidenceAccumulator {
 public:
  void accumulate(const MeasurementFrame& frame, const GridSpec& spec,
                  const KernelParams& params);

  const std::vector<double>& occupied() const { return occ_; }
  const std::vector<double>& free() const { return free_; }

  EvidenceVector at(std::int64_t flat, double r_0) const {
    return {occ_[static_cast<std::size_t>(flat)], free_[static_cast<std::size_t>(flat)], r_0};
  }

 private:
  std::vector<double> occ_;
  std::vector<double> free_;
  // per-chunk scratch, merged in chunk order
  std::vector<std::vector<double>> chunk_occ_;
  std::vector<std::vector<double>> chunk_free_;
  std::vector<std::vector<std::uint32_t>> chunk_stamp_;
};

}  // namespace dsk3dom
