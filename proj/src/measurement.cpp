#include "dsk3dom/measurement.hpp"

#include <algorithm>
#include <cmath>

#include "dsk3dom/parallel.hpp"
#include "dsk3dom/raycast.hpp"

namespace dsk3dom {

namespace {
// Fixed chunk count so parallel accumulation merges in a machine-independent
// order.
constexpr std::size_t kEvidenceChunks = 8;

struct PadOffset {
  int di, dj, dk;
};

// Offsets within Chebyshev radius ceil(l/edge) whose cell center can lie
// within l of some point of the traversed voxel. The exact box-distance test
// trims the dead corner shells of the enumeration cube.
std::vector<PadOffset> make_pad_offsets(double edge, double l) {
  const int pad = static_cast<int>(std::ceil(l / edge));
  std::vector<PadOffset> offsets;
  for (int dk = -pad; dk <= pad; ++dk)
    for (int dj = -pad; dj <= pad; ++dj)
      for (int di = -pad; di <= pad; ++di) {
        const double dx = std::max(0.0, (std::abs(di) - 0.5)) * edge;
        const double dy = std::max(0.0, (std::abs(dj) - 0.5)) * edge;
        const double dz = std::max(0.0, (std::abs(dk) - 0.5)) * edge;
        if (std::sqrt(dx * dx + dy * dy + dz * dz) < l) offsets.push_back({di, dj, dk});
      }
  return offsets;
}
}  // namespace

double kernel(double d, const KernelParams& params) {
  if (d >= params.length) return 0.0;
  const double ratio = d / params.length;
  const double angle = 2.0 * M_PI * ratio;
  const double value =
      params.sigma_0 *
      ((2.0 + std::cos(angle)) * (1.0 - ratio) / 3.0 + std::sin(angle) / (2.0 * M_PI));
  // The closed form dips to ~-1e-17 just below d = l; clamp to keep the
  // kernel non-negative.
  return std::max(0.0, value);
}

std::optional<Vec3> free_point_on_ray(const Ray& ray, const Vec3& query) {
  const Vec3 dir = ray.endpoint - ray.origin;
  const double len2 = dir.squaredNorm();
  if (!(len2 > 0.0)) return std::nullopt;
  const double t = (query - ray.origin).dot(dir) / len2;
  if (ray.hit && t >= 1.0) return std::nullopt;
  return ray.origin + std::clamp(t, 0.0, 1.0) * dir;
}

void EvidenceAccumulator::accumulate(const MeasurementFrame& frame, const GridSpec& spec,
                                     const KernelParams& params) {
  const std::size_t ncells = static_cast<std::size_t>(spec.cell_count());
  occ_.assign(ncells, 0.0);
  free_.assign(ncells, 0.0);
  if (frame.rays.empty()) return;

  const double l = params.length;
  const std::vector<PadOffset> offsets = make_pad_offsets(spec.cell_edge, l);
  // Segment portions farther than l + edge from the grid cannot influence
  // any in-grid cell center.
  const Vec3 margin = (l + spec.cell_edge) * Vec3::Ones();
  const Vec3 clip_min = spec.min_corner - margin;
  const Vec3 clip_max = spec.max_corner() + margin;

  const std::size_t nchunks = std::min(kEvidenceChunks, frame.rays.size());
  chunk_occ_.resize(nchunks);
  chunk_free_.resize(nchunks);
  chunk_stamp_.resize(nchunks);

  parallel_chunks(frame.rays.size(), nchunks, [&](std::size_t lo, std::size_t hi,
                                                  std::size_t chunk) {
    auto& occ = chunk_occ_[chunk];
    auto& free = chunk_free_[chunk];
    auto& stamp = chunk_stamp_[chunk];
    occ.assign(ncells, 0.0);
    free.assign(ncells, 0.0);
    stamp.assign(ncells, 0u);

    for (std::size_t r = lo; r < hi; ++r) {
      const Ray& ray = frame.rays[r];
      const Vec3 dir = ray.endpoint - ray.origin;
      const double len2 = dir.squaredNorm();
      if (!(len2 > 0.0)) continue;
      const auto span = clip_segment(ray.origin, ray.endpoint, clip_min, clip_max);
      if (!span) continue;
      const Vec3 a = ray.origin + span->first * dir;
      const Vec3 b = ray.origin + span->second * dir;
      const std::uint32_t ray_id = static_cast<std::uint32_t>(r - lo) + 1u;

      traverse_lattice(a, b, spec, [&](std::int64_t vi, std::int64_t vj, std::int64_t vk) {
        for (const PadOffset& off : offsets) {
          const std::int64_t ci = vi + off.di;
          const std::int64_t cj = vj + off.dj;
          const std::int64_t ck = vk + off.dk;
          if (ci < 0 || cj < 0 || ck < 0 || ci >= spec.dims[0] || cj >= spec.dims[1] ||
              ck >= spec.dims[2])
            continue;
          const std::size_t flat = static_cast<std::size_t>(
              spec.flat(static_cast<int>(ci), static_cast<int>(cj), static_cast<int>(ck)));
          if (stamp[flat] == ray_id) continue;
          stamp[flat] = ray_id;

          const Vec3 center = spec.cell_center(static_cast<std::int64_t>(flat));
          const double t = (center - ray.origin).dot(dir) / len2;
          if (!(ray.hit && t >= 1.0)) {
            const Vec3 fp = ray.origin + std::clamp(t, 0.0, 1.0) * dir;
            free[flat] += kernel((center - fp).norm(), params);
          }
          if (ray.hit) occ[flat] += kernel((center - ray.endpoint).norm(), params);
        }
        return true;
      });
    }
  });

  // Merge per-chunk sums in chunk order.
  parallel_for(ncells, [&](std::size_t c) {
    double o = 0.0, f = 0.0;
    for (std::size_t chunk = 0; chunk < nchunks; ++chunk) {
      o += chunk_occ_[chunk][c];
      f += chunk_free_[chunk][c];
    }
    occ_[c] = o;
    free_[c] = f;
  });
}

}  // namespace dsk3dom
