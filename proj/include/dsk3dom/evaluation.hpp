#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsk3dom/grid.hpp"
#include "dsk3dom/types.hpp"

namespace dsk3dom {

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // ordered by threshold
  double auc = 0.0;
};

enum class RocTarget { Occupied, Dynamic };

struct NoPositivesError : std::runtime_error {
  NoPositivesError() : std::runtime_error("ROC sweep: no positive samples after filtering") {}
};
struct NoNegativesError : std::runtime_error {
  NoNegativesError() : std::runtime_error("ROC sweep: no negative samples after filtering") {}
};

struct LabeledScore {
  double score = 0.0;
  bool positive = false;
};

struct ZeroDynamicMassError : std::runtime_error {
  ZeroDynamicMassError()
      : std::runtime_error("object velocity: zero persistent dynamic mass over member cells") {}
};

/// ROC points at the given thresholds (prediction positive when
/// score > threshold), in input threshold order.
std::vector<RocPoint> roc_points_at(std::span<const LabeledScore> samples,
                                    std::span<const double> thresholds);

/// Full sweep: n_thresholds points uniform over [0, 1], AUC by trapezoidal
/// rule over (fpr, tpr) sorted by fpr with (0,0)/(1,1) anchors.
RocCurve roc_from_scores(std::span<const LabeledScore> samples, int n_thresholds);

/// Builds the ROC sample set for one frame: cells passing the zeta0 filter
/// (m(Omega) <= zeta0), scored by P(D)+P(S) against D-or-S labels for the
/// Occupied curve, or P(D) against D labels for the Dynamic curve.
void collect_roc_samples(std::span<const CellState> cells, std::span<const char> labels,
                         RocTarget target, double zeta0, std::vector<LabeledScore>& out);

/// Object velocity: rho_p-weighted mean of member-cell velocities.
Vec3 object_velocity(std::span<const CellState> cells,
                     std::span<const std::int64_t> member_cells);

struct VelocityRecord {
  double t = 0.0;
  std::string object_id;
  Vec3 v_est = Vec3::Zero();
  Vec3 v_true = Vec3::Zero();
  double err_norm = 0.0;
};

}  // namespace dsk3dom
