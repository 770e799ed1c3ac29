#include "dsk3dom/evaluation.hpp"

#include <algorithm>
#include <cmath>

namespace dsk3dom {

std::vector<RocPoint> roc_points_at(std::span<const LabeledScore> samples,
                                    std::span<const double> thresholds) {
  std::size_t positives = 0;
  for (const auto& s : samples) positives += s.positive ? 1 : 0;
  const std::size_t negatives = samples.size() - positives;
  if (positives == 0) throw NoPositivesError();
  if (negatives == 0) throw NoNegativesError();

  // One pass over samples sorted by score; threshold sweep by cursor.
  std::vector<LabeledScore> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const LabeledScore& a, const LabeledScore& b) { return a.score < b.score; });
  std::vector<std::size_t> order(thresholds.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });

  std::vector<RocPoint> points(thresholds.size());
  std::size_t cursor = 0;
  std::size_t tp = positives;
  std::size_t fp = negatives;
  for (std::size_t oi : order) {
    const double zeta = thresholds[oi];
    while (cursor < sorted.size() && sorted[cursor].score <= zeta) {
      if (sorted[cursor].positive)
        --tp;
      else
        --fp;
      ++cursor;
    }
    points[oi] = {zeta, static_cast<double>(tp) / positives, static_cast<double>(fp) / negatives};
  }
  return points;
}

RocCurve roc_from_scores(std::span<const LabeledScore> samples, int n_thresholds) {
  n_thresholds = std::max(2, n_thresholds);
  std::vector<double> thresholds(static_cast<std::size_t>(n_thresholds));
  for (int i = 0; i < n_thresholds; ++i)
    thresholds[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n_thresholds - 1);

  RocCurve curve;
  curve.points = roc_points_at(samples, thresholds);

  struct XY {
    double fpr, tpr;
  };
  std::vector<XY> xy;
  xy.reserve(curve.points.size() + 2);
  xy.push_back({0.0, 0.0});
  for (const auto& p : curve.points) xy.push_back({p.fpr, p.tpr});
  xy.push_back({1.0, 1.0});
  std::sort(xy.begin(), xy.end(), [](const XY& a, const XY& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  double auc = 0.0;
  for (std::size_t i = 1; i < xy.size(); ++i)
    auc += (xy[i].fpr - xy[i - 1].fpr) * (xy[i].tpr + xy[i - 1].tpr) / 2.0;
  curve.auc = auc;
  return curve;
}

void collect_roc_samples(std::span<const CellState> cells, std::span<const char> labels,
                         RocTarget target, double zeta0, std::vector<LabeledScore>& out) {
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const Bba& bba = cells[c].bba;
    if (zeta0 < bba.mass(FocalElement::Unknown)) continue;  // insufficiently observed
    const CellProbabilities p = pignistic(bba);
    LabeledScore s;
    if (target == RocTarget::Occupied) {
      s.score = p.p_dyn + p.p_stat;
      s.positive = labels[c] == 'D' || labels[c] == 'S';
    } else {
      s.score = p.p_dyn;
      s.positive = labels[c] == 'D';
    }
    out.push_back(s);
  }
}

Vec3 object_velocity(std::span<const CellState> cells,
                     std::span<const std::int64_t> member_cells) {
  Vec3 num = Vec3::Zero();
  double den = 0.0;
  for (std::int64_t c : member_cells) {
    const CellState& state = cells[static_cast<std::size_t>(c)];
    num += state.rho_p * state.mean_velocity;
    den += state.rho_p;
  }
  if (!(den > 0.0)) throw ZeroDynamicMassError();
  return num / den;
}

}  // namespace dsk3dom
