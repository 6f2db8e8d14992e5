#include "occflow/evaluate.hpp"

#include <cmath>

namespace occflow {

ScalarField epe_map(const FlowField& est, const FlowFile& gt, ValidityMask* valid_out) {
  if (est.height != gt.flow.height || est.width != gt.flow.width)
    fail(Err::DimMismatch, "epe_map: estimate and ground truth dims differ");
  ScalarField out(est.height, est.width);
  if (valid_out) *valid_out = gt.valid;
  for (int y = 0; y < est.height; ++y)
    for (int x = 0; x < est.width; ++x) {
      if (!gt.valid.at(y, x)) continue;
      double du = est.u_at(y, x) - gt.flow.u_at(y, x);
      double dv = est.v_at(y, x) - gt.flow.v_at(y, x);
      out.at(y, x) = std::sqrt(du * du + dv * dv);
    }
  return out;
}

EvalReport evaluate(const FlowField& est, const FlowFile& gt_occ, const FlowFile& gt_noc) {
  if (gt_occ.flow.height != gt_noc.flow.height || gt_occ.flow.width != gt_noc.flow.width)
    fail(Err::DimMismatch, "evaluate: occ/noc ground truth dims differ");
  for (int y = 0; y < gt_occ.flow.height; ++y)
    for (int x = 0; x < gt_occ.flow.width; ++x)
      if (gt_noc.valid.at(y, x) && !gt_occ.valid.at(y, x))
        fail(Err::NocNotSubset, "evaluate: noc valid pixels must be a subset of occ valid pixels");

  ScalarField epe = epe_map(est, gt_occ);

  EvalReport rep;
  double sum_all = 0, sum_noc = 0, sum_occ = 0;
  size_t outliers = 0;
  for (int y = 0; y < gt_occ.flow.height; ++y)
    for (int x = 0; x < gt_occ.flow.width; ++x) {
      if (!gt_occ.valid.at(y, x)) continue;
      double e = epe.at(y, x);
      double mag = std::hypot(gt_occ.flow.u_at(y, x), gt_occ.flow.v_at(y, x));
      sum_all += e;
      ++rep.count_all;
      if (e > 3.0 && e > 0.05 * mag) ++outliers;
      if (gt_noc.valid.at(y, x)) {
        sum_noc += e;
        ++rep.count_noc;
      } else {
        sum_occ += e;
        ++rep.count_occ;
      }
    }
  rep.all_empty = rep.count_all == 0;
  rep.noc_empty = rep.count_noc == 0;
  rep.occ_empty = rep.count_occ == 0;
  if (rep.count_all) {
    rep.epe_all = sum_all / static_cast<double>(rep.count_all);
    rep.fl_all = static_cast<double>(outliers) / static_cast<double>(rep.count_all);
  }
  if (rep.count_noc) rep.epe_noc = sum_noc / static_cast<double>(rep.count_noc);
  if (rep.count_occ) rep.epe_occ = sum_occ / static_cast<double>(rep.count_occ);
  return rep;
}

}  // namespace occflow
