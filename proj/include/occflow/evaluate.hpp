#pragma once

#include "occflow/flowio.hpp"
#include "occflow/types.hpp"

namespace occflow {

// ALL / NOC / OCC endpoint-error aggregation over a KITTI-style ground-truth
// pair. OCC here is the occluded remainder: occ-valid pixels not in noc.
struct EvalReport {
  double epe_all = 0.0, epe_noc = 0.0, epe_occ = 0.0;
  double fl_all = 0.0;  // fraction with epe > 3px and > 5% of gt magnitude
  size_t count_all = 0, count_noc = 0, count_occ = 0;
  bool all_empty = false, noc_empty = false, occ_empty = false;
};

// Per-pixel Euclidean distance where gt is valid; 0 and invalid elsewhere.
ScalarField epe_map(const FlowField& est, const FlowFile& gt, ValidityMask* valid_out = nullptr);

EvalReport evaluate(const FlowField& est, const FlowFile& gt_occ, const FlowFile& gt_noc);

}  // namespace occflow
