#pragma once

#include "occflow/types.hpp"

namespace occflow {

enum class OcclusionMode { Soft, HardMin, Off };

struct LossConfig {
  double lambda_p = 1.0;
  double lambda_s = 1.0;
  double lambda_p1st = 0.06;
  double lambda_p2nd = 8.0;
  double lambda_s2nd = 10.0;
  double epsilon = 1e-4;
  double kappa = 2.0;
  double alpha = 10.0;
  std::vector<Direction> directions = directions_default();
  OcclusionMode occlusion_mode = OcclusionMode::Soft;
  // 2: squared second differences (default); 1: literal first-difference form.
  int smooth_order = 2;
  // Empty = geometric default 1, 1/(2*sqrt(2)), 1/8, ... indexed finest-first.
  std::vector<double> level_weights;

  double level_weight(int level) const;
};

struct LossBreakdown {
  double total = 0.0;
  double p1st = 0.0;   // unweighted by lambdas / level weight
  double p2nd = 0.0;
  double smooth = 0.0;
  double level_weight = 1.0;
  ScalarField E_b, E_f;  // per-pixel channel-mean |photometric error|
  ScalarField w_b, w_f;  // first-order occlusion weights actually applied
};

// Per-term occlusion weight fields. Soft and off modes share one field pair
// across the first- and second-order terms; hard-min selects per term.
struct TermWeights {
  ScalarField p1_b, p1_f;
  std::vector<ScalarField> p2_b, p2_f;  // one per gradient direction
};

double charbonnier(double x, double epsilon, double kappa);
double charbonnier_deriv(double x, double epsilon, double kappa);
ScalarField charbonnier(const ScalarField& x, double epsilon, double kappa);

struct PhotometricError {
  ScalarField E;      // channel-mean absolute difference
  Image signed_diff;  // per-channel target - warped source
  ValidityMask valid;
};

PhotometricError photometric_error(const Image& target, const Image& source, const FlowField& flow);

// Eq-style softmax complement weights from the two error magnitudes; computed
// in shifted form, stable for |E| up to ~1e4. w_b + w_f = 1 pointwise.
std::pair<ScalarField, ScalarField> occlusion_weights(const ScalarField& E_b, const ScalarField& E_f);

double loss_p1st(const Image& I_t, const Image& I_prev, const Image& I_next, const FlowField& F_b,
                 const FlowField& F_f, const ScalarField& w_b, const ScalarField& w_f,
                 const LossConfig& cfg);
double loss_p2nd(const Image& I_t, const Image& I_prev, const Image& I_next, const FlowField& F_b,
                 const FlowField& F_f, const ScalarField& w_b, const ScalarField& w_f,
                 const LossConfig& cfg);
double loss_smooth(const FlowField& F_b, const FlowField& F_f, const Image& I_t, const LossConfig& cfg);

LossBreakdown total_loss(const FrameTriplet& frames, const FlowField& F_b, const FlowField& F_f,
                         const LossConfig& cfg, int level = 1);

// Weight fields the current flows induce under cfg.occlusion_mode.
TermWeights compute_term_weights(const FrameTriplet& frames, const FlowField& F_b,
                                 const FlowField& F_f, const LossConfig& cfg);

// Objective with the occlusion weights held constant. This is the function the
// analytic gradient differentiates (weights are stop-gradient), so numerical
// checks must difference this rather than total_loss.
LossBreakdown total_loss_with_weights(const FrameTriplet& frames, const FlowField& F_b,
                                      const FlowField& F_f, const TermWeights& weights,
                                      const LossConfig& cfg, int level = 1);

// Exact gradient of total_loss w.r.t. every flow component (weights frozen).
std::pair<FlowField, FlowField> loss_gradient(const FrameTriplet& frames, const FlowField& F_b,
                                              const FlowField& F_f, const LossConfig& cfg,
                                              int level = 1);

// One-pass breakdown plus gradients, sharing the warp work between them.
LossBreakdown total_loss_and_gradient(const FrameTriplet& frames, const FlowField& F_b,
                                      const FlowField& F_f, const LossConfig& cfg, int level,
                                      FlowField* grad_b, FlowField* grad_f);

}  // namespace occflow
