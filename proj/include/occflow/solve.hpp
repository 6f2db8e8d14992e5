#pragma once

#include <functional>

#include "occflow/loss.hpp"
#include "occflow/types.hpp"

namespace occflow {

struct SolveConfig {
  int levels = 4;
  int iterations_per_level = 300;
  double step_size = 0.05;  // pixel units, per level
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double convergence_tol = 1e-6;  // relative loss change over a 10-iteration window
  uint64_t seed = 0;
};

struct SolverState {
  FlowField F_b, F_f;
  FlowField m_b, m_f;  // first moments
  FlowField v_b, v_f;  // second moments
  long iteration = 0;
  std::vector<double> loss_history;
};

struct LevelTrace {
  int level = 1;  // 1-based, finest = 1
  int height = 0, width = 0;
  std::vector<double> total, p1st, p2nd, smooth;
  int iterations = 0;
  bool converged = false;
};

struct ConvergenceReport {
  std::vector<LevelTrace> levels;  // in execution order, coarsest first
};

struct EstimateResult {
  FlowField F_b, F_f;
  ConvergenceReport report;
};

// Coarse-to-fine joint descent on both flows. Zero init at the coarsest level,
// upsampled flows seed each finer level. Deterministic for a given config.
EstimateResult estimate_flow(const Image& I_prev, const Image& I_t, const Image& I_next,
                             const SolveConfig& scfg, const LossConfig& lcfg);

// Bias-corrected Adam update in place; increments state.iteration.
void adam_step(SolverState& state, const FlowField& grad_b, const FlowField& grad_f,
               const SolveConfig& cfg);

// Central difference (L(F + h e_i) - L(F - h e_i)) / 2h over every component.
FlowField finite_diff_gradient(const std::function<double(const FlowField&)>& objective,
                               const FlowField& F, double h);

struct GradcheckReport {
  double max_rel_error = 0.0;
  int trials = 0;
  int worst_trial = -1;
  int worst_y = -1, worst_x = -1;
  char worst_component = 'u';
  bool worst_in_forward = false;
  double worst_analytic = 0.0, worst_numeric = 0.0;
};

// Compares loss_gradient against finite_diff_gradient of the frozen-weight
// objective on random instances. `corrupt` injects a unit error into the
// analytic gradient to prove the comparison can fail.
GradcheckReport gradcheck(const SolveConfig& scfg, const LossConfig& lcfg, int size, int trials,
                          bool corrupt = false);

}  // namespace occflow
