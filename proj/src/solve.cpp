#include "occflow/solve.hpp"

#include <algorithm>
#include <cmath>

#include "occflow/pyramid.hpp"
#include "occflow/rng.hpp"

namespace occflow {

namespace {

void check_state_dims(const SolverState& st, const FlowField& g, const char* who) {
  if (st.F_b.height != g.height || st.F_b.width != g.width)
    fail(Err::DimMismatch, std::string(who) + ": gradient dims differ from state");
}

void adam_update_component(std::vector<double>& x, std::vector<double>& m, std::vector<double>& v,
                           const std::vector<double>& g, double lr, double b1, double b2,
                           double eps, double bc1, double bc2) {
  for (size_t i = 0; i < x.size(); ++i) {
    m[i] = b1 * m[i] + (1 - b1) * g[i];
    v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    x[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

SolverState make_state(int h, int w) {
  SolverState st;
  st.F_b = FlowField(h, w);
  st.F_f = FlowField(h, w);
  st.m_b = FlowField(h, w);
  st.m_f = FlowField(h, w);
  st.v_b = FlowField(h, w);
  st.v_f = FlowField(h, w);
  return st;
}

// Converged when the total loss moved by less than tol (relatively) across
// the last 10 recorded iterations.
bool window_converged(const std::vector<double>& hist, double tol) {
  const size_t win = 10;
  if (hist.size() < win + 1) return false;
  double now = hist.back();
  double then = hist[hist.size() - 1 - win];
  return std::abs(now - then) <= tol * std::max(std::abs(then), 1e-300);
}

}  // namespace

void adam_step(SolverState& state, const FlowField& grad_b, const FlowField& grad_f,
               const SolveConfig& cfg) {
  check_state_dims(state, grad_b, "adam_step");
  check_state_dims(state, grad_f, "adam_step");
  if (!all_finite(grad_b.u) || !all_finite(grad_b.v) || !all_finite(grad_f.u) ||
      !all_finite(grad_f.v))
    fail(Err::NonFiniteGradient, "adam_step: gradient contains non-finite values");

  state.iteration += 1;
  double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.iteration));
  double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.iteration));
  adam_update_component(state.F_b.u, state.m_b.u, state.v_b.u, grad_b.u, cfg.step_size,
                        cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_component(state.F_b.v, state.m_b.v, state.v_b.v, grad_b.v, cfg.step_size,
                        cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_component(state.F_f.u, state.m_f.u, state.v_f.u, grad_f.u, cfg.step_size,
                        cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
  adam_update_component(state.F_f.v, state.m_f.v, state.v_f.v, grad_f.v, cfg.step_size,
                        cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bc1, bc2);
}

EstimateResult estimate_flow(const Image& I_prev, const Image& I_t, const Image& I_next,
                             const SolveConfig& scfg, const LossConfig& lcfg) {
  if (!I_t.same_dims(I_prev) || !I_t.same_dims(I_next))
    fail(Err::DimMismatch, "estimate_flow: triplet dims differ");
  {
    int h = I_t.height, w = I_t.width;
    for (int k = 1; k < scfg.levels; ++k) {
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    }
    if (h < 4 || w < 4)
      fail(Err::ImageTooSmall, "estimate_flow: images too small for " +
                                   std::to_string(scfg.levels) + " pyramid levels");
  }
  if (scfg.iterations_per_level < 1 || scfg.step_size <= 0)
    fail(Err::BadDims, "estimate_flow: iterations >= 1 and step_size > 0 required");

  Pyramid pp = build_pyramid(I_prev, scfg.levels);
  Pyramid pt = build_pyramid(I_t, scfg.levels);
  Pyramid pn = build_pyramid(I_next, scfg.levels);

  EstimateResult res;
  FlowField F_b, F_f;
  for (int level = scfg.levels; level >= 1; --level) {
    const Image& im_t = pt.level(level);
    if (level == scfg.levels) {
      F_b = FlowField(im_t.height, im_t.width);
      F_f = FlowField(im_t.height, im_t.width);
    } else {
      F_b = upsample_flow(F_b, im_t.height, im_t.width);
      F_f = upsample_flow(F_f, im_t.height, im_t.width);
    }
    FrameTriplet frames{pp.level(level), im_t, pn.level(level)};

    SolverState st = make_state(im_t.height, im_t.width);
    st.F_b = std::move(F_b);
    st.F_f = std::move(F_f);

    LevelTrace trace;
    trace.level = level;
    trace.height = im_t.height;
    trace.width = im_t.width;

    FlowField gb, gf;
    for (int it = 0; it < scfg.iterations_per_level; ++it) {
      LossBreakdown bd = total_loss_and_gradient(frames, st.F_b, st.F_f, lcfg, level, &gb, &gf);
      if (!std::isfinite(bd.total))
        fail(Err::NonFiniteLoss, "estimate_flow: non-finite loss at level " +
                                     std::to_string(level) + ", iteration " + std::to_string(it));
      st.loss_history.push_back(bd.total);
      trace.total.push_back(bd.total);
      trace.p1st.push_back(bd.p1st);
      trace.p2nd.push_back(bd.p2nd);
      trace.smooth.push_back(bd.smooth);
      trace.iterations = it + 1;
      if (window_converged(st.loss_history, scfg.convergence_tol)) {
        trace.converged = true;
        break;
      }
      adam_step(st, gb, gf, scfg);
    }
    F_b = std::move(st.F_b);
    F_f = std::move(st.F_f);
    res.report.levels.push_back(std::move(trace));
  }
  res.F_b = std::move(F_b);
  res.F_f = std::move(F_f);
  return res;
}

FlowField finite_diff_gradient(const std::function<double(const FlowField&)>& objective,
                               const FlowField& F, double h) {
  FlowField grad(F.height, F.width);
  FlowField probe = F;
  for (size_t i = 0; i < F.u.size(); ++i) {
    double keep = probe.u[i];
    probe.u[i] = keep + h;
    double lp = objective(probe);
    probe.u[i] = keep - h;
    double lm = objective(probe);
    probe.u[i] = keep;
    grad.u[i] = (lp - lm) / (2 * h);
  }
  for (size_t i = 0; i < F.v.size(); ++i) {
    double keep = probe.v[i];
    probe.v[i] = keep + h;
    double lp = objective(probe);
    probe.v[i] = keep - h;
    double lm = objective(probe);
    probe.v[i] = keep;
    grad.v[i] = (lp - lm) / (2 * h);
  }
  return grad;
}

namespace {

Image random_image(Rng& rng, int h, int w, int cn) {
  Image img(h, w, cn);
  for (double& v : img.data) v = rng.uniform();
  return img;
}

// Random flows whose sample points stay clear of the bilinear lattice, where
// the interpolant is only piecewise differentiable and a central difference
// across the seam would be meaningless.
FlowField random_flow_off_lattice(Rng& rng, int h, int w, double amp, double margin) {
  FlowField f(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double u = rng.uniform(-amp, amp);
      double v = rng.uniform(-amp, amp);
      double sx = x + u, sy = y + v;
      double frx = sx - std::floor(sx), fry = sy - std::floor(sy);
      if (frx < margin) u += margin - frx;
      if (frx > 1 - margin) u -= frx - (1 - margin);
      if (fry < margin) v += margin - fry;
      if (fry > 1 - margin) v -= fry - (1 - margin);
      f.u_at(y, x) = u;
      f.v_at(y, x) = v;
    }
  return f;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

GradcheckReport gradcheck(const SolveConfig& scfg, const LossConfig& lcfg, int size, int trials,
                          bool corrupt) {
  if (size < 4) fail(Err::BadDims, "gradcheck: size must be >= 4");
  if (trials < 1) fail(Err::BadDims, "gradcheck: trials must be >= 1");
  const double h_step = 1e-3;
  const double margin = 0.02;

  GradcheckReport rep;
  rep.trials = trials;
  Rng rng(scfg.seed * 0x9e3779b97f4a7c15ULL + 1);

  for (int trial = 0; trial < trials; ++trial) {
    FrameTriplet frames{random_image(rng, size, size, 1), random_image(rng, size, size, 1),
                        random_image(rng, size, size, 1)};
    FlowField F_b = random_flow_off_lattice(rng, size, size, 1.5, margin);
    FlowField F_f = random_flow_off_lattice(rng, size, size, 1.5, margin);

    TermWeights frozen = compute_term_weights(frames, F_b, F_f, lcfg);
    auto [ga_b, ga_f] = loss_gradient(frames, F_b, F_f, lcfg, 1);
    if (corrupt) ga_b.u_at(size / 2, size / 2) += 1.0;

    FlowField gn_b = finite_diff_gradient(
        [&](const FlowField& F) {
          return total_loss_with_weights(frames, F, F_f, frozen, lcfg, 1).total;
        },
        F_b, h_step);
    FlowField gn_f = finite_diff_gradient(
        [&](const FlowField& F) {
          return total_loss_with_weights(frames, F_b, F, frozen, lcfg, 1).total;
        },
        F_f, h_step);

    auto scan = [&](const FlowField& ga, const FlowField& gn, bool fwd) {
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          struct {
            double a, n;
            char comp;
          } pairs[2] = {{ga.u_at(y, x), gn.u_at(y, x), 'u'}, {ga.v_at(y, x), gn.v_at(y, x), 'v'}};
          for (auto& pr : pairs) {
            double e = rel_err(pr.a, pr.n);
            if (e > rep.max_rel_error) {
              rep.max_rel_error = e;
              rep.worst_trial = trial;
              rep.worst_y = y;
              rep.worst_x = x;
              rep.worst_component = pr.comp;
              rep.worst_in_forward = fwd;
              rep.worst_analytic = pr.a;
              rep.worst_numeric = pr.n;
            }
          }
        }
    };
    scan(ga_b, gn_b, false);
    scan(ga_f, gn_f, true);
  }
  return rep;
}

}  // namespace occflow
