#include "occflow/loss.hpp"

#include <algorithm>
#include <cmath>

#include "occflow/gradient.hpp"
#include "occflow/warp.hpp"

namespace occflow {

double LossConfig::level_weight(int level) const {
  if (level < 1) fail(Err::BadDims, "level_weight: level index is 1-based");
  if (!level_weights.empty()) {
    if (level > static_cast<int>(level_weights.size()))
      fail(Err::BadDims, "level_weight: no weight configured for level " + std::to_string(level));
    return level_weights[static_cast<size_t>(level) - 1];
  }
  return std::pow(1.0 / (2.0 * std::sqrt(2.0)), level - 1);
}

namespace {

struct Charb {
  double eps2;
  double kappa;
  bool quartic;
  Charb(double eps, double k) : eps2(eps * eps), kappa(k), quartic(k == 2.0) {}
  double value(double x) const {
    double y = x * x + eps2;
    return quartic ? y * y : std::pow(y, kappa);
  }
  double deriv(double x) const {
    double y = x * x + eps2;
    return quartic ? 4.0 * x * y : 2.0 * kappa * x * std::pow(y, kappa - 1.0);
  }
};

// Everything the photometric terms of one direction (prev/backward or
// next/forward) need: first-order warp and errors, and per gradient direction
// the warped source-gradient images with their combined validity.
struct SideData {
  WarpResult warp1;
  Image e1;       // target - warped source, per channel
  ScalarField E;  // channel-mean |e1|
  std::vector<WarpResult> warp2;
  std::vector<Image> e2;
  std::vector<ValidityMask> v2;
};

struct Prep {
  SideData bwd, fwd;
  std::vector<GradientResult> gt;        // target image gradients
  std::vector<ScalarField> edge_weight;  // exp(-alpha * channel-mean |grad I_t|)
};

void check_dims(const Image& a, const Image& b, const char* who) {
  if (!a.same_dims(b)) fail(Err::DimMismatch, std::string(who) + ": image dims differ");
}

void check_flow_dims(const Image& a, const FlowField& f, const char* who) {
  if (a.height != f.height || a.width != f.width)
    fail(Err::DimMismatch, std::string(who) + ": flow dims differ from images");
}

SideData make_side(const Image& target, const Image& source, const FlowField& flow,
                   const std::vector<GradientResult>& gt, const std::vector<Direction>& dirs,
                   bool need_second) {
  SideData s;
  s.warp1 = bilinear_sample(source, flow);
  const int h = target.height, w = target.width, cn = target.channels;
  s.e1 = Image(h, w, cn);
  s.E = ScalarField(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0;
      for (int c = 0; c < cn; ++c) {
        double e = target.at(y, x, c) - s.warp1.warped.at(y, x, c);
        s.e1.at(y, x, c) = e;
        acc += std::abs(e);
      }
      s.E.at(y, x) = acc / cn;
    }
  if (!need_second) return s;

  s.warp2 = warp_gradient_images(source, flow, dirs);
  s.e2.reserve(dirs.size());
  s.v2.reserve(dirs.size());
  for (size_t di = 0; di < dirs.size(); ++di) {
    Image e(h, w, cn);
    ValidityMask v(h, w, true);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        v.set(y, x, s.warp2[di].valid.at(y, x) && gt[di].valid.at(y, x));
        for (int c = 0; c < cn; ++c)
          e.at(y, x, c) = gt[di].grad.at(y, x, c) - s.warp2[di].warped.at(y, x, c);
      }
    s.e2.push_back(std::move(e));
    s.v2.push_back(std::move(v));
  }
  return s;
}

Prep prepare(const FrameTriplet& frames, const FlowField& F_b, const FlowField& F_f,
             const LossConfig& cfg, bool need_second) {
  check_dims(frames.curr, frames.prev, "total_loss");
  check_dims(frames.curr, frames.next, "total_loss");
  check_flow_dims(frames.curr, F_b, "total_loss");
  check_flow_dims(frames.curr, F_f, "total_loss");

  Prep p;
  const int h = frames.curr.height, w = frames.curr.width, cn = frames.curr.channels;
  p.gt.reserve(cfg.directions.size());
  p.edge_weight.reserve(cfg.directions.size());
  for (Direction d : cfg.directions) {
    p.gt.push_back(directional_gradient(frames.curr, d));
    ScalarField ew(h, w, 1.0);
    const GradientResult& g = p.gt.back();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double acc = 0;
        for (int c = 0; c < cn; ++c) acc += std::abs(g.grad.at(y, x, c));
        ew.at(y, x) = std::exp(-cfg.alpha * acc / cn);
      }
    p.edge_weight.push_back(std::move(ew));
  }
  p.bwd = make_side(frames.curr, frames.prev, F_b, p.gt, cfg.directions, need_second);
  p.fwd = make_side(frames.curr, frames.next, F_f, p.gt, cfg.directions, need_second);
  return p;
}

// Weighted Charbonnier mean of one error image over its valid set. Adds
// gscale * d(term)/dflow into grad when given.
double charbonnier_term(const Image& err, const ValidityMask& valid, const Image& jac_u,
                        const Image& jac_v, const ScalarField& wgt, const Charb& ch, double gscale,
                        FlowField* grad, const char* who) {
  const int h = err.height, w = err.width, cn = err.channels;
  size_t n = valid.count();
  if (n == 0) fail(Err::AllPixelsInvalid, std::string(who) + ": no valid pixels");
  const double inv_n = 1.0 / static_cast<double>(n);
  double sum = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!valid.at(y, x)) continue;
      double wp = wgt.at(y, x);
      double acc = 0, du = 0, dv = 0;
      for (int c = 0; c < cn; ++c) {
        double e = err.at(y, x, c);
        acc += ch.value(e);
        if (grad) {
          double dd = ch.deriv(e);
          du -= dd * jac_u.at(y, x, c);  // d(err)/du = -jac_u
          dv -= dd * jac_v.at(y, x, c);
        }
      }
      sum += wp * acc / cn;
      if (grad) {
        grad->u_at(y, x) += gscale * wp * du / cn * inv_n;
        grad->v_at(y, x) += gscale * wp * dv / cn * inv_n;
      }
    }
  return sum * inv_n;
}

double p1st_side(const SideData& s, const ScalarField& wgt, const Charb& ch, double gscale,
                 FlowField* grad) {
  return charbonnier_term(s.e1, s.warp1.valid, s.warp1.jac_u, s.warp1.jac_v, wgt, ch, gscale, grad,
                          "loss_p1st");
}

double p2nd_side(const SideData& s, size_t di, const ScalarField& wgt, const Charb& ch,
                 double gscale, FlowField* grad) {
  return charbonnier_term(s.e2[di], s.v2[di], s.warp2[di].jac_u, s.warp2[di].jac_v, wgt, ch, gscale,
                          grad, "loss_p2nd");
}

// Edge-weighted squared flow differences along d for both flows. order 2 uses
// the second difference f(p-d) - 2f(p) + f(p+d); order 1 the plain difference.
double smooth_dir(const FlowField& F_b, const FlowField& F_f, const ScalarField& edge_weight,
                  Direction d, int order, double gscale, FlowField* gb, FlowField* gf) {
  const int h = F_b.height, w = F_b.width;
  size_t n = 0;
  for (int y = 0; y < h; ++y) {
    int yb = y - d.dy, yf = y + d.dy;
    if (yb < 0 || yb >= h) continue;
    if (order == 2 && (yf < 0 || yf >= h)) continue;
    for (int x = 0; x < w; ++x) {
      int xb = x - d.dx, xf = x + d.dx;
      if (xb < 0 || xb >= w) continue;
      if (order == 2 && (xf < 0 || xf >= w)) continue;
      ++n;
    }
  }
  if (n == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);

  double sum = 0;
  auto accum = [&](const FlowField& F, FlowField* g) {
    for (int y = 0; y < h; ++y) {
      int yb = y - d.dy, yf = y + d.dy;
      if (yb < 0 || yb >= h) continue;
      if (order == 2 && (yf < 0 || yf >= h)) continue;
      for (int x = 0; x < w; ++x) {
        int xb = x - d.dx, xf = x + d.dx;
        if (xb < 0 || xb >= w) continue;
        if (order == 2 && (xf < 0 || xf >= w)) continue;
        double ew = edge_weight.at(y, x);
        double su, sv;
        if (order == 2) {
          su = F.u_at(yb, xb) - 2.0 * F.u_at(y, x) + F.u_at(yf, xf);
          sv = F.v_at(yb, xb) - 2.0 * F.v_at(y, x) + F.v_at(yf, xf);
        } else {
          su = F.u_at(y, x) - F.u_at(yb, xb);
          sv = F.v_at(y, x) - F.v_at(yb, xb);
        }
        sum += ew * (su * su + sv * sv);
        if (g) {
          double cu = gscale * 2.0 * ew * su * inv_n;
          double cv = gscale * 2.0 * ew * sv * inv_n;
          if (order == 2) {
            g->u_at(yb, xb) += cu;
            g->u_at(y, x) -= 2.0 * cu;
            g->u_at(yf, xf) += cu;
            g->v_at(yb, xb) += cv;
            g->v_at(y, x) -= 2.0 * cv;
            g->v_at(yf, xf) += cv;
          } else {
            g->u_at(y, x) += cu;
            g->u_at(yb, xb) -= cu;
            g->v_at(y, x) += cv;
            g->v_at(yb, xb) -= cv;
          }
        }
      }
    }
  };
  accum(F_b, gb);
  accum(F_f, gf);
  return sum * inv_n;
}

ScalarField constant_field(int h, int w, double v) { return ScalarField(h, w, v); }

// Hard selection between the two per-pixel Charbonnier term values: weight 1
// on the smaller where both directions are valid, 0.5 where only one (or
// neither) is usable so the comparison against the unweighted mode stays
// pointwise. Ties split 0.5/0.5.
void hard_select(const Image& err_b, const ValidityMask& vb, const Image& err_f,
                 const ValidityMask& vf, const Charb& ch, ScalarField& wb, ScalarField& wf) {
  const int h = err_b.height, w = err_b.width, cn = err_b.channels;
  wb = ScalarField(h, w, 0.5);
  wf = ScalarField(h, w, 0.5);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!vb.at(y, x) || !vf.at(y, x)) continue;
      double db = 0, df = 0;
      for (int c = 0; c < cn; ++c) {
        db += ch.value(err_b.at(y, x, c));
        df += ch.value(err_f.at(y, x, c));
      }
      if (db < df) {
        wb.at(y, x) = 1.0;
        wf.at(y, x) = 0.0;
      } else if (df < db) {
        wb.at(y, x) = 0.0;
        wf.at(y, x) = 1.0;
      }
    }
}

TermWeights weights_from_prep(const Prep& p, const LossConfig& cfg) {
  TermWeights tw;
  const int h = p.bwd.E.height, w = p.bwd.E.width;
  const size_t nd = cfg.directions.size();
  switch (cfg.occlusion_mode) {
    case OcclusionMode::Soft: {
      auto [wb, wf] = occlusion_weights(p.bwd.E, p.fwd.E);
      tw.p1_b = wb;
      tw.p1_f = wf;
      tw.p2_b.assign(nd, wb);
      tw.p2_f.assign(nd, wf);
      break;
    }
    case OcclusionMode::Off: {
      tw.p1_b = constant_field(h, w, 0.5);
      tw.p1_f = constant_field(h, w, 0.5);
      tw.p2_b.assign(nd, tw.p1_b);
      tw.p2_f.assign(nd, tw.p1_f);
      break;
    }
    case OcclusionMode::HardMin: {
      Charb ch(cfg.epsilon, cfg.kappa);
      hard_select(p.bwd.e1, p.bwd.warp1.valid, p.fwd.e1, p.fwd.warp1.valid, ch, tw.p1_b, tw.p1_f);
      tw.p2_b.resize(nd);
      tw.p2_f.resize(nd);
      for (size_t di = 0; di < nd; ++di)
        hard_select(p.bwd.e2[di], p.bwd.v2[di], p.fwd.e2[di], p.fwd.v2[di], ch, tw.p2_b[di],
                    tw.p2_f[di]);
      break;
    }
  }
  return tw;
}

LossBreakdown assemble(const Prep& p, const FlowField& F_b, const FlowField& F_f,
                       const TermWeights& tw, const LossConfig& cfg, int level, FlowField* grad_b,
                       FlowField* grad_f) {
  Charb ch(cfg.epsilon, cfg.kappa);
  const double lw = cfg.level_weight(level);
  const double s1 = lw * cfg.lambda_p * cfg.lambda_p1st;
  const double s2 = lw * cfg.lambda_p * cfg.lambda_p2nd;
  const double ss = lw * cfg.lambda_s * cfg.lambda_s2nd;

  if (grad_b) *grad_b = FlowField(p.bwd.E.height, p.bwd.E.width);
  if (grad_f) *grad_f = FlowField(p.bwd.E.height, p.bwd.E.width);

  LossBreakdown bd;
  bd.level_weight = lw;
  bd.p1st = p1st_side(p.bwd, tw.p1_b, ch, s1, grad_b) + p1st_side(p.fwd, tw.p1_f, ch, s1, grad_f);
  bd.p2nd = 0;
  for (size_t di = 0; di < cfg.directions.size(); ++di)
    bd.p2nd += p2nd_side(p.bwd, di, tw.p2_b[di], ch, s2, grad_b) +
               p2nd_side(p.fwd, di, tw.p2_f[di], ch, s2, grad_f);
  bd.smooth = 0;
  for (size_t di = 0; di < cfg.directions.size(); ++di)
    bd.smooth += smooth_dir(F_b, F_f, p.edge_weight[di], cfg.directions[di], cfg.smooth_order, ss,
                            grad_b, grad_f);
  bd.total = lw * (cfg.lambda_p * (cfg.lambda_p1st * bd.p1st + cfg.lambda_p2nd * bd.p2nd) +
                   cfg.lambda_s * cfg.lambda_s2nd * bd.smooth);
  bd.E_b = p.bwd.E;
  bd.E_f = p.fwd.E;
  bd.w_b = tw.p1_b;
  bd.w_f = tw.p1_f;
  return bd;
}

}  // namespace

double charbonnier(double x, double epsilon, double kappa) {
  return Charb(epsilon, kappa).value(x);
}

double charbonnier_deriv(double x, double epsilon, double kappa) {
  return Charb(epsilon, kappa).deriv(x);
}

ScalarField charbonnier(const ScalarField& x, double epsilon, double kappa) {
  Charb ch(epsilon, kappa);
  ScalarField out(x.height, x.width);
  for (size_t i = 0; i < x.data.size(); ++i) out.data[i] = ch.value(x.data[i]);
  return out;
}

PhotometricError photometric_error(const Image& target, const Image& source,
                                   const FlowField& flow) {
  check_dims(target, source, "photometric_error");
  check_flow_dims(target, flow, "photometric_error");
  SideData s = make_side(target, source, flow, {}, {}, false);
  return {std::move(s.E), std::move(s.e1), std::move(s.warp1.valid)};
}

std::pair<ScalarField, ScalarField> occlusion_weights(const ScalarField& E_b,
                                                      const ScalarField& E_f) {
  if (E_b.height != E_f.height || E_b.width != E_f.width)
    fail(Err::DimMismatch, "occlusion_weights: field dims differ");
  ScalarField wb(E_b.height, E_b.width), wf(E_b.height, E_b.width);
  for (size_t i = 0; i < E_b.data.size(); ++i) {
    double eb = E_b.data[i], ef = E_f.data[i];
    double m = std::max(eb, ef);
    double a = std::exp(ef - m);  // numerator of w_b
    double b = std::exp(eb - m);  // numerator of w_f
    double den = a + b;
    wb.data[i] = a / den;
    wf.data[i] = b / den;
  }
  return {std::move(wb), std::move(wf)};
}

double loss_p1st(const Image& I_t, const Image& I_prev, const Image& I_next, const FlowField& F_b,
                 const FlowField& F_f, const ScalarField& w_b, const ScalarField& w_f,
                 const LossConfig& cfg) {
  FrameTriplet frames{I_prev, I_t, I_next};
  Prep p = prepare(frames, F_b, F_f, cfg, false);
  Charb ch(cfg.epsilon, cfg.kappa);
  return p1st_side(p.bwd, w_b, ch, 0, nullptr) + p1st_side(p.fwd, w_f, ch, 0, nullptr);
}

double loss_p2nd(const Image& I_t, const Image& I_prev, const Image& I_next, const FlowField& F_b,
                 const FlowField& F_f, const ScalarField& w_b, const ScalarField& w_f,
                 const LossConfig& cfg) {
  FrameTriplet frames{I_prev, I_t, I_next};
  Prep p = prepare(frames, F_b, F_f, cfg, true);
  Charb ch(cfg.epsilon, cfg.kappa);
  double sum = 0;
  for (size_t di = 0; di < cfg.directions.size(); ++di)
    sum += p2nd_side(p.bwd, di, w_b, ch, 0, nullptr) + p2nd_side(p.fwd, di, w_f, ch, 0, nullptr);
  return sum;
}

double loss_smooth(const FlowField& F_b, const FlowField& F_f, const Image& I_t,
                   const LossConfig& cfg) {
  check_flow_dims(I_t, F_b, "loss_smooth");
  check_flow_dims(I_t, F_f, "loss_smooth");
  double sum = 0;
  for (Direction d : cfg.directions) {
    GradientResult g = directional_gradient(I_t, d);
    ScalarField ew(I_t.height, I_t.width, 1.0);
    for (int y = 0; y < I_t.height; ++y)
      for (int x = 0; x < I_t.width; ++x) {
        double acc = 0;
        for (int c = 0; c < I_t.channels; ++c) acc += std::abs(g.grad.at(y, x, c));
        ew.at(y, x) = std::exp(-cfg.alpha * acc / I_t.channels);
      }
    sum += smooth_dir(F_b, F_f, ew, d, cfg.smooth_order, 0, nullptr, nullptr);
  }
  return sum;
}

TermWeights compute_term_weights(const FrameTriplet& frames, const FlowField& F_b,
                                 const FlowField& F_f, const LossConfig& cfg) {
  Prep p = prepare(frames, F_b, F_f, cfg, true);
  return weights_from_prep(p, cfg);
}

LossBreakdown total_loss(const FrameTriplet& frames, const FlowField& F_b, const FlowField& F_f,
                         const LossConfig& cfg, int level) {
  Prep p = prepare(frames, F_b, F_f, cfg, true);
  TermWeights tw = weights_from_prep(p, cfg);
  return assemble(p, F_b, F_f, tw, cfg, level, nullptr, nullptr);
}

LossBreakdown total_loss_with_weights(const FrameTriplet& frames, const FlowField& F_b,
                                      const FlowField& F_f, const TermWeights& weights,
                                      const LossConfig& cfg, int level) {
  Prep p = prepare(frames, F_b, F_f, cfg, true);
  return assemble(p, F_b, F_f, weights, cfg, level, nullptr, nullptr);
}

std::pair<FlowField, FlowField> loss_gradient(const FrameTriplet& frames, const FlowField& F_b,
                                              const FlowField& F_f, const LossConfig& cfg,
                                              int level) {
  Prep p = prepare(frames, F_b, F_f, cfg, true);
  TermWeights tw = weights_from_prep(p, cfg);
  FlowField gb, gf;
  assemble(p, F_b, F_f, tw, cfg, level, &gb, &gf);
  return {std::move(gb), std::move(gf)};
}

LossBreakdown total_loss_and_gradient(const FrameTriplet& frames, const FlowField& F_b,
                                      const FlowField& F_f, const LossConfig& cfg, int level,
                                      FlowField* grad_b, FlowField* grad_f) {
  Prep p = prepare(frames, F_b, F_f, cfg, true);
  TermWeights tw = weights_from_prep(p, cfg);
  return assemble(p, F_b, F_f, tw, cfg, level, grad_b, grad_f);
}

}  // namespace occflow
