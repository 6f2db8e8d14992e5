// occflow: estimate / evaluate / visualize / gradcheck / synth for the
// occlusion-weighted variational flow engine.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "occflow/config.hpp"
#include "occflow/evaluate.hpp"
#include "occflow/flowio.hpp"
#include "occflow/solve.hpp"
#include "occflow/synth.hpp"

namespace fs = std::filesystem;
using namespace occflow;

namespace {

constexpr double kGradcheckTol = 1e-4;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Err::IoFailure:
    case Err::BadMagic:
    case Err::TruncatedFile:
    case Err::DimOverflow:
    case Err::NotSixteenBit:
    case Err::BadChannelCount:
    case Err::UnsupportedFormat:
      return 2;
    case Err::DimMismatch:
    case Err::NocNotSubset:
    case Err::BadDims:
    case Err::ImageTooSmall:
    case Err::TooManyLevels:
      return 3;
    case Err::NonFiniteLoss:
    case Err::NonFiniteGradient:
      return 4;
    default:
      return 1;
  }
}

std::string lower_ext(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

FlowFile read_flow_any(const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "flo") return read_flo(path);
  if (ext == "png") return read_kitti_flow(path);
  fail(Err::UnsupportedFormat, path + ": flow files must be .flo or .png");
}

void write_flow_any(const FlowFile& f, const std::string& path) {
  std::string ext = lower_ext(path);
  if (ext == "flo") {
    write_flo(f, path);
    return;
  }
  if (ext == "png") {
    write_kitti_flow(f, path);
    return;
  }
  fail(Err::UnsupportedFormat, path + ": flow files must be .flo or .png");
}

Image mask_to_image(const ValidityMask& m) {
  Image img(m.height, m.width, 1);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) img.at(y, x) = m.at(y, x) ? 1.0 : 0.0;
  return img;
}

Image scalar_to_image(const ScalarField& f) {
  Image img(f.height, f.width, 1);
  for (size_t i = 0; i < f.data.size(); ++i) img.data[i] = std::clamp(f.data[i], 0.0, 1.0);
  return img;
}

struct EstimateArgs {
  std::string prev, curr, next, out_fwd, out_bwd;
  std::string out_weight_fwd, out_weight_bwd, out_vis_fwd, out_vis_bwd;
};

int cmd_estimate(const EstimateArgs& a, const RunConfig& cfg) {
  Image prev = read_image(a.prev);
  Image curr = read_image(a.curr);
  Image next = read_image(a.next);

  EstimateResult res = estimate_flow(prev, curr, next, cfg.solve, cfg.loss);

  std::printf("# level\titer\ttotal\tp1st\tp2nd\tsmooth\n");
  for (const LevelTrace& t : res.report.levels)
    for (size_t i = 0; i < t.total.size(); ++i)
      std::printf("%d\t%zu\t%.9g\t%.9g\t%.9g\t%.9g\n", t.level, i, t.total[i], t.p1st[i],
                  t.p2nd[i], t.smooth[i]);

  FlowFile fwd{res.F_f, ValidityMask(curr.height, curr.width, true)};
  FlowFile bwd{res.F_b, ValidityMask(curr.height, curr.width, true)};
  write_flow_any(fwd, a.out_fwd);
  write_flow_any(bwd, a.out_bwd);

  if (!a.out_weight_fwd.empty() || !a.out_weight_bwd.empty() || !a.out_vis_fwd.empty() ||
      !a.out_vis_bwd.empty()) {
    FrameTriplet frames{prev, curr, next};
    LossBreakdown bd = total_loss(frames, res.F_b, res.F_f, cfg.loss, 1);
    if (!a.out_weight_fwd.empty()) write_image(scalar_to_image(bd.w_f), a.out_weight_fwd);
    if (!a.out_weight_bwd.empty()) write_image(scalar_to_image(bd.w_b), a.out_weight_bwd);
    if (!a.out_vis_fwd.empty()) write_image(flow_to_color(res.F_f), a.out_vis_fwd);
    if (!a.out_vis_bwd.empty()) write_image(flow_to_color(res.F_b), a.out_vis_bwd);
  }
  return 0;
}

int cmd_evaluate(const std::string& est_path, const std::string& occ_path,
                 const std::string& noc_path) {
  FlowFile est = read_flow_any(est_path);
  FlowFile gt_occ = read_flow_any(occ_path);
  FlowFile gt_noc = read_flow_any(noc_path);
  EvalReport rep = evaluate(est.flow, gt_occ, gt_noc);

  std::printf("region   epe        pixels\n");
  std::printf("ALL      %-10.6g %zu\n", rep.epe_all, rep.count_all);
  std::printf("NOC      %-10.6g %zu\n", rep.epe_noc, rep.count_noc);
  std::printf("OCC      %-10.6g %zu\n", rep.epe_occ, rep.count_occ);
  std::printf("Fl-all   %-10.6g\n", rep.fl_all);
  if (rep.all_empty) std::printf("warning: ALL region empty\n");
  if (rep.noc_empty) std::printf("warning: NOC region empty\n");
  if (rep.occ_empty) std::printf("warning: OCC region empty\n");

  std::printf("format_version=1\n");
  std::printf("epe_all=%.10g\n", rep.epe_all);
  std::printf("epe_noc=%.10g\n", rep.epe_noc);
  std::printf("epe_occ=%.10g\n", rep.epe_occ);
  std::printf("fl_all=%.10g\n", rep.fl_all);
  std::printf("count_all=%zu\n", rep.count_all);
  std::printf("count_noc=%zu\n", rep.count_noc);
  std::printf("count_occ=%zu\n", rep.count_occ);
  return 0;
}

int cmd_visualize(const std::string& flow_path, const std::string& out_path, double max_radius) {
  FlowFile f = read_flow_any(flow_path);
  double radius = max_radius;
  if (radius <= 0) {
    // auto: 99th-percentile magnitude
    std::vector<double> mags(f.flow.size());
    for (size_t i = 0; i < mags.size(); ++i) mags[i] = std::hypot(f.flow.u[i], f.flow.v[i]);
    size_t idx = static_cast<size_t>(0.99 * (mags.size() - 1));
    std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
    radius = mags[idx];
  }
  write_image(flow_to_color(f.flow, radius), out_path);
  return 0;
}

int cmd_gradcheck(int size, int trials, uint64_t seed, const std::string& mode, bool corrupt) {
  RunConfig cfg;
  cfg.solve.seed = seed;
  std::vector<OcclusionMode> modes;
  if (mode == "all")
    modes = {OcclusionMode::Soft, OcclusionMode::HardMin, OcclusionMode::Off};
  else
    modes = {parse_occlusion_mode(mode)};

  double worst = 0;
  std::printf("format_version=1\n");
  for (OcclusionMode m : modes) {
    cfg.loss.occlusion_mode = m;
    GradcheckReport rep = gradcheck(cfg.solve, cfg.loss, size, trials, corrupt);
    std::printf("max_rel_error_%s=%.6g\n", occlusion_mode_name(m).c_str(), rep.max_rel_error);
    worst = std::max(worst, rep.max_rel_error);
  }
  std::printf("max_rel_error=%.6g\n", worst);
  std::printf("tolerance=%.6g\n", kGradcheckTol);
  return worst <= kGradcheckTol ? 0 : 1;
}

struct SynthArgs {
  std::string scene;
  std::string out_dir;
  int height = 0, width = 0;  // 0 = scene default
  double dx = 2, dy = 0;
  int block_w = 24, block_h = 24, speed_x = 3, speed_y = 0;
  uint64_t seed = 0;
};

int cmd_synth(const SynthArgs& a) {
  SynthScene sc;
  if (a.scene == "translate") {
    int h = a.height > 0 ? a.height : 64, w = a.width > 0 ? a.width : 64;
    sc = synth_translate(h, w, a.dx, a.dy, a.seed);
  } else if (a.scene == "occluder") {
    OccluderParams p;
    if (a.height > 0) p.height = a.height;
    if (a.width > 0) p.width = a.width;
    p.block_w = a.block_w;
    p.block_h = a.block_h;
    p.speed_x = a.speed_x;
    p.speed_y = a.speed_y;
    p.seed = a.seed;
    sc = synth_occluder(p);
  } else {
    fail(Err::BadConfig, "synth: scene must be translate|occluder");
  }
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) fail(Err::IoFailure, "cannot create directory " + a.out_dir);
  auto path = [&](const char* name) { return (fs::path(a.out_dir) / name).string(); };
  write_image(sc.frames.prev, path("prev.png"));
  write_image(sc.frames.curr, path("curr.png"));
  write_image(sc.frames.next, path("next.png"));
  write_flo(sc.gt_fwd, path("gt_fwd.flo"));
  write_flo(sc.gt_bwd, path("gt_bwd.flo"));
  write_image(mask_to_image(sc.occ_fwd), path("occ_fwd.png"));
  write_image(mask_to_image(sc.occ_bwd), path("occ_bwd.png"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Occlusion-weighted bidirectional optical flow estimation"};
  app.require_subcommand(1);
  app.footer("Environment: OCCFLOW_THREADS caps internal row parallelism (default 1).");

  RunConfig cfg;
  std::string config_path;
  // Flag storage; only values the user actually passed override the config file.
  int f_levels = 0, f_iters = 0;
  double f_step = 0;
  std::string f_mode, f_dirs;
  uint64_t f_seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value config file");
    sub->add_option("--levels", f_levels, "pyramid levels");
    sub->add_option("--iters", f_iters, "iterations per level");
    sub->add_option("--step", f_step, "Adam step size in pixels");
    sub->add_option("--occlusion-mode", f_mode, "soft|hard_min|off")
        ->check(CLI::IsMember({"soft", "hard_min", "off"}));
    sub->add_option("--directions", f_dirs, "gradient direction set: 4|paper|axis")
        ->check(CLI::IsMember({"4", "paper", "axis"}));
    sub->add_option("--seed", f_seed, "deterministic seed");
  };
  auto finalize_config = [&](CLI::App* sub) {
    if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
    if (sub->count("--levels")) cfg.solve.levels = f_levels;
    if (sub->count("--iters")) cfg.solve.iterations_per_level = f_iters;
    if (sub->count("--step")) cfg.solve.step_size = f_step;
    if (sub->count("--occlusion-mode")) cfg.loss.occlusion_mode = parse_occlusion_mode(f_mode);
    if (sub->count("--directions")) cfg.loss.directions = parse_directions(f_dirs);
    if (sub->count("--seed")) cfg.solve.seed = f_seed;
  };

  // estimate
  EstimateArgs est;
  CLI::App* c_est = app.add_subcommand("estimate", "Estimate bidirectional flow for a triplet");
  c_est->add_option("--prev", est.prev, "frame t-1")->required();
  c_est->add_option("--curr", est.curr, "frame t")->required();
  c_est->add_option("--next", est.next, "frame t+1")->required();
  c_est->add_option("--out-fwd", est.out_fwd, "forward flow output (.flo or .png)")->required();
  c_est->add_option("--out-bwd", est.out_bwd, "backward flow output (.flo or .png)")->required();
  c_est->add_option("--out-weight-fwd", est.out_weight_fwd, "forward weight map image");
  c_est->add_option("--out-weight-bwd", est.out_weight_bwd, "backward weight map image");
  c_est->add_option("--out-vis-fwd", est.out_vis_fwd, "forward flow color visualization");
  c_est->add_option("--out-vis-bwd", est.out_vis_bwd, "backward flow color visualization");
  add_common(c_est);

  // evaluate
  std::string ev_est, ev_occ, ev_noc;
  CLI::App* c_eval = app.add_subcommand("evaluate", "ALL/NOC/OCC endpoint error vs ground truth");
  c_eval->add_option("--est", ev_est, "estimated flow")->required();
  c_eval->add_option("--gt-occ", ev_occ, "ground truth with occluded pixels (occ)")->required();
  c_eval->add_option("--gt-noc", ev_noc, "non-occluded ground truth (noc)")->required();

  // visualize
  std::string vz_flow, vz_out;
  double vz_radius = 0;
  CLI::App* c_vis = app.add_subcommand("visualize", "Render a flow field with the color wheel");
  c_vis->add_option("--flow", vz_flow, "flow file")->required();
  c_vis->add_option("--out", vz_out, "output image")->required();
  c_vis->add_option("--max-radius", vz_radius, "saturation radius (default: 99th percentile)");

  // gradcheck
  int gc_size = 8, gc_trials = 100;
  uint64_t gc_seed = 0;
  std::string gc_mode = "all";
  bool gc_corrupt = false;
  CLI::App* c_gc = app.add_subcommand("gradcheck", "Verify analytic gradients vs finite differences");
  c_gc->add_option("--size", gc_size, "instance side length")->check(CLI::Range(4, 64));
  c_gc->add_option("--trials", gc_trials, "random instances per mode")->check(CLI::Range(1, 1000000));
  c_gc->add_option("--seed", gc_seed, "rng seed");
  c_gc->add_option("--mode", gc_mode, "all|soft|hard_min|off")
      ->check(CLI::IsMember({"all", "soft", "hard_min", "off"}));
  c_gc->add_flag("--corrupt-gradient", gc_corrupt,
                 "inject a unit gradient error (self-test of the checker)");

  // synth
  SynthArgs sy;
  CLI::App* c_sy = app.add_subcommand("synth", "Generate a synthetic triplet with ground truth");
  c_sy->add_option("--scene", sy.scene, "translate|occluder")
      ->required()
      ->check(CLI::IsMember({"translate", "occluder"}));
  c_sy->add_option("--out-dir", sy.out_dir, "output directory")->required();
  c_sy->add_option("--height", sy.height, "frame height");
  c_sy->add_option("--width", sy.width, "frame width");
  c_sy->add_option("--dx", sy.dx, "translate: shift per frame along x");
  c_sy->add_option("--dy", sy.dy, "translate: shift per frame along y");
  c_sy->add_option("--block-w", sy.block_w, "occluder: block width");
  c_sy->add_option("--block-h", sy.block_h, "occluder: block height");
  c_sy->add_option("--speed-x", sy.speed_x, "occluder: block velocity x");
  c_sy->add_option("--speed-y", sy.speed_y, "occluder: block velocity y");
  c_sy->add_option("--seed", sy.seed, "rng seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_est->parsed()) {
      finalize_config(c_est);
      return cmd_estimate(est, cfg);
    }
    if (c_eval->parsed()) return cmd_evaluate(ev_est, ev_occ, ev_noc);
    if (c_vis->parsed()) return cmd_visualize(vz_flow, vz_out, vz_radius);
    if (c_gc->parsed()) return cmd_gradcheck(gc_size, gc_trials, gc_seed, gc_mode, gc_corrupt);
    if (c_sy->parsed()) return cmd_synth(sy);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
