#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "occflow/config.hpp"
#include "occflow/evaluate.hpp"
#include "occflow/flowio.hpp"
#include "occflow/loss.hpp"
#include "occflow/solve.hpp"
#include "occflow/synth.hpp"
#include "occflow/warp.hpp"

namespace py = pybind11;
using namespace occflow;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image image_from_array(const DoubleArray& arr) {
  if (arr.ndim() == 2) {
    Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)), 1);
    std::memcpy(img.data.data(), arr.data(), sizeof(double) * img.data.size());
    return img;
  }
  if (arr.ndim() == 3 && (arr.shape(2) == 1 || arr.shape(2) == 3)) {
    Image img(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
              static_cast<int>(arr.shape(2)));
    std::memcpy(img.data.data(), arr.data(), sizeof(double) * img.data.size());
    return img;
  }
  throw py::value_error("image array must be (H,W), (H,W,1) or (H,W,3)");
}

py::array image_to_array(const Image& img) {
  if (img.channels == 1) {
    py::array_t<double> out({img.height, img.width});
    std::memcpy(out.mutable_data(), img.data.data(), sizeof(double) * img.data.size());
    return out;
  }
  py::array_t<double> out({img.height, img.width, img.channels});
  std::memcpy(out.mutable_data(), img.data.data(), sizeof(double) * img.data.size());
  return out;
}

FlowField flow_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 3 || arr.shape(2) != 2) throw py::value_error("flow array must be (H,W,2)");
  FlowField f(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  auto r = arr.unchecked<3>();
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      f.u_at(y, x) = r(y, x, 0);
      f.v_at(y, x) = r(y, x, 1);
    }
  return f;
}

py::array flow_to_array(const FlowField& f) {
  py::array_t<double> out({f.height, f.width, 2});
  auto r = out.mutable_unchecked<3>();
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      r(y, x, 0) = f.u_at(y, x);
      r(y, x, 1) = f.v_at(y, x);
    }
  return out;
}

ScalarField scalar_from_array(const DoubleArray& arr) {
  if (arr.ndim() != 2) throw py::value_error("scalar field array must be (H,W)");
  ScalarField f(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  std::memcpy(f.data.data(), arr.data(), sizeof(double) * f.data.size());
  return f;
}

py::array scalar_to_array(const ScalarField& f) {
  py::array_t<double> out({f.height, f.width});
  std::memcpy(out.mutable_data(), f.data.data(), sizeof(double) * f.data.size());
  return out;
}

py::array mask_to_array(const ValidityMask& m) {
  py::array_t<bool> out({m.height, m.width});
  auto r = out.mutable_unchecked<2>();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) r(y, x) = m.at(y, x);
  return out;
}

ValidityMask mask_from_array(const py::array& arr_any) {
  auto arr = py::array_t<bool, py::array::c_style | py::array::forcecast>::ensure(arr_any);
  if (!arr || arr.ndim() != 2) throw py::value_error("mask array must be (H,W) bool");
  ValidityMask m(static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)));
  auto r = arr.unchecked<2>();
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) m.set(y, x, r(y, x));
  return m;
}

// Keyword arguments use the same key names and parsing as the CLI config file,
// including rejection of unknown keys.
RunConfig config_from_kwargs(const py::kwargs& kw) {
  RunConfig cfg;
  for (auto item : kw) {
    std::string key = py::str(item.first);
    std::string value = py::str(item.second);
    set_config_key(cfg, key, value);
  }
  return cfg;
}

py::dict breakdown_to_dict(const LossBreakdown& bd) {
  py::dict d;
  d["total"] = bd.total;
  d["p1st"] = bd.p1st;
  d["p2nd"] = bd.p2nd;
  d["smooth"] = bd.smooth;
  d["level_weight"] = bd.level_weight;
  d["E_b"] = scalar_to_array(bd.E_b);
  d["E_f"] = scalar_to_array(bd.E_f);
  d["w_b"] = scalar_to_array(bd.w_b);
  d["w_f"] = scalar_to_array(bd.w_f);
  return d;
}

py::dict scene_to_dict(const SynthScene& sc) {
  py::dict d;
  d["prev"] = image_to_array(sc.frames.prev);
  d["curr"] = image_to_array(sc.frames.curr);
  d["next"] = image_to_array(sc.frames.next);
  d["gt_fwd"] = flow_to_array(sc.gt_fwd.flow);
  d["gt_bwd"] = flow_to_array(sc.gt_bwd.flow);
  d["occ_fwd"] = mask_to_array(sc.occ_fwd);
  d["occ_bwd"] = mask_to_array(sc.occ_bwd);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Occlusion-weighted bidirectional optical flow engine";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def(
      "estimate",
      [](const DoubleArray& prev, const DoubleArray& curr, const DoubleArray& next,
         const py::kwargs& kw) {
        RunConfig cfg = config_from_kwargs(kw);
        EstimateResult res =
            estimate_flow(image_from_array(prev), image_from_array(curr), image_from_array(next),
                          cfg.solve, cfg.loss);
        py::list levels;
        for (const LevelTrace& t : res.report.levels) {
          py::dict d;
          d["level"] = t.level;
          d["height"] = t.height;
          d["width"] = t.width;
          d["iterations"] = t.iterations;
          d["converged"] = t.converged;
          d["total"] = t.total;
          levels.append(d);
        }
        py::dict report;
        report["levels"] = levels;
        return py::make_tuple(flow_to_array(res.F_b), flow_to_array(res.F_f), report);
      },
      py::arg("prev"), py::arg("curr"), py::arg("next"),
      "Estimate (backward, forward) flow for a frame triplet. Keyword arguments "
      "mirror the config file keys (levels, iterations, step_size, occlusion_mode, ...).");

  m.def(
      "total_loss",
      [](const DoubleArray& prev, const DoubleArray& curr, const DoubleArray& next,
         const DoubleArray& flow_bwd, const DoubleArray& flow_fwd, int level,
         const py::kwargs& kw) {
        RunConfig cfg = config_from_kwargs(kw);
        FrameTriplet frames{image_from_array(prev), image_from_array(curr), image_from_array(next)};
        return breakdown_to_dict(
            total_loss(frames, flow_from_array(flow_bwd), flow_from_array(flow_fwd), cfg.loss, level));
      },
      py::arg("prev"), py::arg("curr"), py::arg("next"), py::arg("flow_bwd"), py::arg("flow_fwd"),
      py::arg("level") = 1);

  m.def(
      "loss_gradient",
      [](const DoubleArray& prev, const DoubleArray& curr, const DoubleArray& next,
         const DoubleArray& flow_bwd, const DoubleArray& flow_fwd, int level,
         const py::kwargs& kw) {
        RunConfig cfg = config_from_kwargs(kw);
        FrameTriplet frames{image_from_array(prev), image_from_array(curr), image_from_array(next)};
        auto [gb, gf] =
            loss_gradient(frames, flow_from_array(flow_bwd), flow_from_array(flow_fwd), cfg.loss, level);
        return py::make_tuple(flow_to_array(gb), flow_to_array(gf));
      },
      py::arg("prev"), py::arg("curr"), py::arg("next"), py::arg("flow_bwd"), py::arg("flow_fwd"),
      py::arg("level") = 1);

  m.def(
      "occlusion_weights",
      [](const DoubleArray& E_b, const DoubleArray& E_f) {
        auto [wb, wf] = occlusion_weights(scalar_from_array(E_b), scalar_from_array(E_f));
        return py::make_tuple(scalar_to_array(wb), scalar_to_array(wf));
      },
      py::arg("E_b"), py::arg("E_f"));

  m.def(
      "charbonnier",
      [](const DoubleArray& x, double epsilon, double kappa) {
        py::array_t<double> out(std::vector<py::ssize_t>(x.shape(), x.shape() + x.ndim()));
        const double* src = x.data();
        double* dst = out.mutable_data();
        for (py::ssize_t i = 0; i < x.size(); ++i) dst[i] = charbonnier(src[i], epsilon, kappa);
        return out;
      },
      py::arg("x"), py::arg("epsilon") = 1e-4, py::arg("kappa") = 2.0);

  m.def(
      "bilinear_sample",
      [](const DoubleArray& src, const DoubleArray& flow) {
        WarpResult wr = bilinear_sample(image_from_array(src), flow_from_array(flow));
        py::dict d;
        d["warped"] = image_to_array(wr.warped);
        d["jac_u"] = image_to_array(wr.jac_u);
        d["jac_v"] = image_to_array(wr.jac_v);
        d["valid"] = mask_to_array(wr.valid);
        return d;
      },
      py::arg("src"), py::arg("flow"));

  m.def(
      "epe_map",
      [](const DoubleArray& est, const DoubleArray& gt, const py::object& gt_valid) {
        FlowFile g;
        g.flow = flow_from_array(gt);
        g.valid = gt_valid.is_none() ? ValidityMask(g.flow.height, g.flow.width, true)
                                     : mask_from_array(gt_valid.cast<py::array>());
        return scalar_to_array(epe_map(flow_from_array(est), g));
      },
      py::arg("est"), py::arg("gt"), py::arg("gt_valid") = py::none());

  m.def(
      "evaluate",
      [](const DoubleArray& est, const DoubleArray& gt_occ, const py::array& gt_occ_valid,
         const DoubleArray& gt_noc, const py::array& gt_noc_valid) {
        FlowFile occ{flow_from_array(gt_occ), mask_from_array(gt_occ_valid)};
        FlowFile noc{flow_from_array(gt_noc), mask_from_array(gt_noc_valid)};
        EvalReport rep = evaluate(flow_from_array(est), occ, noc);
        py::dict d;
        d["epe_all"] = rep.epe_all;
        d["epe_noc"] = rep.epe_noc;
        d["epe_occ"] = rep.epe_occ;
        d["fl_all"] = rep.fl_all;
        d["count_all"] = rep.count_all;
        d["count_noc"] = rep.count_noc;
        d["count_occ"] = rep.count_occ;
        return d;
      },
      py::arg("est"), py::arg("gt_occ"), py::arg("gt_occ_valid"), py::arg("gt_noc"),
      py::arg("gt_noc_valid"));

  m.def(
      "read_flo",
      [](const std::string& path) {
        FlowFile f = read_flo(path);
        return py::make_tuple(flow_to_array(f.flow), mask_to_array(f.valid));
      },
      py::arg("path"));

  m.def(
      "write_flo",
      [](const DoubleArray& flow, const std::string& path, const py::object& valid) {
        FlowFile f;
        f.flow = flow_from_array(flow);
        f.valid = valid.is_none() ? ValidityMask(f.flow.height, f.flow.width, true)
                                  : mask_from_array(valid.cast<py::array>());
        write_flo(f, path);
      },
      py::arg("flow"), py::arg("path"), py::arg("valid") = py::none());

  m.def(
      "read_kitti_flow",
      [](const std::string& path) {
        FlowFile f = read_kitti_flow(path);
        return py::make_tuple(flow_to_array(f.flow), mask_to_array(f.valid));
      },
      py::arg("path"));

  m.def(
      "write_kitti_flow",
      [](const DoubleArray& flow, const std::string& path, const py::object& valid) {
        FlowFile f;
        f.flow = flow_from_array(flow);
        f.valid = valid.is_none() ? ValidityMask(f.flow.height, f.flow.width, true)
                                  : mask_from_array(valid.cast<py::array>());
        write_kitti_flow(f, path);
      },
      py::arg("flow"), py::arg("path"), py::arg("valid") = py::none());

  m.def(
      "read_image", [](const std::string& path) { return image_to_array(read_image(path)); },
      py::arg("path"));

  m.def(
      "write_image",
      [](const DoubleArray& img, const std::string& path) { write_image(image_from_array(img), path); },
      py::arg("image"), py::arg("path"));

  m.def(
      "flow_to_color",
      [](const DoubleArray& flow, double max_radius) {
        return image_to_array(flow_to_color(flow_from_array(flow), max_radius));
      },
      py::arg("flow"), py::arg("max_radius") = 0.0);

  m.def(
      "gradcheck",
      [](int size, int trials, uint64_t seed, const std::string& occlusion_mode) {
        RunConfig cfg;
        cfg.solve.seed = seed;
        cfg.loss.occlusion_mode = parse_occlusion_mode(occlusion_mode);
        GradcheckReport rep = gradcheck(cfg.solve, cfg.loss, size, trials);
        py::dict d;
        d["max_rel_error"] = rep.max_rel_error;
        d["trials"] = rep.trials;
        return d;
      },
      py::arg("size") = 8, py::arg("trials") = 20, py::arg("seed") = 0,
      py::arg("occlusion_mode") = "soft");

  m.def(
      "synth_translate",
      [](int height, int width, double dx, double dy, uint64_t seed) {
        return scene_to_dict(synth_translate(height, width, dx, dy, seed));
      },
      py::arg("height") = 64, py::arg("width") = 64, py::arg("dx") = 2.0, py::arg("dy") = 0.0,
      py::arg("seed") = 0);

  m.def(
      "synth_occluder",
      [](int height, int width, int block_h, int block_w, int speed_x, int speed_y, uint64_t seed) {
        OccluderParams p;
        p.height = height;
        p.width = width;
        p.block_h = block_h;
        p.block_w = block_w;
        p.speed_x = speed_x;
        p.speed_y = speed_y;
        p.seed = seed;
        return scene_to_dict(synth_occluder(p));
      },
      py::arg("height") = 96, py::arg("width") = 96, py::arg("block_h") = 24,
      py::arg("block_w") = 24, py::arg("speed_x") = 3, py::arg("speed_y") = 0, py::arg("seed") = 0);

  m.def(
      "synth_diag_shear",
      [](int height, int width, double shift, uint64_t seed) {
        return scene_to_dict(synth_diag_shear(height, width, shift, seed));
      },
      py::arg("height") = 64, py::arg("width") = 64, py::arg("shift") = 1.0, py::arg("seed") = 0);
}
