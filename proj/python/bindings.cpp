// Copyright 2026 The srstereo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Images are float64 arrays shaped (3, H, W); disparity,
// edge and mask maps are (H, W).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "srstereo/core_math.hpp"
#include "srstereo/dataset.hpp"
#include "srstereo/edge.hpp"
#include "srstereo/gradcheck.hpp"
#include "srstereo/io.hpp"
#include "srstereo/metrics.hpp"
#include "srstereo/model.hpp"
#include "srstereo/scene.hpp"
#include "srstereo/train.hpp"

namespace py = pybind11;
using namespace srstereo;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  if (a.ndim() == 2) {
    Tensor t(1, static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), t.data());
    return t;
  }
  require(a.ndim() == 3, "expected a 2-D map or a (C, H, W) array");
  Tensor t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + a.size(), t.data());
  return t;
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape;
  if (t.channels() != 1) shape.push_back(t.channels());
  shape.push_back(t.height());
  shape.push_back(t.width());
  Array a(shape);
  std::copy(t.data(), t.data() + t.size(), a.mutable_data());
  return a;
}

Mask to_mask(const BoolArray& a) {
  require(a.ndim() == 2, "expected a 2-D mask");
  Mask m(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  for (py::ssize_t i = 0; i < a.size(); ++i) m.set(static_cast<std::size_t>(i), a.data()[i]);
  return m;
}

BoolArray to_bool(const Mask& m) {
  BoolArray a({m.height(), m.width()});
  for (std::size_t i = 0; i < m.size(); ++i) a.mutable_data()[i] = m[i];
  return a;
}

DisparityMap to_disparity(const Array& values, const std::optional<BoolArray>& valid) {
  Tensor v = to_tensor(values);
  require(v.channels() == 1, "disparity must be a 2-D map");
  if (!valid) return DisparityMap::dense(std::move(v));
  return DisparityMap(std::move(v), to_mask(*valid));
}

py::dict scene_dict(const StereoSample& s) {
  py::dict d;
  d["left"] = to_array(s.left);
  d["right"] = to_array(s.right);
  d["disparity"] = to_array(s.disparity_gt.values);
  d["occlusion"] = to_bool(s.occlusion);
  d["layer_disparities"] = s.layer_disparities;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stepwise-regression stereo matching core";

  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<io::FormatError>(m, "FormatError", PyExc_IOError);

  m.def("clip_symmetric", py::overload_cast<double, double>(&clip_symmetric), py::arg("x"), py::arg("bound"));
  m.def("balanced_weight", py::overload_cast<double, double>(&balanced_weight), py::arg("x"), py::arg("h"));
  m.def("cb_l1", py::overload_cast<double, double>(&cb_l1), py::arg("x"), py::arg("h"));
  m.def("cb_smooth_l1", py::overload_cast<double, double>(&cb_smooth_l1), py::arg("x"), py::arg("h"));
  m.def("prewitt_magnitude", [](const Array& a) { return to_array(prewitt_magnitude(to_tensor(a))); });
  m.def("resize_bilinear", [](const Array& a, int h, int w) { return to_array(resize_bilinear(to_tensor(a), h, w)); });

  m.def(
      "generate_scene",
      [](std::uint64_t seed, int height, int width, int num_layers, double d_min, double d_max) {
        SceneSpec s;
        s.seed = seed;
        s.height = height;
        s.width = width;
        s.num_layers = num_layers;
        s.d_min = d_min;
        s.d_max = d_max;
        return scene_dict(generate_scene(s));
      },
      py::arg("seed"), py::arg("height") = 64, py::arg("width") = 96, py::arg("num_layers") = 3,
      py::arg("d_min") = 0.0, py::arg("d_max") = 24.0);

  m.def("edge_gt", [](const Array& d) { return to_array(edge_gt_extract(DisparityMap::dense(to_tensor(d))).values); });
  m.def("soft_edge", [](const Array& d) { return to_array(soft_edge_of_disparity(to_tensor(d)).values); });
  m.def(
      "pseudo_label_select",
      [](const Array& edge, double t) {
        const PseudoLabel p = pseudo_label_select({to_tensor(edge), EdgeKind::kPredicted}, t);
        return py::make_tuple(to_array(p.values), to_bool(p.valid));
      },
      py::arg("edge"), py::arg("t"));

  m.def(
      "epe", [](const Array& p, const Array& g, std::optional<BoolArray> v) { return epe(to_tensor(p), to_disparity(g, v)); },
      py::arg("pred"), py::arg("gt"), py::arg("valid") = py::none());
  m.def(
      "err_rate",
      [](const Array& p, const Array& g, double tau, std::optional<BoolArray> v) {
        return err_rate(to_tensor(p), to_disparity(g, v), tau);
      },
      py::arg("pred"), py::arg("gt"), py::arg("tau"), py::arg("valid") = py::none());
  m.def(
      "d1", [](const Array& p, const Array& g, std::optional<BoolArray> v) { return d1(to_tensor(p), to_disparity(g, v)); },
      py::arg("pred"), py::arg("gt"), py::arg("valid") = py::none());
  m.def(
      "edge_f1",
      [](const Array& pred, const BoolArray& gt, double thresh) -> std::optional<double> {
        return edge_f1(to_tensor(pred), to_mask(gt), thresh).f1;
      },
      py::arg("pred"), py::arg("gt"), py::arg("threshold") = 0.5);

  m.def("write_pfm", [](const std::string& path, const Array& a) { io::write_pfm(path, to_tensor(a)); });
  m.def("read_pfm", [](const std::string& path) { return to_array(io::read_pfm(path)); });

  py::class_<StereoModel>(m, "StereoModel")
      .def(py::init([](int num_gru, int num_sru, double mm, std::uint64_t seed) {
             ModelConfig c;
             c.num_gru = num_gru;
             c.num_sru = num_sru;
             c.m = mm;
             c.init_seed = seed;
             return std::make_unique<StereoModel>(c);
           }),
           py::arg("num_gru") = 0, py::arg("num_sru") = 15, py::arg("m") = 2.0, py::arg("seed") = 1)
      .def("parameter_count", [](const StereoModel& s) { return s.parameters().scalar_count(); })
      .def("load", [](StereoModel& s, const std::string& path) { io::load_checkpoint(path, s.parameters()); })
      .def("save", [](const StereoModel& s, const std::string& path) { io::save_checkpoint(path, s.parameters()); })
      .def(
          "predict",
          [](const StereoModel& s, const Array& left, const Array& right, double d_max) {
            py::gil_scoped_release release;
            Tensor d = s.predict(to_tensor(left), to_tensor(right), disparity_levels(d_max)).values;
            py::gil_scoped_acquire acquire;
            return to_array(d);
          },
          py::arg("left"), py::arg("right"), py::arg("d_max") = 24.0)
      .def(
          "train",
          [](StereoModel& s, std::uint64_t scene_seed, int scenes, int steps, double lr) {
            SceneSpec base;
            base.seed = scene_seed;
            std::vector<TrainingSample> data;
            for (int i = 0; i < scenes; ++i)
              data.push_back(make_training_sample(generate_scene(sample_spec(base, i)), base.d_max, "s", "main"));
            OptimConfig o;
            o.steps = steps;
            o.learning_rate = lr;
            LossConfig l;
            l.iterations = s.config().num_gru + s.config().num_sru;
            std::vector<double> losses;
            for (const auto& r : train_stereo(s, data, o, l)) losses.push_back(r.total);
            return losses;
          },
          py::arg("scene_seed") = 11, py::arg("scenes") = 8, py::arg("steps") = 10, py::arg("lr") = 2e-3);

  m.def("gradcheck", [](const std::string& op, int instances) {
    GradcheckConfig c;
    c.instances = instances;
    const GradcheckReport r = run_gradcheck(op, c);
    return py::make_tuple(r.passed(), r.worst_rel_error);
  });
  m.def("gradcheck_ops", &gradcheck_ops);
}
