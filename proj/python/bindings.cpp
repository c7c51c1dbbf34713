#include <sstream>

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "logoco/cli/cli.hpp"
#include "logoco/compositor/compositor.hpp"
#include "logoco/core/error.hpp"
#include "logoco/core/manifest.hpp"
#include "logoco/detector/sim_world.hpp"
#include "logoco/detector/simulated.hpp"
#include "logoco/engine/engine.hpp"
#include "logoco/evalkit/evalkit.hpp"
#include "logoco/webset/webset.hpp"

namespace py = pybind11;
using namespace py::literals;
using namespace logoco;

namespace {

using Pixels = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

Image to_image(const Pixels& a) {
  if (a.ndim() != 3 || a.shape(2) != 4) throw py::value_error("expected an HxWx4 uint8 array");
  Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  std::copy(a.data(), a.data() + a.size(), img.bytes().begin());
  return img;
}

Pixels to_array(const Image& img) {
  Pixels a({img.height(), img.width(), 4});
  std::copy(img.bytes().begin(), img.bytes().end(), a.mutable_data());
  return a;
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<eval::EvalImage> eval_images(const py::list& items) {
  std::vector<eval::EvalImage> out;
  for (const auto& item : items) {
    const auto pair = item.cast<std::pair<std::vector<Detection>, std::vector<Truth>>>();
    out.push_back({pair.first, pair.second});
  }
  return out;
}

SimulatedDetectorParams sim_params(std::size_t classes, double competence, double false_fire,
                                   std::uint64_t seed) {
  SimulatedDetectorParams p;
  p.competence.assign(classes, competence);
  p.false_fire.assign(classes, false_fire);
  p.seed = seed;
  return p;
}

std::vector<std::string> names_of(const ClassRegistry& r) {
  std::vector<std::string> out;
  for (const auto& c : r.classes()) out.push_back(c.name);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-mining and co-learning of logo detectors from weakly labelled web images";
  m.attr("__version__") = cli::version();

  py::register_exception<logoco::Error>(m, "Error", PyExc_RuntimeError);
  // Most specific last so their translators run first.
  py::register_exception<logoco::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<logoco::IoError>(m, "IoError", PyExc_OSError);

  py::enum_<ImageSource>(m, "ImageSource")
      .value("stream", ImageSource::stream)
      .value("synthetic", ImageSource::synthetic)
      .value("external", ImageSource::external);

  py::class_<BoundingBox>(m, "BoundingBox")
      .def(py::init<>())
      .def(py::init([](int x0, int y0, int x1, int y1) { return BoundingBox{x0, y0, x1, y1}; }),
           py::arg("x_min"), py::arg("y_min"), py::arg("x_max"), py::arg("y_max"))
      .def_readwrite("x_min", &BoundingBox::x_min)
      .def_readwrite("y_min", &BoundingBox::y_min)
      .def_readwrite("x_max", &BoundingBox::x_max)
      .def_readwrite("y_max", &BoundingBox::y_max)
      .def_property_readonly("area", &BoundingBox::area)
      .def("as_tuple", [](const BoundingBox& b) { return py::make_tuple(b.x_min, b.y_min, b.x_max, b.y_max); })
      .def(py::self == py::self)
      .def("__repr__", [](const BoundingBox& b) {
        std::ostringstream s;
        s << "BoundingBox(" << b.x_min << ", " << b.y_min << ", " << b.x_max << ", " << b.y_max << ")";
        return s.str();
      });

  py::class_<WebImage>(m, "WebImage")
      .def(py::init([](std::string id, int w, int h, std::string pixels, ClassId weak, ImageSource src) {
             return WebImage{std::move(id), w, h, std::move(pixels), weak, src};
           }),
           py::arg("id"), py::arg("width"), py::arg("height"), py::arg("pixels") = "",
           py::arg("weak_label") = 1, py::arg("source") = ImageSource::stream)
      .def_readwrite("id", &WebImage::id)
      .def_readwrite("width", &WebImage::width)
      .def_readwrite("height", &WebImage::height)
      .def_readwrite("pixels", &WebImage::pixels)
      .def_readwrite("weak_label", &WebImage::weak_label)
      .def_readwrite("source", &WebImage::source)
      .def(py::self == py::self);

  py::class_<Truth>(m, "Truth")
      .def(py::init([](ClassId cls, BoundingBox box) { return Truth{cls, box}; }), py::arg("cls"),
           py::arg("box"))
      .def_readwrite("cls", &Truth::cls)
      .def_readwrite("box", &Truth::box);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](ClassId cls, double score, BoundingBox box) { return Detection{cls, score, box}; }),
           py::arg("cls"), py::arg("score"), py::arg("box"))
      .def_readwrite("cls", &Detection::cls)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("box", &Detection::box);

  py::class_<AnnotatedImage>(m, "AnnotatedImage")
      .def(py::init([](WebImage img, std::vector<Truth> truths) {
             return AnnotatedImage{std::move(img), std::move(truths)};
           }),
           py::arg("image"), py::arg("truths") = std::vector<Truth>{})
      .def_readwrite("image", &AnnotatedImage::image)
      .def_readwrite("truths", &AnnotatedImage::truths)
      .def(py::self == py::self);

  py::class_<ClassRegistry>(m, "ClassRegistry")
      .def(py::init<const std::vector<std::string>&>(), py::arg("names"))
      .def("id_of", &ClassRegistry::id_of)
      .def("name", &ClassRegistry::name)
      .def("__len__", &ClassRegistry::size)
      .def_property_readonly("names", &names_of);

  m.def("load_manifest", &load_manifest, py::arg("path"), py::arg("classes"));
  m.def("save_manifest",
        [](const std::vector<AnnotatedImage>& r, const ClassRegistry& c, const std::filesystem::path& p) {
          save_manifest(r, c, p);
        },
        py::arg("records"), py::arg("classes"), py::arg("path"));

  // webset
  m.def("contains_keyword", &contains_keyword, py::arg("text"), py::arg("name"));
  m.def("filter_noise", [](const std::vector<WebImage>& v, int d) { return filter_noise(v, d); },
        py::arg("images"), py::arg("min_dim") = 100);
  m.def("dedupe_by_size", [](const std::vector<WebImage>& v) { return dedupe_by_size(v); },
        py::arg("images"));
  m.def("class_stats", [](const std::map<ClassId, std::size_t>& counts) {
    const auto s = class_stats(counts);
    return py::dict("counts"_a = s.counts, "min"_a = s.min, "median"_a = s.median, "max"_a = s.max,
                    "imbalance_ratio"_a = s.imbalance_ratio);
  }, py::arg("counts"));
  m.def("estimate_noise_rate",
        [](const std::vector<WebImage>& images, ClassId cls, const std::function<bool(const WebImage&)>& oracle,
           std::size_t sample_n, std::uint64_t seed) {
          return estimate_noise_rate(images, cls, oracle, sample_n, seed);
        },
        py::arg("images"), py::arg("cls"), py::arg("oracle"), py::arg("sample_n") = 1000, py::arg("seed") = 0);

  // compositor
  m.def("context_augment_count", &context_augment_count, py::arg("n_cls"), py::arg("n_sf"));
  m.def("composite",
        [](const Pixels& icon, const Pixels& bg, double scale, double rotation,
           std::array<double, 3> jitter, double opacity, int x, int y) {
          const TransformSpec t{scale, rotation, jitter, opacity};
          const auto c = composite(to_image(icon), to_image(bg), t, Point{x, y});
          return py::make_tuple(to_array(c.canvas), c.box);
        },
        py::arg("icon"), py::arg("background"), py::arg("scale") = 1.0, py::arg("rotation") = 0.0,
        py::arg("jitter") = std::array<double, 3>{1.0, 1.0, 1.0}, py::arg("opacity") = 1.0,
        py::arg("x") = 0, py::arg("y") = 0);
  m.def("synth_layout",
        [](ClassId cls, const std::vector<std::pair<int, int>>& icon_sizes,
           const std::vector<std::pair<int, int>>& background_sizes, std::size_t n, std::uint64_t seed) {
          std::vector<ImageRef> icons, bgs;
          for (auto [w, h] : icon_sizes) icons.push_back({"icon", {w, h}});
          for (auto [w, h] : background_sizes) bgs.push_back({"background", {w, h}});
          return synth_batch(cls, icons, n, bgs, seed);
        },
        py::arg("cls"), py::arg("icon_sizes"), py::arg("background_sizes"), py::arg("n"), py::arg("seed") = 0,
        "Layout-only synthetic batch (boxes without pixels).");

  // evalkit
  m.def("iou", &eval::iou, py::arg("a"), py::arg("b"));
  m.def("match_detections",
        [](const std::vector<Detection>& d, const std::vector<Truth>& t, double thr, bool strict) {
          return eval::match_detections(d, t, {thr, strict});
        },
        py::arg("detections"), py::arg("truths"), py::arg("iou_threshold") = 0.5, py::arg("strict") = false);
  m.def("average_precision",
        [](ClassId cls, const py::list& images, double thr, bool eleven) -> std::optional<double> {
          const auto ev = eval_images(images);
          eval::ApOptions o;
          o.match.iou_threshold = thr;
          if (eleven) o.interpolation = eval::Interpolation::eleven_point;
          return eval::average_precision(cls, ev, o);
        },
        py::arg("cls"), py::arg("images"), py::arg("iou_threshold") = 0.5, py::arg("eleven_point") = false,
        "images: list of (detections, truths) pairs.");
  m.def("mean_ap", &eval::mean_ap, py::arg("ap"));

  // detector
  py::class_<SimulatedDetector>(m, "SimulatedDetector")
      .def(py::init([](std::string name, std::vector<std::string> classes, double competence,
                       double false_fire, std::uint64_t seed,
                       const std::map<std::string, std::vector<Truth>>& latent) {
             auto table = std::make_shared<LatentTruth>();
             for (const auto& [id, truths] : latent) table->add(id, truths);
             const auto n = classes.size();
             return SimulatedDetector(std::move(name), std::move(classes),
                                      sim_params(n, competence, false_fire, seed), table);
           }),
           py::arg("name"), py::arg("classes"), py::arg("competence") = 0.0, py::arg("false_fire") = 0.0,
           py::arg("seed") = 0, py::arg("latent") = std::map<std::string, std::vector<Truth>>{})
      .def("detect", &SimulatedDetector::detect)
      .def("fine_tune", [](SimulatedDetector& d, const std::vector<AnnotatedImage>& t) { d.fine_tune(t); })
      .def("bootstrap", [](SimulatedDetector& d, const std::vector<AnnotatedImage>& t) { d.bootstrap(t); })
      .def("competence", &SimulatedDetector::competence)
      .def("false_fire", &SimulatedDetector::false_fire)
      .def_property_readonly("initialized", &SimulatedDetector::initialized)
      .def_property_readonly("name", &SimulatedDetector::name);
  m.def("max_score",
        [](const SimulatedDetector& d, const WebImage& img, ClassId cls) { return max_score(d, img, cls); },
        py::arg("detector"), py::arg("image"), py::arg("cls"));

  // engine
  m.def("select", [](const SimulatedDetector& d, const WebImage& img, double thr) { return select(d, img, thr); },
        py::arg("detector"), py::arg("image"), py::arg("threshold") = 0.9);
  m.def("self_mine",
        [](const SimulatedDetector& d, const std::vector<WebImage>& discovered,
           const std::vector<WebImage>& unexplored, double thr) {
          std::vector<WebImage> all(discovered);
          all.insert(all.end(), unexplored.begin(), unexplored.end());
          PoolState pool = make_pool(unexplored);
          for (const auto& img : discovered) pool.discovered.insert(img.id);
          const auto r = self_mine(d, pool, index_images(all), thr);
          return py::make_tuple(std::vector<std::string>(r.pool.discovered.begin(), r.pool.discovered.end()),
                                std::vector<std::string>(r.pool.unexplored.begin(), r.pool.unexplored.end()),
                                r.mined);
        },
        py::arg("detector"), py::arg("discovered"), py::arg("unexplored"), py::arg("threshold") = 0.9,
        "Returns (discovered ids, unexplored ids, newly mined records).");
  m.def("should_stop",
        [](const std::vector<double>& deployment_maps, double epsilon, int max_iterations) {
          std::vector<IterationReport> history;
          for (std::size_t t = 0; t < deployment_maps.size(); ++t) {
            IterationReport r;
            r.iteration = static_cast<int>(t);
            r.slots.resize(2);
            r.slots[1].map = deployment_maps[t];
            history.push_back(std::move(r));
          }
          return should_stop(history, {epsilon, max_iterations, 1});
        },
        py::arg("deployment_maps"), py::arg("epsilon") = 0.0, py::arg("max_iterations") = 1 << 20,
        "Stop decision for a history given as the deployment slot's mAP per report.");
  m.def("simulate",
        [](std::uint64_t seed, const std::string& mode, std::size_t n_cls, int max_iterations,
           std::size_t classes, std::size_t max_class_images, double imbalance_ratio) {
          WorldSpec spec;
          spec.seed = seed;
          spec.classes = classes;
          spec.max_class_images = max_class_images;
          spec.imbalance_ratio = imbalance_ratio;
          const auto world = make_world(spec);
          MiningConfig config;
          const auto parsed = parse_learning_mode(mode);
          if (!parsed) throw py::value_error("mode must be 'co' or 'self'");
          config.mode = *parsed;
          config.n_cls = n_cls;
          config.max_iterations = max_iterations;
          const RunInputs inputs{world.classes, world.pool, world.eval, world.backgrounds, world.icons};
          const auto names = names_of(world.classes);
          std::array<std::unique_ptr<Detector>, 2> slots{
              std::make_unique<SimulatedDetector>("frcnn-slot", names,
                                                  sim_params(names.size(), 0.0, 0.05, hash_combine(seed, 1)),
                                                  world.latent),
              std::make_unique<SimulatedDetector>("yolo-slot", names,
                                                  sim_params(names.size(), 0.0, 0.05, hash_combine(seed, 2)),
                                                  world.latent)};
          const auto result = run(config, inputs, std::move(slots), seed);
          py::list reports;
          for (const auto& r : result.reports) reports.append(json_to_py(to_json(r, world.classes)));
          return reports;
        },
        py::arg("seed") = 0, py::arg("mode") = "co", py::arg("n_cls") = 500, py::arg("max_iterations") = 8,
        py::arg("classes") = 8, py::arg("max_class_images") = 1500, py::arg("imbalance_ratio") = 100.0,
        "Runs the full loop on a generated world with simulated slots; returns report dicts.");

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = cli::run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
