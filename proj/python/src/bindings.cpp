#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "btfuzz/btfuzz.hpp"

namespace py = pybind11;
using namespace btfuzz;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

GrayImage to_image(const Array& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return GrayImage(w, h, std::vector<double>(a.data(), a.data() + a.size()));
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out({g.height(), g.width()});
  std::copy(g.pixels().begin(), g.pixels().end(), out.mutable_data());
  return out;
}

py::array_t<bool> to_bool_array(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  bool* dst = out.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) dst[i] = m[i] != 0;
  return out;
}

BinaryMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw InvalidArgument("expected a 2-D array");
  BinaryMask m(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = a.data()[i] ? 1 : 0;
  return m;
}

Label label_of(const std::string& token) {
  if (token == "normal") return Label::NonTumour;
  return parse_label(token);
}

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  auto opt = [](const std::optional<Ratio>& r) -> py::object {
    return r ? py::object(py::float_(r->percent())) : py::object(py::none());
  };
  d["accuracy"] = m.accuracy.percent();
  d["precision"] = opt(m.precision);
  d["recall"] = opt(m.recall);
  d["f1"] = opt(m.f1);
  return d;
}

py::dict record_dict(const PredictionRecord& r) {
  py::dict d;
  d["path"] = r.path;
  d["method"] = std::string(to_token(r.method));
  d["size_fraction"] = r.size_fraction;
  d["global_threshold"] = r.global_threshold;
  d["crisp"] = r.crisp;
  d["label"] = r.label ? py::object(py::str(std::string(fuzzy::to_token(*r.label)))) : py::object(py::none());
  d["flags"] = r.flags;
  d["error"] = r.error;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Brain-MRI tumour classification: preprocessing, Otsu, watershed / region growing, Mamdani FIS";

  auto base = py::register_exception<Error>(m, "BtfuzzError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NoInternalMarker>(m, "NoInternalMarker", base.ptr());
  py::register_exception<FisParseError>(m, "FisParseError", base.ptr());

  m.def("load_image", [](const std::filesystem::path& p) { return to_array(load_image(p)); }, py::arg("path"));
  m.def("save_png", [](const Array& img, const std::filesystem::path& p) { save_png(to_image(img), p); },
        py::arg("image"), py::arg("path"));

  m.def(
      "generate_phantom",
      [](int count_per_class, int width, int height, std::uint64_t seed, std::optional<int> radius_min,
         std::optional<int> radius_max, double blob, double background, double noise) {
        PhantomSpec spec = PhantomSpec::scaled_for(width, height, count_per_class, seed);
        if (radius_min) spec.radius_min = *radius_min;
        if (radius_max) spec.radius_max = *radius_max;
        spec.blob_intensity = blob;
        spec.background_mean = background;
        spec.noise_amplitude = noise;
        py::list out;
        for (const auto& li : generate_phantom(spec)) {
          out.append(py::make_tuple(to_array(li.image), std::string(to_token(li.label))));
        }
        return out;
      },
      py::arg("count_per_class") = 50, py::arg("width") = 64, py::arg("height") = 64, py::arg("seed") = 42,
      py::arg("radius_min") = py::none(), py::arg("radius_max") = py::none(), py::arg("blob") = 0.9,
      py::arg("background") = 0.2, py::arg("noise") = 0.05);

  m.def(
      "resize_with_aspect",
      [](const Array& img, int width, int height) { return to_array(resize_with_aspect(to_image(img), {width, height})); },
      py::arg("image"), py::arg("width"), py::arg("height"));
  m.def("median_filter", [](const Array& img, int window) { return to_array(median_filter(to_image(img), window)); },
        py::arg("image"), py::arg("window") = 3);
  m.def(
      "adjust_intensity",
      [](const Array& img, double low, double high) { return to_array(adjust_intensity(to_image(img), low, high)); },
      py::arg("image"), py::arg("low_frac") = 0.01, py::arg("high_frac") = 0.01);
  m.def("binarize", [](const Array& img, double t) { return to_bool_array(binarize(to_image(img), t)); },
        py::arg("image"), py::arg("t") = kDefaultBinarizeThreshold);

  m.def(
      "compute_histogram",
      [](const Array& img) {
        const Histogram h = compute_histogram(to_image(img));
        return py::array_t<std::uint64_t>(kHistogramBins, h.bins().data());
      },
      py::arg("image"));
  m.def(
      "otsu_threshold",
      [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& bins) {
        if (bins.ndim() != 1 || bins.shape(0) != kHistogramBins) throw InvalidArgument("expected 256 bins");
        Histogram::Bins b{};
        std::copy(bins.data(), bins.data() + kHistogramBins, b.begin());
        return otsu_threshold(Histogram(b)).value();
      },
      py::arg("bins"));
  m.def("global_threshold_feature", [](const Array& img) { return global_threshold_feature(to_image(img)).value(); },
        py::arg("image"));

  m.def(
      "region_grow",
      [](const Array& img, const std::vector<std::pair<int, int>>& seeds, double tolerance) {
        std::vector<Pixel> px;
        for (const auto& [r, c] : seeds) px.push_back({r, c});
        return to_bool_array(region_grow(to_image(img), px, tolerance));
      },
      py::arg("image"), py::arg("seeds"), py::arg("tolerance"));
  m.def(
      "morph_reconstruct",
      [](const Array& marker, const Array& mask, int radius) {
        return to_array(morph_reconstruct(to_image(marker), to_image(mask), disc_element(radius)));
      },
      py::arg("marker"), py::arg("mask"), py::arg("radius") = 1);
  m.def(
      "region_stats",
      [](const py::array_t<bool, py::array::c_style | py::array::forcecast>& mask) {
        const RegionStats st = region_stats(to_mask(mask), SegmentationMethod::RegionGrowing);
        py::dict d;
        d["size_fraction"] = st.size_fraction;
        d["circularity"] = st.circularity;
        d["border_irregularity"] = st.border_irregularity;
        return d;
      },
      py::arg("mask"));
  m.def(
      "tumour_region",
      [](const Array& img, const std::string& method, double binarize_threshold, int marker_radius,
         int reconstruct_radius, double tolerance, const std::string& seed_strategy) {
        SegmentationParams p;
        p.binarize_threshold = binarize_threshold;
        p.marker_radius = marker_radius;
        p.reconstruct_radius = reconstruct_radius;
        p.tolerance = tolerance;
        p.seed_strategy = parse_seed_strategy(seed_strategy);
        const TumourRegion r = tumour_region(to_image(img), parse_method(method), p);
        py::dict d;
        d["mask"] = to_bool_array(r.mask);
        d["size_fraction"] = r.stats.size_fraction;
        d["circularity"] = r.stats.circularity;
        d["border_irregularity"] = r.stats.border_irregularity;
        d["labels"] = r.labels ? py::object(to_array(*r.labels)) : py::object(py::none());
        return d;
      },
      py::arg("image"), py::arg("method") = "region-growing", py::arg("binarize_threshold") = kDefaultBinarizeThreshold,
      py::arg("marker_radius") = 3, py::arg("reconstruct_radius") = 3, py::arg("tolerance") = 0.15,
      py::arg("seed_strategy") = "centroid");

  py::class_<fuzzy::MamdaniFis>(m, "Fis")
      .def_property_readonly("input_names",
                             [](const fuzzy::MamdaniFis& f) {
                               std::vector<std::string> names;
                               for (const auto& v : f.inputs()) names.push_back(v.name);
                               return names;
                             })
      .def_property_readonly("output_name", [](const fuzzy::MamdaniFis& f) { return f.output().name; })
      .def_property_readonly("rule_count", [](const fuzzy::MamdaniFis& f) { return f.rules().size(); })
      .def_property_readonly("resolution", &fuzzy::MamdaniFis::resolution)
      .def("with_resolution", &fuzzy::MamdaniFis::with_resolution, py::arg("resolution"))
      .def("serialize", [](const fuzzy::MamdaniFis& f) { return fuzzy::serialize_fis(f); })
      .def(
          "classify",
          [](const fuzzy::MamdaniFis& f, double size_fraction, double global_threshold, double circularity,
             double border_irregularity) {
            const auto c = fuzzy::classify(f, {size_fraction, global_threshold, circularity, border_irregularity});
            return py::make_tuple(c.crisp, std::string(fuzzy::to_token(c.label)), c.no_rule_fired);
          },
          py::arg("size_fraction"), py::arg("global_threshold"), py::arg("circularity") = 0.0,
          py::arg("border_irregularity") = 1.0)
      .def(
          "label_for_crisp",
          [](const fuzzy::MamdaniFis& f, double crisp) {
            return std::string(fuzzy::to_token(fuzzy::label_for_crisp(f, crisp)));
          },
          py::arg("crisp"))
      .def("aggregate", [](const fuzzy::MamdaniFis& f, const std::vector<double>& inputs) {
        return fuzzy::infer_mamdani(f, inputs).mu;
      });

  m.def("parse_fis", [](const std::string& text) { return fuzzy::parse_fis(text); }, py::arg("text"));
  m.def("load_fis", &fuzzy::load_fis, py::arg("path"));
  m.def("default_fis", [] { return fuzzy::default_fis(); });
  m.def("default_fis_text", [] { return std::string(fuzzy::default_fis_text()); });

  m.def(
      "confusion_matrix",
      [](const std::vector<std::string>& predictions, const std::vector<std::string>& truth) {
        std::vector<Label> p, t;
        for (const auto& s : predictions) p.push_back(label_of(s));
        for (const auto& s : truth) t.push_back(label_of(s));
        const ConfusionMatrix cm = confusion_matrix(p, t);
        return py::make_tuple(cm.tp, cm.fp, cm.fn, cm.tn);
      },
      py::arg("predictions"), py::arg("truth"));
  m.def(
      "compute_metrics",
      [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
        return metrics_dict(compute_metrics({tp, fp, fn, tn}));
      },
      py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
  m.def(
      "render_report",
      [](const std::map<std::string, std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>>& per_method,
         const std::string& format) {
        std::vector<MethodMetrics> entries;
        for (const auto& [method, cm] : per_method) {
          const auto& [tp, fp, fn, tn] = cm;
          entries.emplace_back(parse_method(method), compute_metrics({tp, fp, fn, tn}));
        }
        return render_report(entries, parse_report_format(format));
      },
      py::arg("confusion_matrices"), py::arg("format") = "text");

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& manifest, const std::string& method, int workers, int width, int height,
         const std::optional<std::filesystem::path>& fis) {
        PipelineConfig c;
        c.method = parse_method(method);
        c.workers = workers;
        c.resize = {width, height};
        if (fis) c.fis = *fis;
        const DatasetManifest dm = load_manifest(manifest, {.require_files = false});
        std::vector<PredictionRecord> records;
        {
          py::gil_scoped_release release;
          records = run_pipeline(c, dm);
        }
        py::list out;
        for (const auto& r : records) out.append(record_dict(r));
        const EvaluationResult eval = evaluate_predictions(records, dm);
        py::dict metrics;
        for (const auto& [mth, mm] : eval.methods) metrics[py::str(std::string(report_key(mth)))] = metrics_dict(mm);
        return py::make_tuple(out, metrics);
      },
      py::arg("manifest"), py::arg("method") = "region-growing", py::arg("workers") = 1, py::arg("width") = 256,
      py::arg("height") = 256, py::arg("fis") = py::none());
}
