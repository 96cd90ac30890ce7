// btfuzz: brain-MRI tumour classification from the command line.
//
//   btfuzz phantom   --count N --size WxH --seed S --out DIR
//   btfuzz classify  --manifest FILE --method M --fis FILE --config FILE --out predictions.csv
//   btfuzz evaluate  --pred predictions.csv --manifest FILE --format text|csv|json
//   btfuzz segment   --image FILE --method M --out mask.png
//   btfuzz fis-check --fis FILE
//
// Exit codes: 0 success, 1 fatal config/FIS/input error, 2 nothing to evaluate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "btfuzz/btfuzz.hpp"

namespace fs = std::filesystem;
using namespace btfuzz;

namespace {

constexpr int kExitFatal = 1;
constexpr int kExitNothingToEvaluate = 2;

struct PhantomArgs {
  int count = 50;
  std::string size = "64x64";
  std::uint64_t seed = 42;
  fs::path out;
  std::optional<int> radius_min;
  std::optional<int> radius_max;
  std::optional<double> blob;
  std::optional<double> background;
  std::optional<double> noise;
  std::string split = "test";
};

struct PipelineArgs {
  fs::path config;
  std::optional<std::string> method;
  std::optional<fs::path> fis;
  std::optional<int> workers;
  std::optional<std::string> resize;
  std::optional<double> tolerance;
  std::optional<int> marker_radius;
  std::optional<int> reconstruct_radius;
  std::optional<std::string> seed_strategy;
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& a) {
  cmd->add_option("--config", a.config, "key=value pipeline config file")->check(CLI::ExistingFile);
  cmd->add_option("--method", a.method, "watershed | region-growing");
  cmd->add_option("--fis", a.fis, "FIS rule file (default: built-in default.fis)");
  cmd->add_option("--workers", a.workers, "worker threads");
  cmd->add_option("--resize", a.resize, "resize target WxH (default 256x256)");
  cmd->add_option("--tolerance", a.tolerance, "region-growing tolerance");
  cmd->add_option("--marker-radius", a.marker_radius, "disc radius for watershed markers");
  cmd->add_option("--reconstruct-radius", a.reconstruct_radius, "disc radius for reconstruction");
  cmd->add_option("--seed-strategy", a.seed_strategy, "centroid | brightest");
}

PipelineConfig build_config(const PipelineArgs& a) {
  PipelineConfig config = a.config.empty() ? PipelineConfig{} : load_config(a.config);
  if (a.method) config.set("method", *a.method);
  if (a.fis) config.fis = *a.fis;
  if (a.workers) config.workers = *a.workers;
  if (a.resize) config.set("resize", *a.resize);
  if (a.tolerance) config.segmentation.tolerance = *a.tolerance;
  if (a.marker_radius) config.segmentation.marker_radius = *a.marker_radius;
  if (a.reconstruct_radius) config.segmentation.reconstruct_radius = *a.reconstruct_radius;
  if (a.seed_strategy) config.set("seed_strategy", *a.seed_strategy);
  config.validate();
  return config;
}

int run_phantom(const PhantomArgs& a) {
  const Size2 size = parse_size(a.size);
  PhantomSpec spec = PhantomSpec::scaled_for(size.width, size.height, a.count, a.seed);
  if (a.radius_min) spec.radius_min = *a.radius_min;
  if (a.radius_max) spec.radius_max = *a.radius_max;
  if (a.blob) spec.blob_intensity = *a.blob;
  if (a.background) spec.background_mean = *a.background;
  if (a.noise) spec.noise_amplitude = *a.noise;
  const Split split = parse_split(a.split);

  const auto images = generate_phantom(spec);
  fs::create_directories(a.out);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "phantom_%04zu_%s.png", i,
                  std::string(to_token(images[i].label)).c_str());
    save_png(images[i].image, a.out / name);
    entries.push_back({name, a.out / name, images[i].label, split});
  }
  write_manifest(DatasetManifest(std::move(entries)), a.out / "manifest.csv");
  std::cout << "wrote " << images.size() << " phantoms (" << spec.count_per_class << " per class, radius "
            << spec.radius_min << ".." << spec.radius_max << ") and manifest.csv to " << a.out.string()
            << '\n';
  return 0;
}

int run_classify(const PipelineArgs& pa, const fs::path& manifest_path, fs::path out) {
  const PipelineConfig config = build_config(pa);
  const fuzzy::MamdaniFis fis = load_pipeline_fis(config);
  const DatasetManifest manifest = load_manifest(manifest_path, {.require_files = false});
  const auto records = run_pipeline(config, fis, manifest);
  if (out.empty()) out = config.output_dir / "predictions.csv";
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_predictions_csv(records, out);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.ok() ? 0 : 1;
  std::cerr << "classified " << records.size() - failed << " of " << records.size() << " test images ("
            << to_token(config.method) << "); predictions in " << out.string() << '\n';
  return 0;
}

int run_evaluate(const fs::path& pred, const fs::path& manifest_path, const std::string& format_token) {
  const ReportFormat format = parse_report_format(format_token);
  const auto records = read_predictions_csv(pred);
  const DatasetManifest manifest = load_manifest(manifest_path, {.require_files = false});
  const EvaluationResult result = evaluate_predictions(records, manifest);
  if (result.comparable == 0) {
    std::cerr << "no prediction could be matched to a manifest entry\n";
    return kExitNothingToEvaluate;
  }
  std::cout << render_report(result.methods, format);
  return 0;
}

int run_segment(const PipelineArgs& pa, const fs::path& image, const fs::path& out,
                const std::optional<fs::path>& labels_out) {
  const PipelineConfig config = build_config(pa);
  const GrayImage filtered = preprocess_image(load_image(image), config);
  const TumourRegion region = tumour_region(filtered, config.method, config.segmentation);
  save_png(region.mask, out);
  if (labels_out) {
    if (!region.labels) throw InvalidArgument("--labels needs the watershed method");
    save_png16(*region.labels, *labels_out);
  }
  std::cout << "method=" << to_token(config.method) << " size_fraction=" << region.stats.size_fraction
            << " circularity=" << region.stats.circularity
            << " global_threshold=" << global_threshold_feature(filtered).value() << '\n';
  return 0;
}

int run_fis_check(const fs::path& path) {
  const fuzzy::MamdaniFis fis = fuzzy::load_fis(path);
  std::cout << path.string() << ": ok, " << fis.inputs().size() << " input(s), 1 output ("
            << fis.output().name << "), " << fis.rules().size() << " rule(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy brain-tumour classification pipeline"};
  app.require_subcommand(1);

  PhantomArgs phantom;
  auto* phantom_cmd = app.add_subcommand("phantom", "generate a synthetic labelled dataset");
  phantom_cmd->add_option("--count", phantom.count, "images per class")->check(CLI::NonNegativeNumber);
  phantom_cmd->add_option("--size", phantom.size, "image size WxH");
  phantom_cmd->add_option("--seed", phantom.seed, "random seed");
  phantom_cmd->add_option("--out", phantom.out, "output directory")->required();
  phantom_cmd->add_option("--radius-min", phantom.radius_min, "smallest disc radius (px)");
  phantom_cmd->add_option("--radius-max", phantom.radius_max, "largest disc radius (px)");
  phantom_cmd->add_option("--blob", phantom.blob, "disc intensity");
  phantom_cmd->add_option("--background", phantom.background, "background mean intensity");
  phantom_cmd->add_option("--noise", phantom.noise, "uniform noise amplitude");
  phantom_cmd->add_option("--split", phantom.split, "manifest split for every image (train|test)");

  PipelineArgs classify_args;
  fs::path classify_manifest, classify_out;
  auto* classify_cmd = app.add_subcommand("classify", "run the pipeline on a manifest's test split");
  classify_cmd->add_option("--manifest", classify_manifest, "dataset manifest CSV")->required();
  classify_cmd->add_option("--out", classify_out, "predictions CSV");
  add_pipeline_options(classify_cmd, classify_args);

  fs::path eval_pred, eval_manifest;
  std::string eval_format = "text";
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against manifest labels");
  eval_cmd->add_option("--pred", eval_pred, "predictions CSV")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "dataset manifest CSV")->required();
  eval_cmd->add_option("--format", eval_format, "text | csv | json");

  PipelineArgs segment_args;
  fs::path segment_image, segment_out;
  std::optional<fs::path> segment_labels;
  auto* segment_cmd = app.add_subcommand("segment", "segment one image and write the tumour mask");
  segment_cmd->add_option("--image", segment_image, "input image")->required();
  segment_cmd->add_option("--out", segment_out, "mask PNG")->required();
  segment_cmd->add_option("--labels", segment_labels, "16-bit watershed label PNG");
  add_pipeline_options(segment_cmd, segment_args);

  fs::path fis_path;
  auto* fis_cmd = app.add_subcommand("fis-check", "parse and validate a FIS file");
  fis_cmd->add_option("--fis", fis_path, "FIS rule file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*phantom_cmd) return run_phantom(phantom);
    if (*classify_cmd) return run_classify(classify_args, classify_manifest, classify_out);
    if (*eval_cmd) return run_evaluate(eval_pred, eval_manifest, eval_format);
    if (*segment_cmd) return run_segment(segment_args, segment_image, segment_out, segment_labels);
    if (*fis_cmd) return run_fis_check(fis_path);
  } catch (const std::exception& e) {
    std::cerr << "btfuzz: " << e.what() << '\n';
    return kExitFatal;
  }
  return kExitFatal;
}
