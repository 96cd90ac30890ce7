#include "btfuzz/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace btfuzz {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InvalidArgument("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
  }
  return value;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string format_fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Keeps a free-text message inside one CSV field.
std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ' ';
  }
  return s;
}

}  // namespace

Size2 parse_size(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) throw InvalidArgument("size must be WxH, got '" + std::string(text) + "'");
  return {parse_value<int>("size", text.substr(0, x)), parse_value<int>("size", text.substr(x + 1))};
}

void PipelineConfig::validate() const {
  if (resize.width < 1 || resize.height < 1) throw InvalidArgument("resize dims must be >= 1");
  if (median_window < 1 || median_window % 2 == 0) throw InvalidArgument("median_window must be odd and >= 1");
  const auto& s = segmentation;
  if (!(s.binarize_threshold >= 0.0 && s.binarize_threshold <= 1.0)) {
    throw InvalidArgument("binarize_threshold must lie in [0,1]");
  }
  if (s.marker_radius < 0 || s.reconstruct_radius < 0) throw InvalidArgument("radii must be >= 0");
  if (!(s.tolerance >= 0.0 && s.tolerance <= 1.0)) throw InvalidArgument("tolerance must lie in [0,1]");
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  if (key == "resize") resize = parse_size(value);
  else if (key == "resize_width") resize.width = parse_value<int>(key, value);
  else if (key == "resize_height") resize.height = parse_value<int>(key, value);
  else if (key == "median_window") median_window = parse_value<int>(key, value);
  else if (key == "binarize_threshold") segmentation.binarize_threshold = parse_value<double>(key, value);
  else if (key == "method") method = parse_method(value);
  else if (key == "marker_radius") segmentation.marker_radius = parse_value<int>(key, value);
  else if (key == "reconstruct_radius") segmentation.reconstruct_radius = parse_value<int>(key, value);
  else if (key == "tolerance") segmentation.tolerance = parse_value<double>(key, value);
  else if (key == "seed_strategy") segmentation.seed_strategy = parse_seed_strategy(value);
  else if (key == "fis") fis = std::string(value);
  else if (key == "output_dir") output_dir = std::string(value);
  else if (key == "workers") workers = parse_value<int>(key, value);
  else if (key == "seed") seed = parse_value<std::uint64_t>(key, value);
  else throw InvalidArgument("unknown config key '" + std::string(key) + "'");
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  PipelineConfig config = parse_config(buf.str());
  if (!config.fis.empty() && config.fis.is_relative()) config.fis = path.parent_path() / config.fis;
  return config;
}

std::string serialize_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "resize=" << c.resize.width << 'x' << c.resize.height << '\n'
      << "median_window=" << c.median_window << '\n'
      << "binarize_threshold=" << c.segmentation.binarize_threshold << '\n'
      << "method=" << to_token(c.method) << '\n'
      << "marker_radius=" << c.segmentation.marker_radius << '\n'
      << "reconstruct_radius=" << c.segmentation.reconstruct_radius << '\n'
      << "tolerance=" << c.segmentation.tolerance << '\n'
      << "seed_strategy=" << to_token(c.segmentation.seed_strategy) << '\n';
  if (!c.fis.empty()) out << "fis=" << c.fis.string() << '\n';
  out << "output_dir=" << c.output_dir.string() << '\n'
      << "workers=" << c.workers << '\n'
      << "seed=" << c.seed << '\n';
  return out.str();
}

GrayImage preprocess_image(const GrayImage& img, const PipelineConfig& config) {
  return median_filter(resize_with_aspect(img, config.resize), config.median_window);
}

PredictionRecord classify_image(const GrayImage& img, const PipelineConfig& config,
                                const fuzzy::MamdaniFis& fis) {
  PredictionRecord rec;
  rec.method = config.method;
  const GrayImage filtered = preprocess_image(img, config);

  rec.global_threshold = global_threshold_feature(filtered).value();

  fuzzy::FeatureVector features;
  features.global_threshold = rec.global_threshold;
  try {
    const TumourRegion region = tumour_region(filtered, config.method, config.segmentation);
    features.size_fraction = region.stats.size_fraction;
    features.circularity = region.stats.circularity;
    features.border_irregularity = region.stats.border_irregularity;
  } catch (const NoInternalMarker&) {
    // Foreground too thin to survive erosion: treated as no tumour region.
    rec.flags.emplace_back("no_internal_marker");
  }
  rec.size_fraction = features.size_fraction;

  const fuzzy::Classification cls = fuzzy::classify(fis, features);
  rec.crisp = cls.crisp;
  rec.label = cls.label;
  if (cls.no_rule_fired) rec.flags.emplace_back("no_rule_fired");
  return rec;
}

fuzzy::MamdaniFis load_pipeline_fis(const PipelineConfig& config) {
  fuzzy::MamdaniFis fis = config.fis.empty() ? fuzzy::default_fis() : fuzzy::load_fis(config.fis);
  fuzzy::require_classifier_shape(fis);
  return fis;
}

std::vector<PredictionRecord> run_pipeline(const PipelineConfig& config, const fuzzy::MamdaniFis& fis,
                                           const DatasetManifest& manifest) {
  config.validate();
  fuzzy::require_classifier_shape(fis);
  const std::vector<ManifestEntry> tests = manifest.split(Split::Test);
  std::vector<PredictionRecord> records(tests.size());

  auto work = [&](std::size_t i) {
    const ManifestEntry& entry = tests[i];
    try {
      records[i] = classify_image(load_image(entry.resolved), config, fis);
    } catch (const std::exception& e) {
      records[i] = PredictionRecord{};
      records[i].method = config.method;
      records[i].error = e.what();
    }
    records[i].path = entry.path;
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.workers), tests.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < tests.size(); ++i) work(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < tests.size(); i = next++) work(i);
      });
    }
  }
  return records;
}

std::vector<PredictionRecord> run_pipeline(const PipelineConfig& config, const DatasetManifest& manifest) {
  return run_pipeline(config, load_pipeline_fis(config), manifest);
}

void write_predictions_csv(const std::vector<PredictionRecord>& records, std::ostream& out) {
  out << "path,method,size_fraction,global_threshold,crisp,label,flags\n";
  for (const auto& r : records) {
    out << r.path << ',' << to_token(r.method) << ',';
    if (r.ok()) {
      out << format_fixed(r.size_fraction) << ',' << format_fixed(r.global_threshold) << ','
          << format_fixed(r.crisp) << ',' << fuzzy::to_token(*r.label) << ',';
      for (std::size_t i = 0; i < r.flags.size(); ++i) out << (i ? ";" : "") << r.flags[i];
    } else {
      out << ",,,," << "error=" << sanitize(r.error);
    }
    out << '\n';
  }
}

void write_predictions_csv(const std::vector<PredictionRecord>& records, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write predictions '" + path.string() + "'");
  write_predictions_csv(records, out);
}

std::vector<PredictionRecord> read_predictions_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open predictions '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "path,method,size_fraction,global_threshold,crisp,label,flags") {
    throw InvalidArgument("predictions '" + path.string() + "' has an unexpected header");
  }
  std::vector<PredictionRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 7) {
      throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields");
    }
    PredictionRecord r;
    r.path = f[0];
    r.method = parse_method(f[1]);
    if (f[6].rfind("error=", 0) == 0) {
      r.error = f[6].substr(6);
    } else {
      r.size_fraction = parse_value<double>("size_fraction", f[2]);
      r.global_threshold = parse_value<double>("global_threshold", f[3]);
      r.crisp = parse_value<double>("crisp", f[4]);
      if (f[5] == "tumour") r.label = fuzzy::Diagnosis::Tumour;
      else if (f[5] == "normal") r.label = fuzzy::Diagnosis::Normal;
      else throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": unknown label '" + f[5] + "'");
      std::istringstream flags(f[6]);
      for (std::string flag; std::getline(flags, flag, ';');) {
        if (!flag.empty()) r.flags.push_back(flag);
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

EvaluationResult evaluate_predictions(const std::vector<PredictionRecord>& records,
                                      const DatasetManifest& manifest) {
  std::map<std::string, Label> truth;
  for (const auto& e : manifest.entries()) truth.emplace(e.path, e.label);

  std::map<SegmentationMethod, std::pair<std::vector<Label>, std::vector<Label>>> grouped;
  EvaluationResult result;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    auto it = truth.find(r.path);
    if (it == truth.end()) continue;
    auto& [pred, actual] = grouped[r.method];
    pred.push_back(*r.label == fuzzy::Diagnosis::Tumour ? Label::Tumour : Label::NonTumour);
    actual.push_back(it->second);
    ++result.comparable;
  }
  for (const auto& [method, lists] : grouped) {
    const ConfusionMatrix cm = confusion_matrix(lists.first, lists.second);
    result.matrices.emplace_back(method, cm);
    result.methods.emplace_back(method, compute_metrics(cm));
  }
  return result;
}

}  // namespace btfuzz
