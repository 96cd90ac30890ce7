#include "btfuzz/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace btfuzz {

ConfusionMatrix confusion_matrix(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size()) {
    throw InvalidArgument("prediction and truth lists differ in length (" +
                          std::to_string(predictions.size()) + " vs " + std::to_string(truth.size()) + ")");
  }
  if (predictions.empty()) throw InvalidArgument("confusion matrix needs at least one case");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool predicted = predictions[i] == Label::Tumour;
    const bool actual = truth[i] == Label::Tumour;
    if (predicted && actual) ++cm.tp;
    else if (predicted) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

std::int64_t Ratio::percent_hundredths() const noexcept {
  // floor(10000 * num / den + 1/2)
  const auto n = static_cast<unsigned __int128>(num) * 20000 + den;
  return static_cast<std::int64_t>(n / (static_cast<unsigned __int128>(den) * 2));
}

std::string Ratio::percent_text() const {
  const std::int64_t h = percent_hundredths();
  std::ostringstream out;
  out << h / 100 << '.' << std::setw(2) << std::setfill('0') << h % 100;
  return out.str();
}

std::vector<std::string> Metrics::undefined() const {
  std::vector<std::string> out;
  if (!precision) out.emplace_back("precision");
  if (!recall) out.emplace_back("recall");
  if (!f1) out.emplace_back("f1");
  return out;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("metrics need a non-empty confusion matrix");
  Metrics m;
  m.accuracy = {cm.tp + cm.tn, cm.total()};
  if (cm.tp + cm.fp > 0) m.precision = Ratio{cm.tp, cm.tp + cm.fp};
  if (cm.tp + cm.fn > 0) m.recall = Ratio{cm.tp, cm.tp + cm.fn};
  // 2PR/(P+R) reduces to 2tp / (2tp + fp + fn); it is undefined when P + R = 0.
  if (m.precision && m.recall && cm.tp > 0) m.f1 = Ratio{2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn};
  return m;
}

ReportFormat parse_report_format(std::string_view token) {
  if (token == "text") return ReportFormat::Text;
  if (token == "csv") return ReportFormat::Csv;
  if (token == "json") return ReportFormat::Json;
  throw InvalidArgument("unknown report format '" + std::string(token) + "'");
}

namespace {

std::optional<Ratio> metric(const Metrics& m, std::string_view key) {
  if (key == "accuracy") return m.accuracy;
  if (key == "precision") return m.precision;
  if (key == "recall") return m.recall;
  return m.f1;
}

constexpr std::pair<std::string_view, std::string_view> kRows[] = {
    {"accuracy", "Accuracy"}, {"precision", "Precision"}, {"recall", "Recall"}, {"f1", "F1-Score"}};

std::string_view method_title(SegmentationMethod m) {
  return m == SegmentationMethod::Watershed ? "Watershed" : "Region Growing";
}

}  // namespace

std::string render_report(std::vector<MethodMetrics> entries, ReportFormat format) {
  if (entries.empty()) throw InvalidArgument("report needs at least one method");
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.first == SegmentationMethod::Watershed && b.first != SegmentationMethod::Watershed;
  });

  std::ostringstream out;
  switch (format) {
    case ReportFormat::Csv: {
      out << "metric";
      for (const auto& [method, _] : entries) out << ',' << report_key(method);
      out << '\n';
      for (const auto& [key, title] : kRows) {
        out << key;
        for (const auto& [_, m] : entries) {
          out << ',';
          if (auto r = metric(m, key)) out << r->percent_text();
        }
        out << '\n';
      }
      break;
    }
    case ReportFormat::Json: {
      nlohmann::ordered_json doc = nlohmann::ordered_json::object();
      for (const auto& [method, m] : entries) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (const auto& [key, title] : kRows) {
          if (auto r = metric(m, key)) obj[std::string(key)] = static_cast<double>(r->percent_hundredths()) / 100.0;
        }
        doc[std::string(report_key(method))] = std::move(obj);
      }
      out << doc.dump(2) << '\n';
      break;
    }
    case ReportFormat::Text: {
      constexpr int kFirst = 28;
      constexpr int kCol = 16;
      out << std::left << std::setw(kFirst) << "Edge Detection Technique";
      for (const auto& [method, _] : entries) out << std::setw(kCol) << method_title(method);
      out << '\n';
      for (const auto& [key, title] : kRows) {
        out << std::setw(kFirst) << title;
        for (const auto& [_, m] : entries) {
          auto r = metric(m, key);
          out << std::setw(kCol) << (r ? r->percent_text() : std::string("-"));
        }
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

}  // namespace btfuzz
