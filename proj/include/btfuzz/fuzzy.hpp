#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "btfuzz/error.hpp"

namespace btfuzz::fuzzy {

struct Triangular {
  double a, b, c;
};

struct Trapezoidal {
  double a, b, c, d;
};

/// Piecewise-linear membership function. Parameters are non-decreasing.
class MembershipFunction {
 public:
  using Shape = std::variant<Triangular, Trapezoidal>;

  static MembershipFunction triangular(double a, double b, double c);
  static MembershipFunction trapezoidal(double a, double b, double c, double d);

  const Shape& shape() const noexcept { return shape_; }
  /// Support bounds (first and last breakpoint).
  double support_lo() const noexcept;
  double support_hi() const noexcept;

 private:
  explicit MembershipFunction(Shape shape) : shape_(shape) {}
  Shape shape_;
};

/// Degree in [0,1]; 0 outside the support. A collapsed edge (a == b, or
/// c == d) is vertical and takes the value 1 at the shared point.
double eval_membership(const MembershipFunction& mf, double x) noexcept;

struct Term {
  std::string name;
  MembershipFunction mf;
};

struct LinguisticVariable {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<Term> terms;

  /// Index of the named term, or nullopt.
  std::optional<std::size_t> find_term(std::string_view term) const noexcept;
};

struct Antecedent {
  std::size_t input;  // index into MamdaniFis::inputs()
  std::size_t term;   // index into that input's terms
};

/// AND-joined antecedents implying one output term.
struct FuzzyRule {
  std::vector<Antecedent> antecedents;
  std::size_t consequent;  // index into the output's terms
};

inline constexpr std::size_t kDefaultResolution = 1001;

/// Validated Mamdani system: min for AND and implication, max aggregation,
/// centroid defuzzification. Immutable once built, so classification may be
/// shared across threads.
class MamdaniFis {
 public:
  MamdaniFis(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
             std::vector<FuzzyRule> rules, std::size_t resolution = kDefaultResolution);

  const std::vector<LinguisticVariable>& inputs() const noexcept { return inputs_; }
  const LinguisticVariable& output() const noexcept { return output_; }
  const std::vector<FuzzyRule>& rules() const noexcept { return rules_; }
  std::size_t resolution() const noexcept { return resolution_; }

  MamdaniFis with_resolution(std::size_t resolution) const;
  MamdaniFis with_rules(std::vector<FuzzyRule> rules) const;

 private:
  std::vector<LinguisticVariable> inputs_;
  LinguisticVariable output_;
  std::vector<FuzzyRule> rules_;
  std::size_t resolution_;
};

/// Parses the line-oriented FIS format:
///
///   input  <name> <lo> <hi>
///   output <name> <lo> <hi>
///   term <var> <termname> tri  <a> <b> <c>
///   term <var> <termname> trap <a> <b> <c> <d>
///   rule IF <var> IS <term> [AND <var> IS <term>]... THEN <outvar> IS <term>
///
/// `#` starts a comment. Errors are FisParseError with a 1-based position.
MamdaniFis parse_fis(std::string_view text);
MamdaniFis load_fis(const std::filesystem::path& path);
std::string serialize_fis(const MamdaniFis& fis);

/// Contents of the shipped default.fis.
std::string_view default_fis_text() noexcept;
const MamdaniFis& default_fis();

/// Degree per term, with `x` clamped into the universe first.
std::map<std::string, double> fuzzify(const LinguisticVariable& var, double x);

struct SampledSet {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> mu;

  double x(std::size_t i) const noexcept {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(mu.size() - 1);
  }
};

/// Firing strength of each rule for crisp inputs given in `fis.inputs()` order.
std::vector<double> firing_strengths(const MamdaniFis& fis, std::span<const double> inputs);

/// Aggregated output set sampled at fis.resolution() points.
SampledSet infer_mamdani(const MamdaniFis& fis, std::span<const double> inputs);

struct Defuzzified {
  double value = 0.0;
  bool no_rule_fired = false;
};

/// sum(x * mu) / sum(mu); an all-zero set yields the universe midpoint with
/// no_rule_fired set.
Defuzzified defuzzify_centroid(const SampledSet& aggregate);

/// Per-image classifier inputs. size_fraction and global_threshold feed the
/// default system; the shape descriptors bind to inputs named `circularity`
/// and `border_irregularity` when a FIS declares them.
struct FeatureVector {
  double size_fraction = 0.0;
  double global_threshold = 0.0;
  double circularity = 0.0;
  double border_irregularity = 1.0;

  void validate() const;
};

/// Input names: `size`, `threshold`, `circularity`, `border_irregularity`.
std::vector<double> bind_inputs(const MamdaniFis& fis, const FeatureVector& features);
/// Throws InvalidArgument if `fis` declares an input no feature binds to, or
/// if its output lacks `tumour` / `normal` terms.
void require_classifier_shape(const MamdaniFis& fis);

enum class Diagnosis { Tumour, Normal };
std::string_view to_token(Diagnosis d) noexcept;

struct Classification {
  double crisp = 0.0;
  Diagnosis label = Diagnosis::Normal;
  bool no_rule_fired = false;
};

/// Larger output-term membership at the crisp value wins; ties go to Tumour.
Diagnosis label_for_crisp(const MamdaniFis& fis, double crisp);
Classification classify(const MamdaniFis& fis, const FeatureVector& features);

}  // namespace btfuzz::fuzzy
