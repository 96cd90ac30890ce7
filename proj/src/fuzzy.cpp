#include "btfuzz/fuzzy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "default_fis.inc"

namespace btfuzz::fuzzy {

// ---------------------------------------------------------------------------
// Membership functions

MembershipFunction MembershipFunction::triangular(double a, double b, double c) {
  if (!(a <= b && b <= c)) throw InvalidArgument("triangular parameters must satisfy a <= b <= c");
  return MembershipFunction(Triangular{a, b, c});
}

MembershipFunction MembershipFunction::trapezoidal(double a, double b, double c, double d) {
  if (!(a <= b && b <= c && c <= d)) {
    throw InvalidArgument("trapezoidal parameters must satisfy a <= b <= c <= d");
  }
  return MembershipFunction(Trapezoidal{a, b, c, d});
}

double MembershipFunction::support_lo() const noexcept {
  return std::visit([](const auto& s) { return s.a; }, shape_);
}

double MembershipFunction::support_hi() const noexcept {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Triangular>) {
          return s.c;
        } else {
          return s.d;
        }
      },
      shape_);
}

namespace {

// Rising edge on [a, b), plateau on [b, c], falling edge on (c, d].
double trapezoid(double a, double b, double c, double d, double x) noexcept {
  if (x < a || x > d) return 0.0;
  if (x >= b && x <= c) return 1.0;
  if (x < b) return (x - a) / (b - a);
  return (d - x) / (d - c);
}

}  // namespace

double eval_membership(const MembershipFunction& mf, double x) noexcept {
  return std::visit(
      [x](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Triangular>) {
          return trapezoid(s.a, s.b, s.b, s.c, x);
        } else {
          return trapezoid(s.a, s.b, s.c, s.d, x);
        }
      },
      mf.shape());
}

std::optional<std::size_t> LinguisticVariable::find_term(std::string_view term) const noexcept {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].name == term) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// System

namespace {

void validate_variable(const LinguisticVariable& var) {
  if (!(var.lo < var.hi)) throw InvalidArgument("variable '" + var.name + "' needs lo < hi");
  std::set<std::string> names;
  for (const auto& t : var.terms) {
    if (!names.insert(t.name).second) {
      throw InvalidArgument("duplicate term '" + t.name + "' in variable '" + var.name + "'");
    }
    if (t.mf.support_lo() < var.lo || t.mf.support_hi() > var.hi) {
      throw InvalidArgument("term '" + t.name + "' leaves the universe of '" + var.name + "'");
    }
  }
}

}  // namespace

MamdaniFis::MamdaniFis(std::vector<LinguisticVariable> inputs, LinguisticVariable output,
                       std::vector<FuzzyRule> rules, std::size_t resolution)
    : inputs_(std::move(inputs)), output_(std::move(output)), rules_(std::move(rules)),
      resolution_(resolution) {
  if (inputs_.empty()) throw InvalidArgument("FIS needs at least one input");
  if (rules_.empty()) throw InvalidArgument("FIS needs at least one rule");
  if (resolution_ < 101) throw InvalidArgument("FIS resolution must be >= 101");
  std::set<std::string> names;
  for (const auto& v : inputs_) {
    validate_variable(v);
    if (!names.insert(v.name).second) throw InvalidArgument("duplicate variable '" + v.name + "'");
  }
  validate_variable(output_);
  if (!names.insert(output_.name).second) {
    throw InvalidArgument("duplicate variable '" + output_.name + "'");
  }
  for (const auto& rule : rules_) {
    if (rule.antecedents.empty()) throw InvalidArgument("rule without antecedents");
    for (const auto& a : rule.antecedents) {
      if (a.input >= inputs_.size() || a.term >= inputs_[a.input].terms.size()) {
        throw InvalidArgument("rule references an undefined input term");
      }
    }
    if (rule.consequent >= output_.terms.size()) {
      throw InvalidArgument("rule references an undefined output term");
    }
  }
}

MamdaniFis MamdaniFis::with_resolution(std::size_t resolution) const {
  return MamdaniFis(inputs_, output_, rules_, resolution);
}

MamdaniFis MamdaniFis::with_rules(std::vector<FuzzyRule> rules) const {
  return MamdaniFis(inputs_, output_, std::move(rules), resolution_);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Token {
  std::string_view text;
  int line;
  int column;
};

std::vector<Token> tokenize_line(std::string_view line, int line_no) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto is_space = [](char ch) { return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\v' || ch == '\f'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back({line.substr(start, i - start), line_no, static_cast<int>(start) + 1});
  }
  return tokens;
}

[[noreturn]] void fail(const Token& at, const std::string& message) {
  throw FisParseError(at.line, at.column, message);
}

double parse_number(const Token& tok) {
  double value = 0.0;
  const char* first = tok.text.data();
  const char* last = first + tok.text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    fail(tok, "expected a number, got '" + std::string(tok.text) + "'");
  }
  return value;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  });
}

const std::set<std::string_view, std::less<>> kReservedWords{"OR", "NOT", "WITH", "VERY", "SOMEWHAT"};

struct PendingVariable {
  LinguisticVariable var;
  Token at;
  bool is_output;
};

struct PendingTerm {
  Token var;
  Token name;
  MembershipFunction mf;
};

struct PendingRule {
  std::vector<std::pair<Token, Token>> antecedents;
  std::pair<Token, Token> consequent;
  Token at;
};

void expect_count(const std::vector<Token>& tokens, std::size_t n, const char* usage) {
  if (tokens.size() != n) {
    const Token& at = tokens.size() > n ? tokens[n] : tokens.back();
    fail(at, std::string("malformed statement, expected: ") + usage);
  }
}

Token identifier(const Token& tok, const char* what) {
  if (kReservedWords.contains(tok.text)) {
    fail(tok, "'" + std::string(tok.text) + "' is reserved and not supported");
  }
  if (!is_identifier(tok.text)) fail(tok, std::string("invalid ") + what + " '" + std::string(tok.text) + "'");
  return tok;
}

PendingRule parse_rule(const std::vector<Token>& t) {
  // rule IF v IS t (AND v IS t)* THEN v IS t
  PendingRule rule{{}, {}, t[0]};
  std::size_t i = 1;
  auto keyword = [&](std::string_view kw) {
    if (i >= t.size()) fail(t.back(), "unexpected end of rule, expected '" + std::string(kw) + "'");
    if (t[i].text != kw) {
      if (kReservedWords.contains(t[i].text)) {
        fail(t[i], "connective '" + std::string(t[i].text) + "' is not supported");
      }
      fail(t[i], "expected '" + std::string(kw) + "', got '" + std::string(t[i].text) + "'");
    }
    ++i;
  };
  auto clause = [&]() {
    if (i + 3 > t.size()) fail(t.back(), "incomplete clause, expected '<var> IS <term>'");
    const Token var = identifier(t[i], "variable name");
    ++i;
    keyword("IS");
    const Token term = identifier(t[i], "term name");
    ++i;
    return std::pair{var, term};
  };
  keyword("IF");
  rule.antecedents.push_back(clause());
  while (i < t.size() && t[i].text != "THEN") {
    keyword("AND");
    rule.antecedents.push_back(clause());
  }
  keyword("THEN");
  rule.consequent = clause();
  if (i != t.size()) fail(t[i], "unexpected '" + std::string(t[i].text) + "' after rule consequent");
  return rule;
}

}  // namespace

MamdaniFis parse_fis(std::string_view text) {
  std::vector<PendingVariable> variables;
  std::vector<PendingTerm> terms;
  std::vector<PendingRule> rules;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const auto tokens = tokenize_line(line, line_no);
    if (tokens.empty()) continue;
    const std::string_view head = tokens[0].text;
    if (head == "input" || head == "output") {
      expect_count(tokens, 4, "input|output <name> <lo> <hi>");
      PendingVariable v{{std::string(identifier(tokens[1], "variable name").text),
                         parse_number(tokens[2]), parse_number(tokens[3]), {}},
                        tokens[1], head == "output"};
      if (!(v.var.lo < v.var.hi)) fail(tokens[2], "universe of '" + v.var.name + "' needs lo < hi");
      variables.push_back(std::move(v));
    } else if (head == "term") {
      if (tokens.size() < 4) fail(tokens.back(), "malformed statement, expected: term <var> <name> tri|trap ...");
      const Token& kind = tokens[3];
      std::optional<MembershipFunction> mf;
      try {
        if (kind.text == "tri") {
          expect_count(tokens, 7, "term <var> <name> tri <a> <b> <c>");
          mf = MembershipFunction::triangular(parse_number(tokens[4]), parse_number(tokens[5]),
                                              parse_number(tokens[6]));
        } else if (kind.text == "trap") {
          expect_count(tokens, 8, "term <var> <name> trap <a> <b> <c> <d>");
          mf = MembershipFunction::trapezoidal(parse_number(tokens[4]), parse_number(tokens[5]),
                                               parse_number(tokens[6]), parse_number(tokens[7]));
        } else {
          fail(kind, "unknown membership function '" + std::string(kind.text) + "' (expected tri or trap)");
        }
      } catch (const InvalidArgument& e) {
        fail(tokens[4], e.what());
      }
      terms.push_back({identifier(tokens[1], "variable name"), identifier(tokens[2], "term name"), *mf});
    } else if (head == "rule") {
      rules.push_back(parse_rule(tokens));
    } else {
      fail(tokens[0], "unknown statement '" + std::string(head) + "'");
    }
  }

  // Resolve declarations.
  const PendingVariable* output = nullptr;
  std::vector<const PendingVariable*> inputs;
  for (const auto& v : variables) {
    for (const auto& other : variables) {
      if (&other == &v) break;
      if (other.var.name == v.var.name) fail(v.at, "duplicate variable '" + v.var.name + "'");
    }
    if (v.is_output) {
      if (output) fail(v.at, "second output variable '" + v.var.name + "' (exactly one is allowed)");
      output = &v;
    } else {
      inputs.push_back(&v);
    }
  }
  if (!output) throw FisParseError(1, 1, "no output variable declared");
  if (inputs.empty()) throw FisParseError(output->at.line, output->at.column, "no input variable declared");

  std::vector<LinguisticVariable> in_vars;
  for (const auto* v : inputs) in_vars.push_back(v->var);
  LinguisticVariable out_var = output->var;

  auto find_var = [&](std::string_view name) -> LinguisticVariable* {
    if (name == out_var.name) return &out_var;
    for (auto& v : in_vars) {
      if (v.name == name) return &v;
    }
    return nullptr;
  };

  for (const auto& t : terms) {
    LinguisticVariable* var = find_var(t.var.text);
    if (!var) fail(t.var, "term for undefined variable '" + std::string(t.var.text) + "'");
    if (var->find_term(t.name.text)) {
      fail(t.name, "duplicate term '" + std::string(t.name.text) + "' in variable '" + var->name + "'");
    }
    if (t.mf.support_lo() < var->lo || t.mf.support_hi() > var->hi) {
      fail(t.name, "term '" + std::string(t.name.text) + "' extends outside the universe of '" +
                       var->name + "'");
    }
    var->terms.push_back({std::string(t.name.text), t.mf});
  }

  if (rules.empty()) throw FisParseError(line_no, 1, "no rules declared");
  std::vector<FuzzyRule> resolved;
  for (const auto& r : rules) {
    FuzzyRule rule{{}, 0};
    for (const auto& [var_tok, term_tok] : r.antecedents) {
      auto it = std::find_if(in_vars.begin(), in_vars.end(),
                             [&](const auto& v) { return v.name == var_tok.text; });
      if (it == in_vars.end()) {
        fail(var_tok, "undefined input variable '" + std::string(var_tok.text) + "'");
      }
      auto term = it->find_term(term_tok.text);
      if (!term) {
        fail(term_tok, "undefined term '" + std::string(term_tok.text) + "' for variable '" + it->name + "'");
      }
      rule.antecedents.push_back({static_cast<std::size_t>(it - in_vars.begin()), *term});
    }
    const auto& [out_tok, out_term] = r.consequent;
    if (out_tok.text != out_var.name) {
      fail(out_tok, "rule consequent must name the output variable '" + out_var.name + "', got '" +
                        std::string(out_tok.text) + "'");
    }
    auto term = out_var.find_term(out_term.text);
    if (!term) fail(out_term, "undefined term '" + std::string(out_term.text) + "' for output '" + out_var.name + "'");
    rule.consequent = *term;
    resolved.push_back(std::move(rule));
  }
  return MamdaniFis(std::move(in_vars), std::move(out_var), std::move(resolved));
}

MamdaniFis load_fis(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open FIS file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_fis(buf.str());
  } catch (const FisParseError& e) {
    throw FisParseError(e.line(), e.column(), e.message() + " (in " + path.string() + ")");
  }
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

std::string serialize_fis(const MamdaniFis& fis) {
  std::ostringstream out;
  for (const auto& v : fis.inputs()) {
    out << "input " << v.name << ' ' << format_number(v.lo) << ' ' << format_number(v.hi) << '\n';
  }
  const auto& o = fis.output();
  out << "output " << o.name << ' ' << format_number(o.lo) << ' ' << format_number(o.hi) << '\n';
  auto write_terms = [&](const LinguisticVariable& var) {
    for (const auto& t : var.terms) {
      out << "term " << var.name << ' ' << t.name;
      std::visit(
          [&](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Triangular>) {
              out << " tri " << format_number(s.a) << ' ' << format_number(s.b) << ' ' << format_number(s.c);
            } else {
              out << " trap " << format_number(s.a) << ' ' << format_number(s.b) << ' '
                  << format_number(s.c) << ' ' << format_number(s.d);
            }
          },
          t.mf.shape());
      out << '\n';
    }
  };
  for (const auto& v : fis.inputs()) write_terms(v);
  write_terms(o);
  for (const auto& rule : fis.rules()) {
    out << "rule IF";
    for (std::size_t i = 0; i < rule.antecedents.size(); ++i) {
      const auto& a = rule.antecedents[i];
      const auto& var = fis.inputs()[a.input];
      out << (i ? " AND " : " ") << var.name << " IS " << var.terms[a.term].name;
    }
    out << " THEN " << o.name << " IS " << o.terms[rule.consequent].name << '\n';
  }
  return out.str();
}

std::string_view default_fis_text() noexcept { return kDefaultFisText; }

const MamdaniFis& default_fis() {
  static const MamdaniFis fis = parse_fis(kDefaultFisText);
  return fis;
}

// ---------------------------------------------------------------------------
// Inference

std::map<std::string, double> fuzzify(const LinguisticVariable& var, double x) {
  const double clamped = std::clamp(x, var.lo, var.hi);
  std::map<std::string, double> out;
  for (const auto& t : var.terms) out[t.name] = eval_membership(t.mf, clamped);
  return out;
}

std::vector<double> firing_strengths(const MamdaniFis& fis, std::span<const double> inputs) {
  if (inputs.size() != fis.inputs().size()) {
    throw InvalidArgument("expected " + std::to_string(fis.inputs().size()) + " input values, got " +
                          std::to_string(inputs.size()));
  }
  std::vector<double> strengths;
  strengths.reserve(fis.rules().size());
  for (const auto& rule : fis.rules()) {
    double s = 1.0;
    for (const auto& a : rule.antecedents) {
      const auto& var = fis.inputs()[a.input];
      const double x = std::clamp(inputs[a.input], var.lo, var.hi);
      s = std::min(s, eval_membership(var.terms[a.term].mf, x));
    }
    strengths.push_back(s);
  }
  return strengths;
}

SampledSet infer_mamdani(const MamdaniFis& fis, std::span<const double> inputs) {
  const auto strengths = firing_strengths(fis, inputs);
  const auto& out = fis.output();
  SampledSet agg{out.lo, out.hi, std::vector<double>(fis.resolution(), 0.0)};
  for (std::size_t r = 0; r < strengths.size(); ++r) {
    if (strengths[r] <= 0.0) continue;
    const auto& mf = out.terms[fis.rules()[r].consequent].mf;
    for (std::size_t i = 0; i < agg.mu.size(); ++i) {
      agg.mu[i] = std::max(agg.mu[i], std::min(strengths[r], eval_membership(mf, agg.x(i))));
    }
  }
  return agg;
}

Defuzzified defuzzify_centroid(const SampledSet& aggregate) {
  if (aggregate.mu.size() < 2) throw InvalidArgument("aggregate needs at least 2 samples");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < aggregate.mu.size(); ++i) {
    num += aggregate.x(i) * aggregate.mu[i];
    den += aggregate.mu[i];
  }
  if (den <= 0.0) return {0.5 * (aggregate.lo + aggregate.hi), true};
  return {std::clamp(num / den, aggregate.lo, aggregate.hi), false};
}

void FeatureVector::validate() const {
  for (double v : {size_fraction, global_threshold, circularity, border_irregularity}) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("feature value outside [0,1]");
  }
}

namespace {

std::optional<double> feature_by_name(const FeatureVector& f, std::string_view name) {
  if (name == "size" || name == "size_fraction") return f.size_fraction;
  if (name == "threshold" || name == "global_threshold") return f.global_threshold;
  if (name == "circularity") return f.circularity;
  if (name == "border_irregularity") return f.border_irregularity;
  return std::nullopt;
}

}  // namespace

std::vector<double> bind_inputs(const MamdaniFis& fis, const FeatureVector& features) {
  features.validate();
  std::vector<double> values;
  for (const auto& v : fis.inputs()) {
    auto value = feature_by_name(features, v.name);
    if (!value) throw InvalidArgument("FIS input '" + v.name + "' has no matching image feature");
    values.push_back(*value);
  }
  return values;
}

void require_classifier_shape(const MamdaniFis& fis) {
  for (const auto& v : fis.inputs()) {
    if (!feature_by_name(FeatureVector{}, v.name)) {
      throw InvalidArgument("FIS input '" + v.name +
                            "' has no matching image feature (size, threshold, circularity, "
                            "border_irregularity)");
    }
  }
  if (!fis.output().find_term("tumour") || !fis.output().find_term("normal")) {
    throw InvalidArgument("FIS output '" + fis.output().name + "' must define terms 'tumour' and 'normal'");
  }
}

std::string_view to_token(Diagnosis d) noexcept { return d == Diagnosis::Tumour ? "tumour" : "normal"; }

Diagnosis label_for_crisp(const MamdaniFis& fis, double crisp) {
  require_classifier_shape(fis);
  const auto& out = fis.output();
  const double tumour = eval_membership(out.terms[*out.find_term("tumour")].mf, crisp);
  const double normal = eval_membership(out.terms[*out.find_term("normal")].mf, crisp);
  // Equal degrees (up to rounding in the edge slopes) count as a tie.
  constexpr double kTieTolerance = 1e-12;
  return tumour >= normal - kTieTolerance ? Diagnosis::Tumour : Diagnosis::Normal;
}

Classification classify(const MamdaniFis& fis, const FeatureVector& features) {
  const auto inputs = bind_inputs(fis, features);
  const Defuzzified d = defuzzify_centroid(infer_mamdani(fis, inputs));
  return {d.value, label_for_crisp(fis, d.value), d.no_rule_fired};
}

}  // namespace btfuzz::fuzzy
