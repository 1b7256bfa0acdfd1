#include "experiments/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "spikedet/error.hpp"

namespace spikedet::experiments {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

[[noreturn]] void fail(const std::string& key, int line, const std::string& msg) {
  throw ConfigError(key, line, msg);
}

double parse_double(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    fail(key, line, "expected a finite number, got '" + s + "'");
  }
  return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail(key, line, "expected an integer, got '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail(key, line, "expected true or false, got '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& text, int line) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(key, part, line));
  return out;
}

// "re", "re+imi", "re-imi", "imi".
cplx parse_complex(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  if (s.empty() || s.back() != 'i') return {parse_double(key, s, line), 0.0};
  const std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not part of an exponent or leading.
  for (std::size_t p = body.size(); p-- > 1;) {
    if ((body[p] == '+' || body[p] == '-') && body[p - 1] != 'e' && body[p - 1] != 'E') {
      const double re = parse_double(key, body.substr(0, p), line);
      const std::string im = body.substr(body[p] == '+' ? p + 1 : p);
      return {re, parse_double(key, im, line)};
    }
  }
  return {0.0, parse_double(key, body, line)};
}

std::string format_complex(cplx z) {
  if (z.imag() == 0.0) return format_double(z.real());
  std::string im = format_double(z.imag());
  if (im.front() != '-') im = "+" + im;
  return format_double(z.real()) + im + "i";
}

GramEntry parse_gram_entry(const std::string& key, const std::string& text, int line) {
  const std::string s = trim(text);
  GramEntry g;
  if (s == "identity") return g;
  if (s == "all-ones") {
    g.kind = GramEntry::Kind::AllOnes;
    return g;
  }
  const std::string two = "two-eigenvalue:";
  if (s.rfind(two, 0) == 0) {
    const auto vals = parse_double_list(key, s.substr(two.size()), line);
    if (vals.size() != 2) fail(key, line, "two-eigenvalue needs exactly two values a,b");
    g.kind = GramEntry::Kind::TwoEigenvalue;
    g.a = vals[0];
    g.b = vals[1];
    if (g.a < 0.0 || g.b < 0.0 || std::abs(g.a + g.b - 2.0) > 1e-12) {
      fail(key, line, "two-eigenvalue:a,b needs a, b >= 0 and a + b = 2");
    }
    return g;
  }
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') {
    const auto rows = split(s.substr(1, s.size() - 2), ';');
    std::vector<std::vector<cplx>> vals;
    for (const auto& row : rows) {
      std::vector<cplx> entries;
      for (const auto& e : split(row, ',')) entries.push_back(parse_complex(key, e, line));
      vals.push_back(std::move(entries));
    }
    const auto r = static_cast<Eigen::Index>(vals.size());
    g.kind = GramEntry::Kind::Literal;
    g.literal = CMatrix(r, r);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (static_cast<Eigen::Index>(vals[static_cast<std::size_t>(i)].size()) != r) {
        fail(key, line, "literal Gram must be square");
      }
      for (Eigen::Index j = 0; j < r; ++j) g.literal(i, j) = vals[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return g;
  }
  fail(key, line,
       "unknown Gram '" + s + "' (expected identity, all-ones, two-eigenvalue:a,b or [..;..])");
}

std::string format_gram_entry(const GramEntry& g) {
  switch (g.kind) {
    case GramEntry::Kind::Identity:
      return "identity";
    case GramEntry::Kind::AllOnes:
      return "all-ones";
    case GramEntry::Kind::TwoEigenvalue:
      return "two-eigenvalue:" + format_double(g.a) + "," + format_double(g.b);
    case GramEntry::Kind::Literal:
      break;
  }
  std::string s = "[";
  for (Eigen::Index i = 0; i < g.literal.rows(); ++i) {
    if (i > 0) s += ";";
    for (Eigen::Index j = 0; j < g.literal.cols(); ++j) {
      if (j > 0) s += ",";
      s += format_complex(g.literal(i, j));
    }
  }
  return s + "]";
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& fmt, const char* sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += sep;
    s += fmt(v[i]);
  }
  return s;
}

}  // namespace

ConfigError::ConfigError(std::string field, int line, const std::string& message)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ", " : std::string()) +
                         "field '" + field + "': " + message),
      field_(std::move(field)),
      line_(line) {}

std::string to_string(Experiment kind) {
  switch (kind) {
    case Experiment::Threshold: return "threshold";
    case Experiment::Cloud: return "cloud";
    case Experiment::Moment: return "moment";
    case Experiment::Split: return "split";
    case Experiment::XiTail: return "xi-tail";
    case Experiment::Roc: return "roc";
  }
  return "threshold";
}

Experiment experiment_from_string(const std::string& text) {
  for (auto k : {Experiment::Threshold, Experiment::Cloud, Experiment::Moment, Experiment::Split,
                 Experiment::XiTail, Experiment::Roc}) {
    if (to_string(k) == text) return k;
  }
  throw ConfigError("kind", 0, "unknown experiment '" + text + "'");
}

CMatrix GramEntry::resolve(int r) const {
  switch (kind) {
    case Kind::Identity: return identity_gram(r);
    case Kind::AllOnes: return all_ones_gram(r);
    case Kind::TwoEigenvalue:
      if (r != 2) throw ConfigError("grams", 0, "two-eigenvalue preset needs r = 2");
      return two_eigenvalue_gram(a, b);
    case Kind::Literal:
      if (literal.rows() != r) {
        throw ConfigError("grams", 0, "literal Gram is " + std::to_string(literal.rows()) +
                                          "x" + std::to_string(literal.rows()) + " but r = " +
                                          std::to_string(r));
      }
      return literal;
  }
  return identity_gram(r);
}

bool operator==(const GramEntry& x, const GramEntry& y) {
  if (x.kind != y.kind || x.a != y.a || x.b != y.b) return false;
  if (x.literal.rows() != y.literal.rows() || x.literal.cols() != y.literal.cols()) return false;
  return x.literal.size() == 0 || x.literal == y.literal;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void set_field(ExperimentConfig& c, const std::string& raw_key, const std::string& value, int line) {
  const std::string key = trim(raw_key);
  const std::string v = trim(value);
  if (key == "kind") {
    try {
      c.kind = experiment_from_string(v);
    } catch (const ConfigError&) {
      fail(key, line, "unknown experiment '" + v + "'");
    }
  } else if (key == "d") {
    c.d = parse_int<int>(key, v, line);
    if (c.d < 2) fail(key, line, "d must be >= 2");
  } else if (key == "r") {
    c.r = parse_int<int>(key, v, line);
    if (c.r < 1) fail(key, line, "r must be >= 1");
  } else if (key == "lambdas") {
    c.lambdas = parse_double_list(key, v, line);
    for (double l : c.lambdas) {
      if (l < 0.0) fail(key, line, "amplitudes must be >= 0");
    }
  } else if (key == "grams") {
    c.grams.clear();
    for (const auto& part : split(v, '|')) c.grams.push_back(parse_gram_entry(key, part, line));
  } else if (key == "n") {
    c.n.clear();
    for (const auto& part : split(v, ',')) {
      const int n = parse_int<int>(key, part, line);
      if (n < 1) fail(key, line, "n must be >= 1");
      c.n.push_back(n);
    }
  } else if (key == "samples") {
    c.samples = parse_int<std::uint64_t>(key, v, line);
  } else if (key == "inner") {
    c.inner = parse_int<std::uint64_t>(key, v, line);
  } else if (key == "estimator") {
    if (v == "haar") c.estimator = Estimator::Haar;
    else if (v == "direct") c.estimator = Estimator::Direct;
    else fail(key, line, "expected haar or direct");
  } else if (key == "prior") {
    if (v == "haar") c.prior = SpikePrior::HaarRotated;
    else if (v == "fixed") c.prior = SpikePrior::Fixed;
    else fail(key, line, "expected haar or fixed");
  } else if (key == "epsilon") {
    if (v == "auto") {
      c.epsilon.reset();
    } else {
      c.epsilon = parse_double(key, v, line);
      if (!(*c.epsilon > 0.0)) fail(key, line, "epsilon must be > 0");
    }
  } else if (key == "t") {
    c.t = parse_double_list(key, v, line);
    for (double t : c.t) {
      if (t < 0.0 || t > 1.0) fail(key, line, "t values must lie in [0, 1]");
    }
  } else if (key == "bins") {
    c.bins = parse_int<int>(key, v, line);
    if (c.bins < 1) fail(key, line, "bins must be >= 1");
  } else if (key == "seed") {
    c.seed = parse_int<std::uint64_t>(key, v, line);
  } else if (key == "null_model") {
    c.null_model = parse_bool(key, v, line);
  } else if (key == "format") {
    if (v == "csv") c.format = OutputFormat::Csv;
    else if (v == "json") c.format = OutputFormat::Json;
    else fail(key, line, "expected csv or json");
  } else if (key == "out") {
    c.out = v;
  } else if (key == "threads") {
    c.threads = parse_int<unsigned>(key, v, line);
  } else if (key == "timing") {
    c.timing = parse_bool(key, v, line);
  } else {
    fail(key, line, "unknown key");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(body, line, "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) fail(key, line, "duplicate key");
    seen.push_back(key);
    set_field(c, key, body.substr(eq + 1), line);
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> config_fields(const ExperimentConfig& c,
                                                               bool execution) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("kind", to_string(c.kind));
  f.emplace_back("d", std::to_string(c.d));
  f.emplace_back("r", std::to_string(c.r));
  f.emplace_back("lambdas", join(c.lambdas, format_double));
  f.emplace_back("grams", join(c.grams, format_gram_entry, " | "));
  f.emplace_back("n", join(c.n, [](int n) { return std::to_string(n); }));
  f.emplace_back("samples", std::to_string(c.samples));
  f.emplace_back("inner", std::to_string(c.inner));
  f.emplace_back("estimator", c.estimator == Estimator::Haar ? "haar" : "direct");
  f.emplace_back("prior", c.prior == SpikePrior::HaarRotated ? "haar" : "fixed");
  f.emplace_back("epsilon", c.epsilon ? format_double(*c.epsilon) : "auto");
  f.emplace_back("t", join(c.t, format_double));
  f.emplace_back("bins", std::to_string(c.bins));
  f.emplace_back("seed", std::to_string(c.seed));
  f.emplace_back("null_model", c.null_model ? "true" : "false");
  f.emplace_back("format", c.format == OutputFormat::Csv ? "csv" : "json");
  if (execution) {
    f.emplace_back("out", c.out);
    f.emplace_back("threads", std::to_string(c.threads));
    f.emplace_back("timing", c.timing ? "true" : "false");
  }
  return f;
}

std::string serialize_config(const ExperimentConfig& c, bool execution) {
  std::string s;
  for (const auto& [k, v] : config_fields(c, execution)) s += k + " = " + v + "\n";
  return s;
}

GramSet resolve_grams(const ExperimentConfig& c) {
  if (c.grams.size() != 1 && c.grams.size() != static_cast<std::size_t>(c.d)) {
    throw ConfigError("grams", 0, "expected 1 or d = " + std::to_string(c.d) + " Grams, got " +
                                      std::to_string(c.grams.size()));
  }
  GramSet out;
  for (int k = 0; k < c.d; ++k) {
    const GramEntry& g = c.grams.size() == 1 ? c.grams.front() : c.grams[static_cast<std::size_t>(k)];
    out.grams.push_back(g.resolve(c.r));
  }
  try {
    out.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grams", 0, e.what());
  }
  return out;
}

SpikeSpec build_spec(const ExperimentConfig& c, int n) {
  if (c.lambdas.size() != static_cast<std::size_t>(c.r)) {
    throw ConfigError("lambdas", 0, "expected r = " + std::to_string(c.r) + " amplitudes, got " +
                                        std::to_string(c.lambdas.size()));
  }
  if (n < c.r) throw ConfigError("n", 0, "n = " + std::to_string(n) + " is below r");
  const GramSet grams = resolve_grams(c);
  const auto policy = c.null_model ? AmplitudePolicy::AllowZero : AmplitudePolicy::StrictlyPositive;
  try {
    return make_spike(c.lambdas, grams, n, nullptr, policy);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("lambdas", 0, e.what());
  }
}

}  // namespace spikedet::experiments
