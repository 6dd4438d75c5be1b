#include "shotcheck/export.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shotcheck/config.hpp"

namespace shotcheck {
namespace {

constexpr const char* kRequestTag = "shotcheck-eval-request";
constexpr const char* kResponseTag = "shotcheck-eval-response";

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hessian_name(AdversarialHessian h) {
  switch (h) {
    case AdversarialHessian::exact:
      return "exact";
    case AdversarialHessian::gauss_newton:
      return "gauss-newton";
    case AdversarialHessian::none:
      return "none";
  }
  return "exact";
}

AdversarialHessian parse_hessian(const std::string& s) {
  if (s == "exact") return AdversarialHessian::exact;
  if (s == "gauss-newton") return AdversarialHessian::gauss_newton;
  if (s == "none") return AdversarialHessian::none;
  throw FormatError("unknown hessian mode '" + s + "'");
}

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

// Whitespace tokenizer over a whole text file.
class Tokens {
 public:
  explicit Tokens(const std::filesystem::path& file) : name_(file.string()) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read " + name_);
    std::stringstream ss;
    ss << in.rdbuf();
    text_ = ss.str();
  }

  std::string word() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of file");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::string rest_of_line() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    const std::size_t end = text_.find('\n', pos_);
    std::string out = text_.substr(pos_, end == std::string::npos ? std::string::npos : end - pos_);
    pos_ = end == std::string::npos ? text_.size() : end + 1;
    return out;
  }

  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) fail("expected '" + w + "', found '" + got + "'");
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size()) fail("not a number: '" + w + "'");
    return v;
  }

  long integer() {
    const std::string w = word();
    char* end = nullptr;
    const long v = std::strtol(w.c_str(), &end, 10);
    if (w.empty() || end != w.c_str() + w.size()) fail("not an integer: '" + w + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const { throw FormatError(name_ + ": " + what); }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string name_;
  std::string text_;
  std::size_t pos_ = 0;
};

void write_vector(std::ostream& out, const char* tag, const Eigen::VectorXd& v) {
  out << tag << ' ' << v.size() << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i) out << num(v(i)) << '\n';
}

Eigen::VectorXd read_vector(Tokens& t, long expected = -1) {
  const long n = t.integer();
  if (n < 0 || (expected >= 0 && n != expected)) t.fail("vector has the wrong length");
  Eigen::VectorXd v(n);
  for (long i = 0; i < n; ++i) v(i) = t.real();
  return v;
}

}  // namespace

void export_problem(const Transcription& problem, const std::filesystem::path& file) {
  const Nlp& nlp = problem.nlp();
  const ObjectiveSpec& obj = problem.objective();
  RunConfig run;
  run.problem = problem.config();
  const nlohmann::json full = to_json(run);
  nlohmann::json cfg;
  for (const char* key : {"rocket", "boundary", "limits", "transcription"}) cfg[key] = full.at(key);

  std::ofstream out = open_out(file);
  out << kNlpFormatTag << ' ' << kNlpFormatVersion << '\n';
  out << "method " << problem.map().name << '\n';
  out << "objective " << objective_name(obj.kind) << " p " << obj.p << " r " << num(obj.r) << " scale "
      << num(obj.scale) << " hessian " << hessian_name(obj.hessian) << '\n';
  out << "config " << cfg.dump() << '\n';
  out << "variables " << nlp.num_vars() << '\n';
  for (int i = 0; i < nlp.num_vars(); ++i) {
    out << i << ' ' << num(nlp.x_lo(i)) << ' ' << num(nlp.x_hi(i)) << ' ' << num(nlp.x_init(i)) << ' '
        << nlp.var_names[static_cast<std::size_t>(i)] << '\n';
  }
  out << "constraints " << nlp.num_constraints() << '\n';
  for (int i = 0; i < nlp.num_constraints(); ++i) {
    out << i << ' ' << num(nlp.g_lo(i)) << ' ' << num(nlp.g_hi(i)) << ' ' << nlp.row_kinds[static_cast<std::size_t>(i)]
        << '\n';
  }
  out << "jacobian " << nlp.jacobian_nnz() << '\n';
  for (const auto& [r, c] : nlp.jacobian_structure()) out << r << ' ' << c << '\n';
  out << "hessian " << nlp.hessian_nnz() << '\n';
  for (const auto& [r, c] : nlp.hessian_structure()) out << r << ' ' << c << '\n';
  out << "end\n";
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::unique_ptr<Transcription> import_problem(const std::filesystem::path& file) {
  Tokens t(file);
  t.expect(kNlpFormatTag);
  if (t.integer() != kNlpFormatVersion) t.fail("unsupported format version");
  t.expect("method");
  const std::string method_name = t.word();
  t.expect("objective");
  ObjectiveSpec obj;
  try {
    obj.kind = parse_objective(t.word());
  } catch (const std::invalid_argument& e) {
    t.fail(e.what());
  }
  t.expect("p");
  obj.p = static_cast<int>(t.integer());
  t.expect("r");
  obj.r = t.real();
  t.expect("scale");
  obj.scale = t.real();
  t.expect("hessian");
  obj.hessian = parse_hessian(t.word());
  t.expect("config");
  ProblemConfig cfg;
  try {
    cfg = run_config_from_json(nlohmann::json::parse(t.rest_of_line())).problem;
  } catch (const nlohmann::json::exception& e) {
    t.fail(std::string("bad embedded config: ") + e.what());
  } catch (const ConfigError& e) {
    t.fail(std::string("bad embedded config: ") + e.what());
  }

  std::unique_ptr<Transcription> built;
  try {
    built = build_transcription(method(method_name), obj, cfg);
  } catch (const std::invalid_argument& e) {
    t.fail(e.what());
  }
  const Nlp& nlp = built->nlp();

  t.expect("variables");
  if (t.integer() != nlp.num_vars()) t.fail("variable count does not match the rebuilt problem");
  for (int i = 0; i < nlp.num_vars(); ++i) {
    if (t.integer() != i) t.fail("variables out of order");
    const double lo = t.real();
    const double hi = t.real();
    const double init = t.real();
    const std::string name = t.word();
    if (lo != nlp.x_lo(i) || hi != nlp.x_hi(i) || init != nlp.x_init(i) ||
        name != nlp.var_names[static_cast<std::size_t>(i)]) {
      t.fail("variable " + std::to_string(i) + " does not match the rebuilt problem");
    }
  }
  t.expect("constraints");
  if (t.integer() != nlp.num_constraints()) t.fail("constraint count does not match the rebuilt problem");
  for (int i = 0; i < nlp.num_constraints(); ++i) {
    if (t.integer() != i) t.fail("constraints out of order");
    const double lo = t.real();
    const double hi = t.real();
    const std::string kind = t.word();
    if (lo != nlp.g_lo(i) || hi != nlp.g_hi(i) || kind != nlp.row_kinds[static_cast<std::size_t>(i)]) {
      t.fail("constraint " + std::to_string(i) + " does not match the rebuilt problem");
    }
  }
  auto check_pattern = [&](const char* tag, const std::vector<std::pair<int, int>>& pattern) {
    t.expect(tag);
    if (t.integer() != static_cast<long>(pattern.size())) t.fail(std::string(tag) + " nonzero count mismatch");
    for (const auto& [r, c] : pattern) {
      if (t.integer() != r || t.integer() != c) t.fail(std::string(tag) + " pattern mismatch");
    }
  };
  check_pattern("jacobian", nlp.jacobian_structure());
  check_pattern("hessian", nlp.hessian_structure());
  t.expect("end");
  return built;
}

void write_evaluation_request(const EvaluationRequest& request, const std::filesystem::path& file) {
  std::ofstream out = open_out(file);
  out << kRequestTag << ' ' << kNlpFormatVersion << '\n';
  out << "want";
  if (request.objective) out << " objective";
  if (request.gradient) out << " gradient";
  if (request.constraints) out << " constraints";
  if (request.jacobian) out << " jacobian";
  out << '\n';
  write_vector(out, "point", request.point);
  out << "end\n";
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

EvaluationRequest read_evaluation_request(const std::filesystem::path& file) {
  Tokens t(file);
  t.expect(kRequestTag);
  if (t.integer() != kNlpFormatVersion) t.fail("unsupported format version");
  t.expect("want");
  EvaluationRequest req;
  req.objective = req.gradient = req.constraints = req.jacobian = false;
  for (std::string w = t.word(); w != "point"; w = t.word()) {
    if (w == "objective") {
      req.objective = true;
    } else if (w == "gradient") {
      req.gradient = true;
    } else if (w == "constraints") {
      req.constraints = true;
    } else if (w == "jacobian") {
      req.jacobian = true;
    } else {
      t.fail("unknown request item '" + w + "'");
    }
  }
  req.point = read_vector(t);
  t.expect("end");
  return req;
}

EvaluationResponse evaluate(const Transcription& problem, const EvaluationRequest& request) {
  const Nlp& nlp = problem.nlp();
  if (request.point.size() != nlp.num_vars()) {
    throw std::invalid_argument("evaluation point has " + std::to_string(request.point.size()) +
                                " entries, the problem has " + std::to_string(nlp.num_vars()) + " variables");
  }
  EvaluationResponse resp;
  if (request.objective) resp.objective = nlp.objective(request.point);
  if (request.gradient) resp.gradient = nlp.gradient(request.point);
  if (request.constraints) resp.constraints = nlp.constraints(request.point);
  if (request.jacobian) {
    std::vector<double> vals;
    nlp.jacobian_values(request.point, vals);
    resp.jacobian = std::move(vals);
  }
  return resp;
}

EvaluationResponse serve_evaluation_request(const Transcription& problem, const std::filesystem::path& request,
                                            const std::filesystem::path& response) {
  EvaluationResponse resp = evaluate(problem, read_evaluation_request(request));
  write_evaluation_response(resp, response);
  return resp;
}

void write_evaluation_response(const EvaluationResponse& response, const std::filesystem::path& file) {
  std::ofstream out = open_out(file);
  out << kResponseTag << ' ' << kNlpFormatVersion << '\n';
  if (response.objective) out << "objective " << num(*response.objective) << '\n';
  if (response.gradient) write_vector(out, "gradient", *response.gradient);
  if (response.constraints) write_vector(out, "constraints", *response.constraints);
  if (response.jacobian) {
    out << "jacobian " << response.jacobian->size() << '\n';
    for (double v : *response.jacobian) out << num(v) << '\n';
  }
  out << "end\n";
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

EvaluationResponse read_evaluation_response(const std::filesystem::path& file) {
  Tokens t(file);
  t.expect(kResponseTag);
  if (t.integer() != kNlpFormatVersion) t.fail("unsupported format version");
  EvaluationResponse resp;
  for (std::string w = t.word(); w != "end"; w = t.word()) {
    if (w == "objective") {
      resp.objective = t.real();
    } else if (w == "gradient") {
      resp.gradient = read_vector(t);
    } else if (w == "constraints") {
      resp.constraints = read_vector(t);
    } else if (w == "jacobian") {
      const Eigen::VectorXd v = read_vector(t);
      resp.jacobian = std::vector<double>(v.data(), v.data() + v.size());
    } else {
      t.fail("unknown response item '" + w + "'");
    }
  }
  return resp;
}

}  // namespace shotcheck
