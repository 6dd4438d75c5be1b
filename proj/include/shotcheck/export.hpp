#pragma once

// Plain-text export of a transcription for external NLP solvers, and a
// file-based evaluation protocol. The format is described in
// docs/nlp-format.md.

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shotcheck/transcription.hpp"

namespace shotcheck {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kNlpFormatTag = "shotcheck-nlp";
inline constexpr int kNlpFormatVersion = 1;

// Writes the problem file (header, embedded config, bounds, initial point,
// Jacobian and Hessian triplets).
void export_problem(const Transcription& problem, const std::filesystem::path& file);

// Rebuilds the transcription described by a problem file and checks that
// its dimensions, bounds and sparsity match what the file declares.
std::unique_ptr<Transcription> import_problem(const std::filesystem::path& file);

struct EvaluationRequest {
  Eigen::VectorXd point;
  bool objective = true;
  bool gradient = false;
  bool constraints = true;
  bool jacobian = false;
};

struct EvaluationResponse {
  std::optional<double> objective;
  std::optional<Eigen::VectorXd> gradient;
  std::optional<Eigen::VectorXd> constraints;
  std::optional<std::vector<double>> jacobian;  // values in declared triplet order
};

void write_evaluation_request(const EvaluationRequest& request, const std::filesystem::path& file);
EvaluationRequest read_evaluation_request(const std::filesystem::path& file);

EvaluationResponse evaluate(const Transcription& problem, const EvaluationRequest& request);
// Reads a request, evaluates it and writes the response file.
EvaluationResponse serve_evaluation_request(const Transcription& problem, const std::filesystem::path& request,
                                            const std::filesystem::path& response);

void write_evaluation_response(const EvaluationResponse& response, const std::filesystem::path& file);
EvaluationResponse read_evaluation_response(const std::filesystem::path& file);

}  // namespace shotcheck
