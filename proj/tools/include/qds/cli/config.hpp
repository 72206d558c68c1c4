#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qds/criteria.hpp"
#include "qds/hilbert.hpp"
#include "qds/models.hpp"

namespace qds::cli {

/// Invalid configuration; `what()` is "<path>:<line>: <message>".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Pipeline { check, simulate, bound, fit, verdict };

const char* to_string(Pipeline p);
Pipeline pipeline_from_string(const std::string& s);

enum class ModelType { heavy_ion, damped_oscillator, quadratic_pump };

const char* to_string(ModelType t);

struct ModelSpec {
  ModelType type = ModelType::damped_oscillator;
  // heavy_ion
  double w = 0.0, alpha = 0.0, nu = 0.0, b1 = 0.0;
  // damped_oscillator
  double gamma = 0.0, omega = 0.0;
  std::size_t n = 0;
  std::size_t buffer = 0;
  TruncationMode mode = TruncationMode::exact;
};

/// Builds the model at truncation n together with its reference operator C.
ModelBundle build_model(const ModelSpec& spec, std::size_t n);

/// Canonical JSON form: every field of the model type, keys sorted.
nlohmann::json model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const nlohmann::json& j);

struct VectorSpec {
  enum Kind { basis, explicit_vector, random } kind = basis;
  std::size_t index = 0;
  std::vector<Complex> values;
};

ComplexVector make_vector(const VectorSpec& spec, std::size_t n, std::uint64_t seed);

struct WeightSpec {
  std::string type = "lorentzian";
  double scale = 1.0;
  /// W = scale·(1 + |x|²)^{−power}.
  double power = 1.0;
};

struct ExperimentConfig {
  std::optional<Pipeline> pipeline;
  std::optional<ModelSpec> model;
  std::optional<double> lambda;
  std::vector<double> x_weights;
  std::vector<double> eps_grid;
  std::vector<std::size_t> n_ladder;
  std::vector<double> t_grid;
  VectorSpec u;
  double theta = 1e-3;
  std::uint64_t seed = 0;
  std::optional<Constants> constants;
  double delta = 1.0;
  double cf_b = 0.0;
  double resolvent_eps = 1e-3;
  std::vector<double> p_candidates;
  std::size_t k_max = 512;
  // bound pipeline
  std::optional<GridBasis> grid;
  WeightSpec weight;
  double alpha = 0.0;
  std::optional<std::string> out_dir;
  std::string source_path;
  std::string raw_text;
};

/// Parses and validates against the needs of `pipeline` (taken from the file
/// when absent). Throws ConfigError.
ExperimentConfig load_config(const std::string& path, std::optional<Pipeline> pipeline = std::nullopt);
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              std::optional<Pipeline> pipeline = std::nullopt);

}  // namespace qds::cli
