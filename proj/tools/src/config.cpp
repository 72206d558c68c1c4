#include "qds/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "qds/errors.hpp"

namespace qds::cli {

using nlohmann::json;

const char* to_string(Pipeline p) {
  switch (p) {
    case Pipeline::check: return "check";
    case Pipeline::simulate: return "simulate";
    case Pipeline::bound: return "bound";
    case Pipeline::fit: return "fit";
    case Pipeline::verdict: return "verdict";
  }
  return "?";
}

Pipeline pipeline_from_string(const std::string& s) {
  for (Pipeline p : {Pipeline::check, Pipeline::simulate, Pipeline::bound, Pipeline::fit, Pipeline::verdict})
    if (s == to_string(p)) return p;
  throw std::invalid_argument("unknown pipeline '" + s + "'");
}

const char* to_string(ModelType t) {
  switch (t) {
    case ModelType::heavy_ion: return "heavy_ion";
    case ModelType::damped_oscillator: return "damped_oscillator";
    case ModelType::quadratic_pump: return "quadratic_pump";
  }
  return "?";
}

ModelBundle build_model(const ModelSpec& spec, std::size_t n) {
  switch (spec.type) {
    case ModelType::heavy_ion: {
      HeavyIonParams p{spec.w, spec.alpha, spec.nu, spec.b1, n, spec.buffer, spec.mode};
      HeavyIonModel m = heavy_ion(p);
      return {std::move(m.model), std::move(m.c)};
    }
    case ModelType::damped_oscillator:
      return damped_oscillator(spec.gamma, spec.omega, n, spec.mode, spec.buffer);
    case ModelType::quadratic_pump:
      return quadratic_pump(n, spec.mode, spec.buffer);
  }
  throw InputError("build_model: unknown model type");
}

json model_to_json(const ModelSpec& spec) {
  json j;
  j["type"] = to_string(spec.type);
  j["N"] = spec.n;
  j["buffer"] = spec.buffer;
  j["mode"] = to_string(spec.mode);
  switch (spec.type) {
    case ModelType::heavy_ion:
      j["w"] = spec.w;
      j["alpha"] = spec.alpha;
      j["nu"] = spec.nu;
      j["b1"] = spec.b1;
      break;
    case ModelType::damped_oscillator:
      j["gamma"] = spec.gamma;
      j["omega"] = spec.omega;
      break;
    case ModelType::quadratic_pump:
      break;
  }
  return j;
}

namespace {

std::size_t line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

// Parses one config; errors carry the line where the offending key appears.
class Reader {
 public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    std::size_t line = 1;
    if (!key.empty()) {
      const auto pos = text_.find("\"" + key + "\"");
      if (pos != std::string::npos) line = line_at(text_, pos);
    }
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  double number(const json& j, const std::string& key) const {
    if (!j.contains(key)) fail(key, "missing required field '" + key + "'");
    if (!j[key].is_number()) fail(key, "field '" + key + "' must be a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) fail(key, "field '" + key + "' must be finite");
    return v;
  }

  double number_or(const json& j, const std::string& key, double fallback) const {
    return j.contains(key) ? number(j, key) : fallback;
  }

  std::size_t count(const json& j, const std::string& key) const {
    if (!j.contains(key)) fail(key, "missing required field '" + key + "'");
    if (!j[key].is_number_unsigned()) fail(key, "field '" + key + "' must be a non-negative integer");
    return j[key].get<std::size_t>();
  }

  std::size_t count_or(const json& j, const std::string& key, std::size_t fallback) const {
    return j.contains(key) ? count(j, key) : fallback;
  }

  std::vector<double> numbers(const json& j, const std::string& key) const {
    if (!j.contains(key)) return {};
    if (!j[key].is_array()) fail(key, "field '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j[key]) {
      if (!v.is_number()) fail(key, "field '" + key + "' must be an array of numbers");
      out.push_back(v.get<double>());
    }
    if (out.empty()) fail(key, "field '" + key + "' must not be empty");
    return out;
  }

  std::vector<std::size_t> counts(const json& j, const std::string& key) const {
    if (!j.contains(key)) return {};
    if (!j[key].is_array()) fail(key, "field '" + key + "' must be an array of integers");
    std::vector<std::size_t> out;
    for (const auto& v : j[key]) {
      if (!v.is_number_unsigned()) fail(key, "field '" + key + "' must be an array of non-negative integers");
      out.push_back(v.get<std::size_t>());
    }
    if (out.empty()) fail(key, "field '" + key + "' must not be empty");
    return out;
  }

  std::string string(const json& j, const std::string& key) const {
    if (!j.contains(key)) fail(key, "missing required field '" + key + "'");
    if (!j[key].is_string()) fail(key, "field '" + key + "' must be a string");
    return j[key].get<std::string>();
  }

  ModelSpec model(const json& j) const {
    if (!j.is_object()) fail("model", "field 'model' must be an object");
    ModelSpec m;
    const std::string type = string(j, "type");
    if (type == "heavy_ion") {
      m.type = ModelType::heavy_ion;
      const HeavyIonParams d;
      m.w = number_or(j, "w", d.w);
      m.alpha = number_or(j, "alpha", d.alpha);
      m.nu = number_or(j, "nu", d.nu);
      m.b1 = number_or(j, "b1", d.b1);
      m.mode = TruncationMode::absorbing;
    } else if (type == "damped_oscillator") {
      m.type = ModelType::damped_oscillator;
      m.gamma = number(j, "gamma");
      m.omega = number_or(j, "omega", 0.0);
      m.mode = TruncationMode::exact;
    } else if (type == "quadratic_pump") {
      m.type = ModelType::quadratic_pump;
      m.mode = TruncationMode::absorbing;
    } else {
      fail("type", "unknown model type '" + type + "'");
    }
    m.n = count_or(j, "N", 0);
    m.buffer = count_or(j, "buffer", 0);
    if (j.contains("mode")) {
      try {
        m.mode = truncation_mode_from_string(string(j, "mode"));
      } catch (const InputError&) {
        fail("mode", "field 'mode' must be \"exact\" or \"absorbing\"");
      }
    }
    return m;
  }

  VectorSpec vector(const json& j) const {
    VectorSpec v;
    if (j.is_number_unsigned()) {
      v.index = j.get<std::size_t>();
      return v;
    }
    if (j.is_string() && j.get<std::string>() == "random") {
      v.kind = VectorSpec::random;
      return v;
    }
    if (j.is_array() && !j.empty()) {
      v.kind = VectorSpec::explicit_vector;
      for (const auto& e : j) {
        if (e.is_number()) {
          v.values.emplace_back(e.get<double>(), 0.0);
        } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
          v.values.emplace_back(e[0].get<double>(), e[1].get<double>());
        } else {
          fail("u", "entries of 'u' must be numbers or [re, im] pairs");
        }
      }
      return v;
    }
    fail("u", "field 'u' must be a basis index, \"random\", or an array");
  }

 private:
  const std::string& text_;
  std::string source_;
};

void require_positive(const Reader& r, const std::vector<double>& xs, const std::string& key) {
  for (double x : xs)
    if (!(x > 0.0)) r.fail(key, "values of '" + key + "' must be positive");
}

}  // namespace

ModelSpec model_from_json(const json& j) {
  const std::string text = j.dump();
  return Reader(text, "<model>").model(j);
}

ComplexVector make_vector(const VectorSpec& spec, std::size_t n, std::uint64_t seed) {
  const auto dim = static_cast<Eigen::Index>(n);
  switch (spec.kind) {
    case VectorSpec::basis:
      return basis_vector(n, spec.index);
    case VectorSpec::explicit_vector: {
      if (spec.values.size() > n) throw InputError("u has more entries than the truncation size");
      ComplexVector u = ComplexVector::Zero(dim);
      for (std::size_t i = 0; i < spec.values.size(); ++i) u[static_cast<Eigen::Index>(i)] = spec.values[i];
      return u;
    }
    case VectorSpec::random: {
      // Unit vector supported on the lowest n/2 levels so it sits in the interior.
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> g;
      ComplexVector u = ComplexVector::Zero(dim);
      for (Eigen::Index i = 0; i < dim / 2; ++i) u[i] = Complex(g(rng), g(rng));
      return u / u.norm();
    }
  }
  throw InputError("make_vector: unknown kind");
}

ExperimentConfig parse_config(const std::string& text, const std::string& source, std::optional<Pipeline> pipeline) {
  Reader r(text, source);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) +
                      ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ":1: top level must be an object");

  ExperimentConfig c;
  c.source_path = source;
  c.raw_text = text;
  if (j.contains("pipeline")) {
    try {
      c.pipeline = pipeline_from_string(r.string(j, "pipeline"));
    } catch (const std::invalid_argument& e) {
      r.fail("pipeline", e.what());
    }
  }
  if (pipeline) {
    if (c.pipeline && *c.pipeline != *pipeline)
      r.fail("pipeline", std::string("config declares pipeline '") + to_string(*c.pipeline) + "' but '" +
                             to_string(*pipeline) + "' was requested");
    c.pipeline = pipeline;
  }
  if (!c.pipeline) r.fail("pipeline", "missing required field 'pipeline'");

  if (j.contains("model")) c.model = r.model(j["model"]);
  if (j.contains("lambda")) c.lambda = r.number(j, "lambda");
  c.x_weights = r.numbers(j, "x_weights");
  c.eps_grid = r.numbers(j, "eps_grid");
  c.n_ladder = r.counts(j, "N_ladder");
  c.t_grid = r.numbers(j, "t_grid");
  if (j.contains("u")) c.u = r.vector(j["u"]);
  c.theta = r.number_or(j, "theta", c.theta);
  c.seed = r.count_or(j, "seed", 0);
  c.delta = r.number_or(j, "delta", c.delta);
  c.cf_b = r.number_or(j, "cf_b", c.cf_b);
  c.resolvent_eps = r.number_or(j, "resolvent_eps", c.resolvent_eps);
  c.p_candidates = r.numbers(j, "p_candidates");
  c.k_max = r.count_or(j, "k_max", c.k_max);
  c.alpha = r.number_or(j, "alpha", c.alpha);
  if (j.contains("constants")) {
    const json& k = j["constants"];
    if (!k.is_object()) r.fail("constants", "field 'constants' must be an object");
    c.constants = Constants{r.number(k, "a"), r.number(k, "b"), r.number(k, "p"), r.number_or(k, "delta", 0.0)};
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (!g.is_object()) r.fail("grid", "field 'grid' must be an object");
    GridBasis grid{r.count(g, "points"), r.number(g, "half_length"), static_cast<int>(r.count_or(g, "dim", 1))};
    try {
      grid.validate();
    } catch (const InputError& e) {
      r.fail("grid", e.what());
    }
    c.grid = grid;
  }
  if (j.contains("weight")) {
    const json& w = j["weight"];
    if (!w.is_object()) r.fail("weight", "field 'weight' must be an object");
    c.weight.type = r.string(w, "type");
    if (c.weight.type != "lorentzian") r.fail("type", "unknown weight type '" + c.weight.type + "'");
    c.weight.scale = r.number_or(w, "scale", 1.0);
    c.weight.power = r.number_or(w, "power", 1.0);
  }
  if (j.contains("output")) c.out_dir = r.string(j, "output");

  // Cross-field validation per pipeline.
  if (c.model && c.n_ladder.empty() && c.model->n > 0) c.n_ladder = {c.model->n};
  require_positive(r, c.eps_grid, "eps_grid");
  for (double e : c.eps_grid)
    if (!(e < 1.0)) r.fail("eps_grid", "values of 'eps_grid' must lie in (0, 1)");
  for (double x : c.x_weights)
    if (!(x > 0.0 && x < 1.0)) r.fail("x_weights", "values of 'x_weights' must lie in (0, 1)");
  for (double t : c.t_grid)
    if (!(t >= 0.0)) r.fail("t_grid", "values of 't_grid' must be non-negative");
  if (!std::is_sorted(c.t_grid.begin(), c.t_grid.end())) r.fail("t_grid", "'t_grid' must be ascending");
  if (c.lambda && !(*c.lambda > 0.0)) r.fail("lambda", "field 'lambda' must be positive");
  if (!(c.theta > 0.0)) r.fail("theta", "field 'theta' must be positive");
  for (double p : c.p_candidates)
    if (!(p > 0.0 && p < 1.0)) r.fail("p_candidates", "values of 'p_candidates' must lie in (0, 1)");

  const Pipeline p = *c.pipeline;
  if (p != Pipeline::bound) {
    if (!c.model) r.fail("model", "missing required field 'model'");
    if (c.n_ladder.empty()) r.fail("N_ladder", "missing required field 'N_ladder'");
  }
  switch (p) {
    case Pipeline::check:
    case Pipeline::fit:
      if (c.eps_grid.empty()) r.fail("eps_grid", "missing required field 'eps_grid'");
      break;
    case Pipeline::simulate:
      if (!c.lambda) r.fail("lambda", "missing required field 'lambda'");
      if (c.t_grid.empty()) r.fail("t_grid", "missing required field 't_grid'");
      if (c.model->mode != TruncationMode::absorbing)
        r.fail("mode", "simulate needs an absorbing truncation (leakage is identically zero otherwise)");
      break;
    case Pipeline::verdict:
      if (!c.lambda) r.fail("lambda", "missing required field 'lambda'");
      if (c.n_ladder.size() < 3) r.fail("N_ladder", "'N_ladder' needs at least three sizes for a verdict");
      for (std::size_t i = 1; i < c.n_ladder.size(); ++i)
        if (c.n_ladder[i] <= c.n_ladder[i - 1]) r.fail("N_ladder", "'N_ladder' must be strictly ascending");
      if (c.model->mode != TruncationMode::absorbing) r.fail("mode", "verdict needs an absorbing truncation");
      break;
    case Pipeline::bound:
      if (!c.grid) r.fail("grid", "missing required field 'grid'");
      if (c.eps_grid.empty()) r.fail("eps_grid", "missing required field 'eps_grid'");
      break;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<Pipeline> pipeline) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ":0: cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, pipeline);
}

}  // namespace qds::cli
