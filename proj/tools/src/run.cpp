#include "qds/cli/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <thread>

#include "qds/bounds.hpp"
#include "qds/errors.hpp"
#include "qds/semigroup.hpp"

#include <CLI11.hpp>

#ifndef QDS_VERSION
#define QDS_VERSION "0.0.0"
#endif

namespace qds::cli {

using nlohmann::json;

namespace {

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_trace_rows(std::vector<std::string>& rows, std::size_t n, const DiagnosticTrace& tr) {
  for (std::size_t k = 0; k < tr.values.size(); ++k)
    rows.push_back(std::to_string(n) + "," + std::to_string(k) + "," + num(tr.values[k]) + "," +
                   num(tr.weighted_partial_sums[k]) + ",,");
}

json constants_json(const Constants& k) { return {{"a", k.a}, {"b", k.b}, {"p", k.p}, {"delta", k.delta}}; }

// Hermitian defect margins use "≤ slack passes"; the resolvent bound is
// recorded the same way with value = lhs − rhs.
CriterionCertificate resolvent_certificate(const LindbladModel& model, const ComplexMatrix& c, const Constants& k,
                                           const ComplexVector& u, double lambda,
                                           const std::vector<double>& x_weights, double eps) {
  CriterionCertificate cert;
  cert.kind = CertificateKind::resolvent_bound;
  cert.n = model.dim();
  cert.buffer = model.basis().buffer;
  cert.constants = k;
  cert.eps_grid = {eps};
  cert.slack = certificate_slack(c);
  cert.model_hash = model_fingerprint(model);
  for (double x : x_weights) {
    const ResolventBoundResult r = check_resolvent_bound(model, c, k, u, lambda, x, eps);
    cert.margins.push_back({"x=" + num(x), eps, r.lhs - r.rhs});
  }
  cert.analytic_hypotheses = {"lambda = " + num(lambda)};
  cert.pass = std::all_of(cert.margins.begin(), cert.margins.end(),
                          [&](const Margin& m) { return m.value <= cert.slack; });
  return cert;
}

RunResult run_check(const ExperimentConfig& cfg, unsigned jobs, bool fit_only) {
  const auto& ladder = cfg.n_ladder;
  std::vector<json> cells(ladder.size());
  std::vector<std::string> hashes(ladder.size());
  const std::vector<double> p_cands = cfg.p_candidates.empty() ? default_p_candidates() : cfg.p_candidates;
  parallel_for(ladder.size(), jobs, [&](std::size_t i) {
    const std::size_t n = ladder[i];
    const ModelBundle mb = build_model(*cfg.model, n);
    hashes[i] = model_fingerprint(mb.model);
    json cell{{"N", n}, {"model_hash", hashes[i]}};
    if (fit_only) {
      const FitResult fit = fit_constants(mb.model, mb.c, cfg.eps_grid, p_cands);
      cell["constants"] = constants_json(fit.constants);
      cell["feasible"] = fit.feasible;
      cell["certificates"] = json::array({to_json(fit.certificate)});
      cells[i] = std::move(cell);
      return;
    }
    json certs = json::array();
    certs.push_back(to_json(check_cf(mb.model, mb.c, cfg.cf_b)));
    certs.push_back(to_json(check_phi_domination(mb.model, mb.c, cfg.delta)));
    Constants k;
    if (cfg.constants) {
      k = *cfg.constants;
    } else {
      k = fit_constants(mb.model, mb.c, cfg.eps_grid, p_cands).constants;
      cell["fitted"] = true;
    }
    certs.push_back(to_json(check_assumption_c(mb.model, mb.c, k, cfg.eps_grid)));
    if (!cfg.x_weights.empty()) {
      const double lambda = cfg.lambda ? *cfg.lambda : std::max(k.b, 1.0) + 1.0;
      const ComplexVector u = make_vector(cfg.u, n, cfg.seed);
      certs.push_back(to_json(resolvent_certificate(mb.model, mb.c, k, u, lambda, cfg.x_weights, cfg.resolvent_eps)));
    }
    cell["constants"] = constants_json(k);
    cell["certificates"] = std::move(certs);
    cells[i] = std::move(cell);
  });

  RunResult r;
  r.model_hashes = hashes;
  r.certificate = {{"pipeline", fit_only ? "fit" : "check"}, {"model", model_to_json(*cfg.model)},
                   {"eps_grid", cfg.eps_grid}, {"cells", cells}};
  if (fit_only && ladder.size() > 1) {
    // Largest relative change of each constant across the ladder.
    json spread;
    for (const char* key : {"a", "b", "p"}) {
      double lo = 1e300, hi = -1e300;
      for (const auto& c : cells) {
        const double v = c["constants"][key].get<double>();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      spread[key] = hi > lo ? (hi - lo) / std::max(std::abs(hi), std::abs(lo)) : 0.0;
    }
    r.certificate["relative_spread"] = spread;
  }
  bool all = true;
  for (const auto& c : cells)
    for (const auto& cert : c["certificates"]) all = all && cert["verdict"] == "pass";
  r.certificate["verdict"] = all ? "pass" : "fail";
  return r;
}

RunResult run_simulate(const ExperimentConfig& cfg, unsigned jobs) {
  const auto& ladder = cfg.n_ladder;
  std::vector<json> cells(ladder.size());
  std::vector<std::vector<std::string>> rows(ladder.size());
  std::vector<std::string> hashes(ladder.size());
  parallel_for(ladder.size(), jobs, [&](std::size_t i) {
    const std::size_t n = ladder[i];
    const ModelBundle mb = build_model(*cfg.model, n);
    hashes[i] = model_fingerprint(mb.model);
    ComplexVector u = make_vector(cfg.u, n, cfg.seed);
    u /= u.norm();
    const std::vector<double> leak = leakage_curve(mb.model, u, cfg.t_grid);
    const DiagnosticTrace tr = ResolventMaps(mb.model).trace(*cfg.lambda, u, cfg.k_max);
    append_trace_rows(rows[i], n, tr);
    for (std::size_t j = 0; j < leak.size(); ++j)
      rows[i].push_back(std::to_string(n) + ",,,," + num(cfg.t_grid[j]) + "," + num(leak[j]));
    cells[i] = {{"N", n},
                {"model_hash", hashes[i]},
                {"leakage", leak},
                {"trace_length", tr.values.size()},
                {"weighted_sum", tr.weighted_partial_sums.back()},
                {"monotonicity_violation", monotonicity_violation(tr)}};
  });
  RunResult r;
  r.model_hashes = hashes;
  r.certificate = {{"pipeline", "simulate"}, {"model", model_to_json(*cfg.model)}, {"lambda", *cfg.lambda},
                   {"t_grid", cfg.t_grid}, {"cells", cells}};
  for (auto& rs : rows) r.csv_rows.insert(r.csv_rows.end(), rs.begin(), rs.end());
  return r;
}

RunResult run_verdict(const ExperimentConfig& cfg, unsigned jobs) {
  VerdictOptions opt;
  opt.theta = cfg.theta;
  opt.k_max = cfg.k_max;
  opt.jobs = jobs;
  const ModelSpec spec = *cfg.model;
  const VectorSpec uspec = cfg.u;
  const std::uint64_t seed = cfg.seed;
  const VerdictReport rep = verdict([&spec](std::size_t n) { return build_model(spec, n).model; }, cfg.n_ladder,
                                    *cfg.lambda, [&](std::size_t n) { return make_vector(uspec, n, seed); }, opt);
  RunResult r;
  std::vector<double> violations;
  for (std::size_t i = 0; i < rep.n_ladder.size(); ++i) {
    append_trace_rows(r.csv_rows, rep.n_ladder[i], rep.traces[i]);
    violations.push_back(monotonicity_violation(rep.traces[i]));
    r.model_hashes.push_back(model_fingerprint(build_model(spec, rep.n_ladder[i]).model));
  }
  r.certificate = {{"pipeline", "verdict"},
                   {"model", model_to_json(spec)},
                   {"lambda", rep.lambda},
                   {"theta", rep.theta},
                   {"N_ladder", rep.n_ladder},
                   {"deficiency", rep.deficiency},
                   {"weighted_series", rep.weighted_series},
                   {"weighted_converged", rep.weighted_converged},
                   {"trace_monotonicity_violation", violations},
                   {"model_hashes", r.model_hashes},
                   {"monotone", rep.monotone},
                   {"extrapolated",
                    {{"value", rep.extrapolated.value},
                     {"uncertainty", rep.extrapolated.uncertainty},
                     {"rate", rep.extrapolated.rate},
                     {"method", rep.extrapolated.method}}},
                   {"verdict", to_string(rep.verdict)}};
  return r;
}

RunResult run_bound(const ExperimentConfig& cfg, unsigned jobs) {
  const GridBasis grid = *cfg.grid;
  const WeightSpec w = cfg.weight;
  const RealVector samples = sample_on_grid(
      grid, [&w](const RealVector& x) { return w.scale * std::pow(1.0 + x.squaredNorm(), -w.power); });
  const Lemma41Constants k = lemma41_constants(samples, grid, cfg.alpha);
  const double a = cfg.constants ? cfg.constants->a : k.a;
  const double p = cfg.constants ? cfg.constants->p : k.p;

  std::vector<RelativeBoundCertificate> parts(cfg.eps_grid.size());
  parallel_for(cfg.eps_grid.size(), jobs,
               [&](std::size_t i) { parts[i] = verify_relative_bound(samples, grid, {cfg.eps_grid[i]}, a, p); });
  std::vector<double> margins;
  double slack = 0.0;
  bool pass = true;
  for (const auto& c : parts) {
    margins.push_back(c.margins[0]);
    slack = std::max(slack, c.slack);
    pass = pass && c.pass;
  }
  RunResult r;
  r.certificate = {{"pipeline", "bound"},
                   {"kind", to_string(CertificateKind::relative_bound)},
                   {"n", k.n},
                   {"alpha", k.alpha},
                   {"p", p},
                   {"a", a},
                   {"eps_grid", cfg.eps_grid},
                   {"margins", margins},
                   {"slack", slack},
                   {"grid", {{"points", grid.points}, {"half_length", grid.half_length}, {"dim", grid.dim}}},
                   {"weight", {{"type", w.type}, {"scale", w.scale}, {"power", w.power}}},
                   {"chain",
                    {{"w_norm_sq", k.w_norm_sq},
                     {"c_fourier", k.c_fourier},
                     {"c1", k.c1},
                     {"c2", k.c2},
                     {"r_min", k.r_min},
                     {"k_max", k.k_max}}},
                   {"verdict", pass ? "pass" : "fail"}};
  return r;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

json to_json(const CriterionCertificate& cert) {
  json margins = json::array();
  for (const auto& m : cert.margins) margins.push_back({{"label", m.label}, {"eps", m.eps}, {"value", m.value}});
  return {{"kind", to_string(cert.kind)},
          {"N", cert.n},
          {"buffer", cert.buffer},
          {"constants", constants_json(cert.constants)},
          {"eps_grid", cert.eps_grid},
          {"margins", margins},
          {"slack", cert.slack},
          {"verdict", cert.pass ? "pass" : "fail"},
          {"analytic_hypotheses", cert.analytic_hypotheses},
          {"model_hash", cert.model_hash}};
}

RunResult run_pipeline(const ExperimentConfig& config, unsigned jobs) {
  switch (*config.pipeline) {
    case Pipeline::check: return run_check(config, jobs, false);
    case Pipeline::fit: return run_check(config, jobs, true);
    case Pipeline::simulate: return run_simulate(config, jobs);
    case Pipeline::verdict: return run_verdict(config, jobs);
    case Pipeline::bound: return run_bound(config, jobs);
  }
  throw InputError("run_pipeline: unknown pipeline");
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_artifacts(const std::string& dir, const ExperimentConfig& config, const RunResult& result, unsigned jobs,
                     double wall_seconds) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path base(dir);
  {
    std::ofstream out(base / "certificate.json");
    out << result.certificate.dump(2) << "\n";
  }
  {
    std::ofstream out(base / "trace.csv");
    out << kCsvHeader << "\n";
    for (const auto& row : result.csv_rows) out << row << "\n";
  }
  const json manifest{{"tool", "qds"},
                      {"version", QDS_VERSION},
                      {"pipeline", to_string(*config.pipeline)},
                      {"config_path", config.source_path},
                      {"config_hash", config_hash(config.raw_text)},
                      {"seed", config.seed},
                      {"jobs", jobs},
                      {"model_hashes", result.model_hashes},
                      {"artifacts", {"certificate.json", "trace.csv"}},
                      {"started_utc", utc_now()},
                      {"wall_clock_seconds", wall_seconds}};
  std::ofstream out(base / "manifest.json");
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write artifacts to " + dir);
}

namespace {

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError(p.string() + ":0: missing artifact");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(p.string() + ":0: malformed artifact: " + e.what());
  }
}

std::string cell_text(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void summarize_one(const std::string& name, const json& cert, std::ostream& out) {
  const std::string pipeline = cert.value("pipeline", "?");
  out << "run " << name << " [" << pipeline << "] verdict " << cert.value("verdict", "?") << "\n";
  if (pipeline == "verdict") {
    out << "  N        deficiency          monotone-violation\n";
    const auto& ns = cert["N_ladder"];
    for (std::size_t i = 0; i < ns.size(); ++i)
      out << "  " << std::left << std::setw(8) << ns[i].get<std::size_t>() << " "
          << std::setw(19) << cell_text("%.12g", cert["deficiency"][i].get<double>()) << " "
          << cell_text("%.3e", cert["trace_monotonicity_violation"][i].get<double>()) << "\n";
    const auto& ex = cert["extrapolated"];
    out << "  extrapolated " << cell_text("%.12g", ex["value"].get<double>()) << " +- "
        << cell_text("%.3e", ex["uncertainty"].get<double>()) << " (" << ex["method"].get<std::string>() << ")"
        << "  monotone " << (cert["monotone"].get<bool>() ? "yes" : "no") << "\n";
  } else if (pipeline == "check" || pipeline == "fit") {
    std::vector<std::string> kinds;
    for (const auto& c : cert["cells"])
      for (const auto& k : c["certificates"])
        if (std::find(kinds.begin(), kinds.end(), k["kind"]) == kinds.end()) kinds.push_back(k["kind"]);
    out << "  " << std::left << std::setw(8) << "N";
    for (const auto& k : kinds) out << " " << std::setw(20) << k;
    out << "\n";
    for (const auto& c : cert["cells"]) {
      out << "  " << std::setw(8) << c["N"].get<std::size_t>();
      for (const auto& k : kinds) {
        std::string v = "-";
        for (const auto& x : c["certificates"])
          if (x["kind"] == k) v = x["verdict"].get<std::string>();
        out << " " << std::setw(20) << v;
      }
      out << "\n";
    }
  } else if (pipeline == "simulate") {
    for (const auto& c : cert["cells"])
      out << "  N=" << c["N"].get<std::size_t>() << " final leakage "
          << cell_text("%.6g", c["leakage"].back().get<double>()) << " monotone-violation "
          << cell_text("%.3e", c["monotonicity_violation"].get<double>()) << "\n";
  } else if (pipeline == "bound") {
    out << "  a=" << cell_text("%.6g", cert["a"].get<double>()) << " p=" << cell_text("%.6g", cert["p"].get<double>())
        << "\n";
    for (std::size_t i = 0; i < cert["eps_grid"].size(); ++i)
      out << "  eps=" << cell_text("%.3e", cert["eps_grid"][i].get<double>())
          << " margin " << cell_text("%.3e", cert["margins"][i].get<double>()) << "\n";
  }
  out << std::right;
}

}  // namespace

int report_summary(const std::string& dir, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::vector<fs::path> runs;
  std::error_code ec;
  if (fs::exists(fs::path(dir) / "certificate.json")) {
    runs.push_back(dir);
  } else if (fs::is_directory(dir, ec)) {
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_directory() && fs::exists(e.path() / "certificate.json")) runs.push_back(e.path());
    std::sort(runs.begin(), runs.end());
  }
  if (runs.empty()) {
    err << "qds summary: no run artifacts (certificate.json) under " << dir << "\n";
    return kExitConfig;
  }
  try {
    for (const auto& r : runs) {
      const json manifest = read_json(r / "manifest.json");
      summarize_one(r.filename().string() + " (config " + manifest.value("config_hash", "?") + ")",
                    read_json(r / "certificate.json"), out);
    }
  } catch (const std::exception& e) {
    err << "qds summary: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Conservativity diagnostics for truncated quantum dynamical semigroups", "qds"};
  app.set_version_flag("--version", QDS_VERSION);
  app.require_subcommand(1);

  std::string config_path, out_dir, summary_dir;
  unsigned jobs = 1;
  for (const char* name : {"check", "simulate", "bound", "fit", "verdict"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " pipeline");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "artifact directory (default: config 'output' or .)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }
  CLI::App* summary = app.add_subcommand("summary", "summarize artifact directories");
  summary->add_option("dir", summary_dir, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (summary->parsed()) return report_summary(summary_dir, std::cout, std::cerr);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig cfg = load_config(config_path, pipeline_from_string(name));
    const std::string dir = !out_dir.empty() ? out_dir : cfg.out_dir.value_or(".");
    const auto start = std::chrono::steady_clock::now();
    const RunResult result = run_pipeline(cfg, jobs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_artifacts(dir, cfg, result, jobs, wall);
    std::cout << name << ": " << result.certificate.value("verdict", "done") << " (" << dir << ")\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "qds " << name << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "qds " << name << ": numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "qds " << name << ": config rejected: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "qds " << name << ": " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace qds::cli
