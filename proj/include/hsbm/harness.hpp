#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hsbm/error.hpp"
#include "hsbm/model.hpp"
#include "hsbm/oracle.hpp"
#include "hsbm/random.hpp"
#include "hsbm/sdp.hpp"
#include "hsbm/similarity.hpp"
#include "hsbm/spectral.hpp"
#include "hsbm/stats.hpp"
#include "hsbm/thresholds.hpp"
#include "hsbm/version.hpp"

namespace hsbm {

/// Worker count: HSBM_THREADS if set, else the hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("HSBM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on a shared counter; callers store results by index.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

enum class Method { spectral, sdp, oracle };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::spectral: return "spectral";
    case Method::sdp: return "sdp";
    case Method::oracle: return "oracle";
  }
  return "";
}

inline Method parse_method(const std::string& s) {
  if (s == "spectral") return Method::spectral;
  if (s == "sdp") return Method::sdp;
  if (s == "oracle") return Method::oracle;
  throw ParameterError("unknown method '" + s + "'");
}

struct RatePair {
  double alpha = 0.0;
  double beta = 0.0;
};

struct ExperimentConfig {
  std::size_t d = 3;
  std::vector<std::size_t> n_grid;
  /// Resolved (alpha, beta) pairs; crossed with n_grid.
  std::vector<RatePair> pairs;
  std::size_t trials = 1;
  std::vector<Method> methods{Method::spectral};
  std::uint64_t seed = 0;
  std::string output = "results.csv";
  bool diagnostics = true;
  AdmmConfig admm;

  bool has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

  void validate() const {
    detail::require(trials >= 1, "trials must be at least 1");
    detail::require(!n_grid.empty(), "n grid must be nonempty");
    detail::require(!pairs.empty(), "at least one (alpha, beta) cell is required");
    detail::require(!methods.empty(), "at least one method is required");
    for (auto n : n_grid)
      for (const auto& p : pairs) HsbmParams{d, n, p.alpha, p.beta, 0}.validate();
  }

  /// Schema: d, n (int or list), trials, methods, seed, output, diagnostics, and cells given by
  /// "cells": [{"alpha", "beta"} or {"beta", "I"}] and/or grids "alpha": [...], "beta": [...].
  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
      c.d = j.at("d").get<std::size_t>();
      const auto& n = j.at("n");
      if (n.is_array())
        c.n_grid = n.get<std::vector<std::size_t>>();
      else
        c.n_grid = {n.get<std::size_t>()};
      c.trials = j.value("trials", std::size_t{1});
      c.seed = j.value("seed", std::uint64_t{0});
      c.output = j.value("output", std::string("results.csv"));
      c.diagnostics = j.value("diagnostics", true);
      if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
      }
      if (j.contains("admm")) {
        const auto& a = j.at("admm");
        c.admm.rho = a.value("rho", c.admm.rho);
        c.admm.max_iterations = a.value("max_iterations", c.admm.max_iterations);
        c.admm.tolerance = a.value("tolerance", c.admm.tolerance);
        c.admm.anderson_memory = a.value("anderson_memory", c.admm.anderson_memory);
        c.admm.adaptive_rho = a.value("adaptive_rho", c.admm.adaptive_rho);
      }
      if (j.contains("cells")) {
        for (const auto& cell : j.at("cells")) {
          const double beta = cell.at("beta").get<double>();
          if (cell.contains("alpha")) {
            c.pairs.push_back({cell.at("alpha").get<double>(), beta});
          } else {
            const double target = cell.at("I").get<double>();
            const auto alpha = solve_alpha(c.d, beta, target, ThresholdKind::I);
            detail::require(alpha.has_value(), "no alpha reaches the requested I");
            c.pairs.push_back({*alpha, beta});
          }
        }
      }
      if (j.contains("alpha") || j.contains("beta")) {
        const auto alphas = j.at("alpha").get<std::vector<double>>();
        const auto betas = j.at("beta").get<std::vector<double>>();
        for (double a : alphas)
          for (double b : betas) c.pairs.push_back({a, b});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(std::string("invalid experiment config: ") + e.what());
    }
    c.validate();
    return c;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["d"] = d;
    j["n"] = n_grid;
    j["trials"] = trials;
    j["seed"] = seed;
    j["output"] = output;
    j["diagnostics"] = diagnostics;
    std::vector<std::string> names;
    for (auto m : methods) names.push_back(to_string(m));
    j["methods"] = names;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& p : pairs) cells.push_back({{"alpha", p.alpha}, {"beta", p.beta}});
    j["cells"] = cells;
    j["admm"] = {{"rho", admm.rho},
                 {"max_iterations", admm.max_iterations},
                 {"tolerance", admm.tolerance},
                 {"anderson_memory", admm.anderson_memory},
                 {"adaptive_rho", admm.adaptive_rho}};
    return j;
  }
};

struct Cell {
  std::size_t id = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double I = 0.0;
  double I_sdp = 0.0;
};

inline std::vector<Cell> expand_cells(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (auto n : config.n_grid)
    for (const auto& p : config.pairs) {
      Cell c;
      c.id = cells.size();
      c.n = n;
      c.d = config.d;
      c.alpha = p.alpha;
      c.beta = p.beta;
      const ThresholdQuery q{config.d, p.alpha, p.beta};
      c.I = threshold_I(q).value_I;
      c.I_sdp = p.alpha + p.beta > 0.0 ? threshold_I_sdp(q) : 0.0;
      cells.push_back(c);
    }
  return cells;
}

struct TrialRecord {
  std::size_t cell = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double alpha = 0.0;
  double beta = 0.0;
  double I = 0.0;
  double I_sdp = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;

  std::optional<bool> spectral_exact;
  std::optional<bool> sdp_exact;
  /// Whether sdp_recover returned a certified candidate.
  std::optional<bool> sdp_certified;
  std::optional<bool> oracle_exact;
  std::optional<bool> spectral_agrees_oracle;
  std::optional<bool> sdp_agrees_oracle;

  /// Certificate status of the planted assignment.
  std::optional<bool> sigma_certified;
  std::optional<double> min_dii_over_log_n;
  std::optional<double> deviation_over_sqrt_log_n;
  std::optional<double> err_direct;
  std::optional<double> err_first_order_vs_true;
  std::optional<double> err_residual;
  std::optional<double> sign_margin;

  /// Empty unless the trial threw.
  std::string error;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

struct TrialTiming {
  std::size_t cell = 0;
  std::size_t trial = 0;
  std::map<std::string, double> seconds;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

template <typename T>
T parse_unsigned(const std::string& s) {
  T v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw FormatError("bad integer '" + s + "'");
  return v;
}

inline std::string format_opt(const std::optional<bool>& b) { return b ? (*b ? "1" : "0") : ""; }
inline std::string format_opt(const std::optional<double>& x) { return x ? format_double(*x) : ""; }

inline std::optional<bool> parse_opt_bool(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "1") return true;
  if (s == "0") return false;
  throw FormatError("bad boolean '" + s + "'");
}

inline std::optional<double> parse_opt_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ' ';
  return s;
}

}  // namespace detail

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "cell", "n", "d", "alpha", "beta", "I", "I_sdp", "trial", "seed", "spectral_exact", "sdp_exact",
      "sdp_certified", "oracle_exact", "spectral_agrees_oracle", "sdp_agrees_oracle", "sigma_certified",
      "min_dii_over_log_n", "deviation_over_sqrt_log_n", "err_direct", "err_first_order_vs_true",
      "err_residual", "sign_margin", "error"};
  return cols;
}

inline void write_records(std::ostream& out, const std::vector<TrialRecord>& records) {
  const auto& cols = record_columns();
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  using detail::format_double;
  using detail::format_opt;
  for (const auto& r : records) {
    out << r.cell << ',' << r.n << ',' << r.d << ',' << format_double(r.alpha) << ',' << format_double(r.beta) << ','
        << format_double(r.I) << ',' << format_double(r.I_sdp) << ',' << r.trial << ',' << r.seed << ','
        << format_opt(r.spectral_exact) << ',' << format_opt(r.sdp_exact) << ',' << format_opt(r.sdp_certified) << ','
        << format_opt(r.oracle_exact) << ',' << format_opt(r.spectral_agrees_oracle) << ','
        << format_opt(r.sdp_agrees_oracle) << ',' << format_opt(r.sigma_certified) << ','
        << format_opt(r.min_dii_over_log_n) << ',' << format_opt(r.deviation_over_sqrt_log_n) << ','
        << format_opt(r.err_direct) << ',' << format_opt(r.err_first_order_vs_true) << ','
        << format_opt(r.err_residual) << ',' << format_opt(r.sign_margin) << ',' << detail::sanitize(r.error)
        << '\n';
  }
}

inline std::vector<TrialRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty result table");
  std::string header;
  for (std::size_t k = 0; k < record_columns().size(); ++k) header += (k ? "," : "") + record_columns()[k];
  if (line != header) throw FormatError("unexpected result table header");
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != record_columns().size()) throw FormatError("result row has wrong number of fields");
    using namespace detail;
    TrialRecord r;
    r.cell = parse_unsigned<std::size_t>(f[0]);
    r.n = parse_unsigned<std::size_t>(f[1]);
    r.d = parse_unsigned<std::size_t>(f[2]);
    r.alpha = parse_double(f[3]);
    r.beta = parse_double(f[4]);
    r.I = parse_double(f[5]);
    r.I_sdp = parse_double(f[6]);
    r.trial = parse_unsigned<std::size_t>(f[7]);
    r.seed = parse_unsigned<std::uint64_t>(f[8]);
    r.spectral_exact = parse_opt_bool(f[9]);
    r.sdp_exact = parse_opt_bool(f[10]);
    r.sdp_certified = parse_opt_bool(f[11]);
    r.oracle_exact = parse_opt_bool(f[12]);
    r.spectral_agrees_oracle = parse_opt_bool(f[13]);
    r.sdp_agrees_oracle = parse_opt_bool(f[14]);
    r.sigma_certified = parse_opt_bool(f[15]);
    r.min_dii_over_log_n = parse_opt_double(f[16]);
    r.deviation_over_sqrt_log_n = parse_opt_double(f[17]);
    r.err_direct = parse_opt_double(f[18]);
    r.err_first_order_vs_true = parse_opt_double(f[19]);
    r.err_residual = parse_opt_double(f[20]);
    r.sign_margin = parse_opt_double(f[21]);
    r.error = f[22];
    out.push_back(std::move(r));
  }
  return out;
}

inline std::uint64_t trial_seed(std::uint64_t base, std::size_t cell, std::size_t trial) {
  return derive_seed(base, {cell, trial});
}

/// One trial of one cell; failures become an error row.
inline TrialRecord run_trial(const Cell& cell, std::size_t trial, const ExperimentConfig& config,
                             TrialTiming* timing = nullptr) {
  TrialRecord r;
  r.cell = cell.id;
  r.n = cell.n;
  r.d = cell.d;
  r.alpha = cell.alpha;
  r.beta = cell.beta;
  r.I = cell.I;
  r.I_sdp = cell.I_sdp;
  r.trial = trial;
  r.seed = trial_seed(config.seed, cell.id, trial);
  if (timing) {
    timing->cell = cell.id;
    timing->trial = trial;
  }
  auto timed = [&](const char* name, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    body();
    if (timing)
      timing->seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    const auto sigma = sample_balanced_assignment(cell.n, derive_seed(r.seed, {0}));
    const HsbmParams params{cell.d, cell.n, cell.alpha, cell.beta, derive_seed(r.seed, {1})};
    const auto w = similarity(sample_hsbm(params, sigma));
    const Eigen::MatrixXd wd = w.to_dense();

    std::optional<CommunityAssignment> spectral, sdp, oracle;
    if (config.has(Method::spectral)) timed("spectral", [&] { spectral = spectral_recover(wd); });
    if (config.has(Method::sdp))
      timed("sdp", [&] {
        const auto rec = sdp_recover(w, config.admm);
        sdp = rec.assignment;
        r.sdp_certified = rec.certified;
      });
    if (config.has(Method::oracle) && cell.n <= kOracleMaxVertices)
      timed("oracle", [&] { oracle = exhaustive_min_bisection(w).best; });

    if (spectral) r.spectral_exact = spectral->equal_up_to_flip(sigma);
    if (sdp) r.sdp_exact = sdp->equal_up_to_flip(sigma);
    if (oracle) {
      r.oracle_exact = oracle->equal_up_to_flip(sigma);
      if (spectral) r.spectral_agrees_oracle = spectral->equal_up_to_flip(*oracle);
      if (sdp) r.sdp_agrees_oracle = sdp->equal_up_to_flip(*oracle);
    }

    if (config.diagnostics) {
      timed("diagnostics", [&] {
        const double log_n = std::log(static_cast<double>(cell.n));
        const auto cert = certify(w, sigma);
        r.sigma_certified = cert.certified;
        r.min_dii_over_log_n = cert.min_diag_D / log_n;
        const auto es = expected_similarity(params, sigma);
        if (expected_eigenstructure(es).lambda2 != 0.0) {
          const auto rep = entrywise_report(wd, es);
          r.deviation_over_sqrt_log_n = rep.deviation_norm / std::sqrt(log_n);
          r.err_direct = rep.err_direct;
          r.err_first_order_vs_true = rep.err_first_order_vs_true;
          r.err_residual = rep.err_residual;
          r.sign_margin = rep.sign_margin;
        } else {
          r.deviation_over_sqrt_log_n = spectral_norm(wd - es.materialize()) / std::sqrt(log_n);
        }
      });
    }
  } catch (const std::exception& e) {
    r.error = e.what();
    if (r.error.empty()) r.error = "unknown error";
  }
  return r;
}

struct MethodSummary {
  std::size_t successes = 0;
  std::size_t trials = 0;
  Interval wilson;

  double rate() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
};

struct CellSummary {
  Cell cell;
  std::size_t errors = 0;
  std::map<std::string, MethodSummary> methods;
};

inline std::vector<CellSummary> summarize(const std::vector<Cell>& cells, const std::vector<TrialRecord>& records) {
  std::vector<CellSummary> out;
  for (const auto& c : cells) {
    CellSummary s;
    s.cell = c;
    auto add = [&](const std::string& name, const std::optional<bool>& flag) {
      if (!flag) return;
      auto& m = s.methods[name];
      ++m.trials;
      m.successes += *flag;
    };
    for (const auto& r : records) {
      if (r.cell != c.id) continue;
      if (!r.error.empty()) ++s.errors;
      add("spectral", r.spectral_exact);
      add("sdp", r.sdp_exact);
      add("oracle", r.oracle_exact);
      add("sigma_certified", r.sigma_certified);
    }
    for (auto& [name, m] : s.methods) m.wilson = wilson_interval(m.successes, m.trials);
    out.push_back(std::move(s));
  }
  return out;
}

struct ExperimentResult {
  std::vector<Cell> cells;
  std::vector<TrialRecord> records;
  std::vector<TrialTiming> timings;
  std::vector<CellSummary> summaries;
  /// Cells reused from an earlier run of the same config.
  std::size_t cells_resumed = 0;
};

namespace detail {

inline void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline bool record_matches(const TrialRecord& r, const Cell& c, std::size_t trial, std::uint64_t seed) {
  return r.cell == c.id && r.n == c.n && r.d == c.d && r.alpha == c.alpha && r.beta == c.beta && r.trial == trial &&
         r.seed == seed;
}

}  // namespace detail

inline nlohmann::json sidecar_json(const ExperimentConfig& config, const std::vector<CellSummary>& summaries) {
  nlohmann::json j;
  j["library"] = "hsbm";
  j["version"] = kVersion;
  j["config"] = config.to_json();
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& s : summaries) {
    nlohmann::json c{{"cell", s.cell.id}, {"n", s.cell.n},         {"d", s.cell.d},
                     {"alpha", s.cell.alpha}, {"beta", s.cell.beta}, {"I", s.cell.I},
                     {"I_sdp", s.cell.I_sdp}, {"errors", s.errors}};
    for (const auto& [name, m] : s.methods)
      c["rates"][name] = {{"successes", m.successes},
                          {"trials", m.trials},
                          {"rate", m.rate()},
                          {"wilson95", {m.wilson.lower, m.wilson.upper}}};
    cells.push_back(c);
  }
  j["cells"] = cells;
  return j;
}

/// Runs every (cell, trial); writes <output>, <output>.json and <output>.timing.csv. Completed
/// cells found in an existing <output> are reused, so interrupted sweeps resume.
inline ExperimentResult run_experiment(const ExperimentConfig& config, bool persist = true) {
  config.validate();
  ExperimentResult result;
  result.cells = expand_cells(config);
  const std::filesystem::path out_path(config.output);

  std::map<std::size_t, std::vector<TrialRecord>> previous;
  if (persist && std::filesystem::exists(out_path)) {
    std::ifstream in(out_path);
    try {
      for (auto& r : read_records(in)) previous[r.cell].push_back(std::move(r));
    } catch (const FormatError&) {
      previous.clear();
    }
  }

  std::vector<std::vector<TrialRecord>> by_cell(result.cells.size());
  auto flush = [&] {
    if (!persist) return;
    std::vector<TrialRecord> all;
    for (const auto& v : by_cell) all.insert(all.end(), v.begin(), v.end());
    detail::write_atomically(out_path, [&](std::ostream& o) { write_records(o, all); });
  };

  for (const auto& cell : result.cells) {
    auto it = previous.find(cell.id);
    if (it != previous.end() && it->second.size() == config.trials) {
      bool ok = true;
      for (std::size_t t = 0; t < config.trials && ok; ++t)
        ok = detail::record_matches(it->second[t], cell, t, trial_seed(config.seed, cell.id, t));
      if (ok) {
        by_cell[cell.id] = it->second;
        ++result.cells_resumed;
        continue;
      }
    }
    std::vector<TrialRecord> rows(config.trials);
    std::vector<TrialTiming> times(config.trials);
    parallel_for(config.trials, [&](std::size_t t) { rows[t] = run_trial(cell, t, config, &times[t]); });
    by_cell[cell.id] = std::move(rows);
    result.timings.insert(result.timings.end(), times.begin(), times.end());
    flush();
  }

  for (const auto& v : by_cell) result.records.insert(result.records.end(), v.begin(), v.end());
  result.summaries = summarize(result.cells, result.records);
  if (persist) {
    flush();
    detail::write_atomically(out_path.string() + ".json",
                             [&](std::ostream& o) { o << sidecar_json(config, result.summaries).dump(2) << '\n'; });
    detail::write_atomically(out_path.string() + ".timing.csv", [&](std::ostream& o) {
      o << "cell,trial,method,seconds\n";
      for (const auto& t : result.timings)
        for (const auto& [name, s] : t.seconds)
          o << t.cell << ',' << t.trial << ',' << name << ',' << detail::format_double(s) << '\n';
    });
  }
  return result;
}

struct DiiSummary {
  std::size_t n = 0;
  /// min_i D_ii / log n, one per trial.
  std::vector<double> samples;
  double q05 = 0.0;
  double median = 0.0;
  double fraction_nonpositive = 0.0;
};

/// Distribution of min_i D_ii / log n for the planted assignment across n.
inline std::vector<DiiSummary> dii_concentration_sweep(std::size_t d, double alpha, double beta,
                                                       const std::vector<std::size_t>& n_grid, std::size_t trials,
                                                       std::uint64_t seed) {
  detail::require(trials >= 1, "trials must be at least 1");
  std::vector<DiiSummary> out;
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    const std::size_t n = n_grid[k];
    DiiSummary s;
    s.n = n;
    s.samples.resize(trials);
    parallel_for(trials, [&](std::size_t t) {
      const auto ts = derive_seed(seed, {n, t});
      const auto sigma = sample_balanced_assignment(n, derive_seed(ts, {0}));
      const auto w = similarity(sample_hsbm({d, n, alpha, beta, derive_seed(ts, {1})}, sigma));
      const auto diag = certificate_diagonal(w, sigma);
      s.samples[t] = static_cast<double>(*std::min_element(diag.begin(), diag.end())) / std::log(static_cast<double>(n));
    });
    s.q05 = quantile(s.samples, 0.05);
    s.median = median(s.samples);
    s.fraction_nonpositive =
        static_cast<double>(std::count_if(s.samples.begin(), s.samples.end(), [](double x) { return x <= 0.0; })) /
        static_cast<double>(trials);
    out.push_back(std::move(s));
  }
  return out;
}

/// D_vv for one fixed vertex of a fixed balanced assignment, over independent HSBM draws.
inline std::vector<double> dii_vertex_samples(const HsbmParams& params, std::size_t vertex, std::size_t samples) {
  params.validate();
  detail::require(vertex < params.n, "vertex out of range");
  const auto sigma = block_assignment(params.n);
  std::vector<double> out(samples);
  parallel_for(samples, [&](std::size_t t) {
    HsbmParams p = params;
    p.seed = derive_seed(params.seed, {t});
    const auto g = sample_hsbm(p, sigma);
    std::int64_t dv = 0;
    for (std::size_t k = 0; k < g.num_edges(); ++k) {
      const auto e = g.edge(k);
      if (std::find(e.begin(), e.end(), static_cast<Vertex>(vertex)) == e.end()) continue;
      for (auto u : e)
        if (u != vertex) dv += sigma[u] * sigma[vertex];
    }
    out[t] = static_cast<double>(dv);
  });
  return out;
}

/// Draws of sum_r (d - 1 - 2r) Y_r with Y_r ~ Binomial(N_r, q_r): q_0 homogeneous, q_r heterogeneous otherwise.
inline std::vector<double> dii_surrogate_samples(const HsbmParams& params, std::size_t samples) {
  params.validate();
  auto rng = make_rng(params.seed);
  std::vector<double> out(samples);
  const std::size_t d = params.d;
  for (auto& x : out) {
    double s = 0.0;
    for (std::size_t r = 0; r + 1 <= d; ++r) {
      const double q = r == 0 ? params.q_homogeneous() : params.q_heterogeneous();
      const auto y = detail::binomial_draw(class_count_N_r(d, params.n, r), q, rng);
      s += (static_cast<double>(d) - 1.0 - 2.0 * static_cast<double>(r)) * static_cast<double>(y);
    }
    x = s;
  }
  return out;
}

struct SpectralNormSummary {
  std::size_t n = 0;
  /// ||W - W*||_2 / sqrt(log n), one per trial.
  std::vector<double> samples;
  double mean = 0.0;
  double max = 0.0;
};

namespace detail {

inline SpectralNormSummary summarize_norms(std::size_t n, std::vector<double> samples) {
  SpectralNormSummary s;
  s.n = n;
  s.mean = hsbm::mean(samples);
  s.max = *std::max_element(samples.begin(), samples.end());
  s.samples = std::move(samples);
  return s;
}

}  // namespace detail

/// Normalized deviation ||W - E[W | sigma]||_2 / sqrt(log n) for HSBM across n.
inline std::vector<SpectralNormSummary> spectral_norm_sweep(std::size_t d, double alpha, double beta,
                                                            const std::vector<std::size_t>& n_grid,
                                                            std::size_t trials, std::uint64_t seed) {
  detail::require(trials >= 1, "trials must be at least 1");
  std::vector<SpectralNormSummary> out;
  for (auto n : n_grid) {
    std::vector<double> v(trials);
    parallel_for(trials, [&](std::size_t t) {
      const auto ts = derive_seed(seed, {n, t});
      const auto sigma = sample_balanced_assignment(n, derive_seed(ts, {0}));
      const HsbmParams p{d, n, alpha, beta, derive_seed(ts, {1})};
      const Eigen::MatrixXd dev = similarity(sample_hsbm(p, sigma)).to_dense() - expected_similarity(p, sigma).materialize();
      v[t] = spectral_norm(dev) / std::sqrt(std::log(static_cast<double>(n)));
    });
    out.push_back(detail::summarize_norms(n, std::move(v)));
  }
  return out;
}

/// Same statistic for the constant-rate model p_e = c0 log n / C(n-1, d-1).
inline std::vector<SpectralNormSummary> spectral_norm_sweep_constant(std::size_t d, double c0,
                                                                     const std::vector<std::size_t>& n_grid,
                                                                     std::size_t trials, std::uint64_t seed) {
  detail::require(trials >= 1, "trials must be at least 1");
  detail::require(c0 >= 0.0, "c0 must be nonnegative");
  std::vector<SpectralNormSummary> out;
  for (auto n : n_grid) {
    const double log_n = std::log(static_cast<double>(n));
    const double p = c0 * log_n / binomial_real(n - 1, d - 1);
    const auto params = GeneralHypergraphParams::constant(d, n, p);
    const Eigen::MatrixXd mean = mean_similarity_constant(d, n, p);
    std::vector<double> v(trials);
    parallel_for(trials, [&](std::size_t t) {
      const auto g = sample_general(params, derive_seed(seed, {n, t}));
      v[t] = spectral_norm(similarity(g).to_dense() - mean) / std::sqrt(log_n);
    });
    out.push_back(detail::summarize_norms(n, std::move(v)));
  }
  return out;
}

/// Slope of mean statistic against log n.
inline double spectral_norm_slope(const std::vector<SpectralNormSummary>& sweep) {
  std::vector<double> x, y;
  for (const auto& s : sweep) {
    x.push_back(std::log(static_cast<double>(s.n)));
    y.push_back(s.mean);
  }
  return linear_fit(x, y).slope;
}

struct PhaseRow {
  double beta = 0.0;
  std::optional<double> alpha_I;
  std::optional<double> alpha_I_sdp;
};

/// Boundary curves I = 1 and I_SDP = 1 over an evenly spaced beta grid.
inline std::vector<PhaseRow> phase_diagram(std::size_t d, double beta_min, double beta_max, std::size_t steps,
                                           bool with_I = true, bool with_I_sdp = true) {
  detail::require(steps >= 1, "steps must be at least 1");
  detail::require(beta_min >= 0.0 && beta_max >= beta_min, "beta range must satisfy 0 <= min <= max");
  std::vector<PhaseRow> rows;
  for (std::size_t k = 0; k < steps; ++k) {
    PhaseRow row;
    row.beta = steps == 1 ? beta_min : beta_min + (beta_max - beta_min) * static_cast<double>(k) / (steps - 1);
    if (with_I) row.alpha_I = phase_boundary(d, row.beta, ThresholdKind::I);
    if (with_I_sdp) row.alpha_I_sdp = phase_boundary(d, row.beta, ThresholdKind::I_sdp);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hsbm
