#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>

#include "hsbm/hsbm.hpp"

namespace {

using nlohmann::json;

// Writes to --out when given, else to stdout.
template <typename Body>
void emit(const std::string& out_path, Body&& body) {
  if (out_path.empty()) {
    body(std::cout);
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  body(out);
}

json optional_number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

json certificate_json(const hsbm::CertificateReport& r) {
  std::ostringstream sigma;
  hsbm::write_assignment(sigma, r.candidate);
  std::string s = sigma.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return {{"candidate", s},
          {"certified", r.certified},
          {"lambda_min", r.lambda_min},
          {"lambda_second_smallest", r.lambda_second_smallest},
          {"S_sigma_residual", r.S_sigma_residual},
          {"min_diag_D", r.min_diag_D},
          {"scale", r.scale},
          {"tolerance", r.tolerance},
          {"failure_reason", r.failure_reason},
          {"hypotheses", r.hypotheses}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact community recovery in hypergraph stochastic block models via similarity matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hsbm::kVersion));

  // sample
  std::size_t d = 3, n = 100;
  double alpha = 10.0, beta = 1.0;
  std::uint64_t seed = 0;
  std::string out, assignment_out, matrix_out;
  auto* sample = app.add_subcommand("sample", "Sample an HSBM hypergraph");
  sample->add_option("--d", d, "Uniformity")->required();
  sample->add_option("--n", n, "Vertex count (even)")->required();
  sample->add_option("--alpha", alpha, "Homogeneous rate")->required();
  sample->add_option("--beta", beta, "Heterogeneous rate")->required();
  sample->add_option("--seed", seed, "RNG seed");
  sample->add_option("--out", out, "Hypergraph output file (default stdout)");
  sample->add_option("--assignment-out", assignment_out, "Write the planted assignment here");
  sample->add_option("--matrix-out", matrix_out, "Write the similarity matrix CSV here");

  // threshold
  auto* threshold = app.add_subcommand("threshold", "Evaluate I, t* and I_SDP");
  threshold->add_option("--d", d)->required();
  threshold->add_option("--alpha", alpha)->required();
  threshold->add_option("--beta", beta)->required();
  threshold->add_option("--out", out);

  // phase-diagram
  double beta_min = 0.0, beta_max = 5.0;
  std::size_t steps = 50;
  std::string which = "both";
  auto* phase = app.add_subcommand("phase-diagram", "Boundary curves I = 1 and I_SDP = 1 as CSV");
  phase->add_option("--d", d)->required();
  phase->add_option("--beta-min", beta_min);
  phase->add_option("--beta-max", beta_max);
  phase->add_option("--steps", steps);
  phase->add_option("--which", which)->check(CLI::IsMember({"I", "ISDP", "both"}));
  phase->add_option("--out", out);

  // recover
  std::string input, method = "spectral";
  auto* recover = app.add_subcommand("recover", "Recover communities from a similarity matrix CSV");
  recover->add_option("--input", input, "Similarity matrix CSV")->required()->check(CLI::ExistingFile);
  recover->add_option("--method", method)->check(CLI::IsMember({"spectral", "sdp"}));
  recover->add_option("--out", out);

  // certify
  std::string assignment_in;
  auto* certify = app.add_subcommand("certify", "Check the dual certificate of an assignment");
  certify->add_option("--input", input, "Similarity matrix CSV")->required()->check(CLI::ExistingFile);
  certify->add_option("--assignment", assignment_in, "Assignment file")->required()->check(CLI::ExistingFile);
  certify->add_option("--out", out);

  // entrywise
  std::size_t trials = 10;
  auto* entrywise = app.add_subcommand("entrywise", "Per-trial entrywise eigenvector errors as CSV");
  entrywise->add_option("--d", d)->required();
  entrywise->add_option("--n", n)->required();
  entrywise->add_option("--alpha", alpha)->required();
  entrywise->add_option("--beta", beta)->required();
  entrywise->add_option("--trials", trials);
  entrywise->add_option("--seed", seed);
  entrywise->add_option("--out", out);

  // experiment
  std::string config_path;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte Carlo sweep from a JSON config");
  experiment->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  experiment->add_option("--out", out, "Override the output path in the config");
  experiment->add_option("--seed", seed, "Override the base seed in the config");

  // oracle (debugging aid)
  auto* oracle = app.add_subcommand("oracle", "Exhaustive min-bisection for n <= 20");
  oracle->group("");
  oracle->add_option("--input", input)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sample) {
      const auto sigma = hsbm::sample_balanced_assignment(n, hsbm::derive_seed(seed, {0}));
      const hsbm::HsbmParams params{d, n, alpha, beta, hsbm::derive_seed(seed, {1})};
      const auto g = hsbm::sample_hsbm(params, sigma);
      emit(out, [&](std::ostream& o) { hsbm::write_hypergraph(o, g); });
      if (!assignment_out.empty()) emit(assignment_out, [&](std::ostream& o) { hsbm::write_assignment(o, sigma); });
      if (!matrix_out.empty())
        emit(matrix_out, [&](std::ostream& o) { hsbm::write_matrix_csv(o, hsbm::similarity(g)); });
      if (!out.empty())
        std::cout << "sampled " << g.num_edges() << " edges (expected " << hsbm::expected_edge_count(params)
                  << ") on n=" << n << ", d=" << d << "\n";
    } else if (*threshold) {
      const hsbm::ThresholdQuery q{d, alpha, beta};
      const auto r = hsbm::threshold_I(q);
      const json j{{"d", d},
                   {"alpha", alpha},
                   {"beta", beta},
                   {"I", r.value_I},
                   {"t_star", optional_number(r.t_star)},
                   {"t_star_infinite", std::isinf(r.t_star)},
                   {"I_sdp", r.value_I_sdp}};
      emit(out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    } else if (*phase) {
      const auto rows = hsbm::phase_diagram(d, beta_min, beta_max, steps, which != "ISDP", which != "I");
      emit(out, [&](std::ostream& o) {
        o << std::setprecision(std::numeric_limits<double>::max_digits10);
        o << "beta,alpha_I,alpha_ISDP\n";
        for (const auto& r : rows) {
          o << r.beta << ',';
          if (r.alpha_I) o << *r.alpha_I;
          o << ',';
          if (r.alpha_I_sdp) o << *r.alpha_I_sdp;
          o << '\n';
        }
      });
      if (!out.empty()) std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
    } else if (*recover) {
      const auto w = hsbm::read_file<hsbm::SimilarityMatrix>(input, hsbm::read_matrix_csv);
      hsbm::CommunityAssignment sigma;
      if (method == "spectral") {
        sigma = hsbm::spectral_recover(w);
      } else {
        const auto rec = hsbm::sdp_recover(w);
        sigma = rec.assignment;
        std::cerr << (rec.certified ? "certified spectral candidate"
                                    : (rec.admm_converged ? "ADMM converged" : "ADMM hit the iteration cap"))
                  << "\n";
        if (rec.used_admm && !rec.admm_converged) {
          emit(out, [&](std::ostream& o) { hsbm::write_assignment(o, sigma); });
          return 3;
        }
      }
      emit(out, [&](std::ostream& o) { hsbm::write_assignment(o, sigma); });
    } else if (*certify) {
      const auto w = hsbm::read_file<hsbm::SimilarityMatrix>(input, hsbm::read_matrix_csv);
      const auto sigma = hsbm::read_file<hsbm::CommunityAssignment>(assignment_in, hsbm::read_assignment);
      const auto r = hsbm::certify(w, sigma);
      emit(out, [&](std::ostream& o) { o << certificate_json(r).dump(2) << '\n'; });
      if (!out.empty()) std::cout << (r.certified ? "certified\n" : "not certified: " + r.failure_reason + "\n");
    } else if (*entrywise) {
      std::vector<hsbm::EntrywiseReport> reports(trials);
      hsbm::parallel_for(trials, [&](std::size_t t) {
        const auto ts = hsbm::derive_seed(seed, {t});
        const auto sigma = hsbm::sample_balanced_assignment(n, hsbm::derive_seed(ts, {0}));
        const hsbm::HsbmParams p{d, n, alpha, beta, hsbm::derive_seed(ts, {1})};
        reports[t] = hsbm::entrywise_report(hsbm::similarity(hsbm::sample_hsbm(p, sigma)), hsbm::expected_similarity(p, sigma));
      });
      emit(out, [&](std::ostream& o) {
        o << std::setprecision(std::numeric_limits<double>::max_digits10);
        o << "trial,err_direct,err_first_order_vs_true,err_residual,sign_margin\n";
        for (std::size_t t = 0; t < trials; ++t)
          o << t << ',' << reports[t].err_direct << ',' << reports[t].err_first_order_vs_true << ','
            << reports[t].err_residual << ',' << reports[t].sign_margin << '\n';
      });
      if (!out.empty()) {
        std::vector<double> a, b, c;
        for (const auto& r : reports) {
          a.push_back(r.err_direct);
          b.push_back(r.err_first_order_vs_true);
          c.push_back(r.err_residual);
        }
        std::cout << "median err_direct " << hsbm::median(a) << ", err_first_order_vs_true " << hsbm::median(b)
                  << ", err_residual " << hsbm::median(c) << "\n";
      }
    } else if (*experiment) {
      std::ifstream in(config_path);
      json j = json::parse(in);
      if (!out.empty()) j["output"] = out;
      if (experiment->count("--seed")) j["seed"] = seed;
      const auto config = hsbm::ExperimentConfig::from_json(j);
      const auto result = hsbm::run_experiment(config);
      for (const auto& s : result.summaries) {
        std::cout << "cell " << s.cell.id << " n=" << s.cell.n << " alpha=" << s.cell.alpha << " beta=" << s.cell.beta
                  << " I=" << s.cell.I << " I_sdp=" << s.cell.I_sdp;
        for (const auto& [name, m] : s.methods)
          std::cout << " " << name << "=" << m.successes << "/" << m.trials << " [" << m.wilson.lower << ", "
                    << m.wilson.upper << "]";
        if (s.errors) std::cout << " errors=" << s.errors;
        std::cout << "\n";
      }
      std::cout << "wrote " << result.records.size() << " records to " << config.output << " ("
                << result.cells_resumed << " cells resumed)\n";
    } else if (*oracle) {
      const auto w = hsbm::read_file<hsbm::SimilarityMatrix>(input, hsbm::read_matrix_csv);
      const auto r = hsbm::exhaustive_min_bisection(w);
      hsbm::write_assignment(std::cout, r.best);
      std::cout << "value " << r.best_value << (r.unique ? " unique" : " tied") << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
