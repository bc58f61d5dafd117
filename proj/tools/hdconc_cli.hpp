#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdconc/hdconc.hpp"

// Command-line front end. Every run prints a single JSON document:
//
//   {"command", "config", "result", "reports", "pass", "elapsed_ms"}
//
// Exit codes: 0 success, 1 a verification failed, 2 usage or input error.

namespace hdconc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

struct Common {
  std::string out_path;
  bool csv = false;
  unsigned threads = default_threads();
};

struct Stochastic {
  std::uint64_t n = 1000000;
  std::uint64_t seed = 0;
};

struct Outcome {
  json result = json::object();
  std::vector<MCReport> reports;
  bool pass = true;
};

inline void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out_path, "Write the report to PATH instead of stdout");
  app->add_flag("--csv", c.csv, "Print the tabular report rows as CSV instead of JSON");
  app->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1u, 1024u));
}

inline void add_stochastic(CLI::App* app, Stochastic& s, std::uint64_t default_n) {
  s.n = default_n;
  app->add_option("--n", s.n, "Monte Carlo sample size")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  app->add_option("--seed", s.seed, "Master seed (required)")->required();
}

inline json config_of(const CLI::App* app) {
  json cfg = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    std::string key = opt->get_name();
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    const auto& res = opt->results();
    if (res.empty()) {
      const std::string d = opt->get_default_str();
      cfg[key] = d.empty() ? json(nullptr) : json(d);
    } else if (res.size() == 1) {
      cfg[key] = res.front();
    } else {
      cfg[key] = res;
    }
  }
  return cfg;
}

inline std::optional<SymMatrix> maybe_matrix(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return read_sym_matrix(path);
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

// Parses argv, runs one command and writes the report. Diagnostics go to err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"hdconc: Gaussian and sub-gaussian deviation quantiles, 3-tensor bounds, Monte Carlo checks",
               "hdconc"};
  app.require_subcommand(1);
  app.fallthrough(false);
  app.option_defaults()->always_capture_default();

  Common common;
  Stochastic stoch;
  std::string matrix_path, tensor_path, design_path, gamma_path, dmat_path;
  std::string family_name = "gaussian", side_name = "upper";
  double x = 0.0, zsq = 0.0, eps = 0.0, gsq = 1.0, sigma = 1.0, verify_tau = -1.0;
  long long nobs = 0;
  int dim = 0, k = 3;
  std::uint64_t reps = 50000;
  std::vector<double> x_grid, u_vec, mu_grid, truth;
  std::vector<int> k_grid;
  NormOptions norm_opts;
  std::function<Outcome()> action;
  CLI::App* active = nullptr;

  auto nonneg = CLI::NonNegativeNumber;
  auto positive = CLI::PositiveNumber;

  // bound
  auto* bound = app.add_subcommand("bound", "Deviation quantiles of |xi|^2 for xi ~ N(0, B)");
  add_common(bound, common);
  bound->add_option("--matrix", matrix_path, "Covariance B (CSV)")->required()->check(CLI::ExistingFile);
  bound->add_option("--x", x, "Confidence exponent x >= 0 (level exp(-x))")->required()->check(nonneg);
  bound->add_option("--gsq", gsq, "Sub-gaussian variance proxy g^2")->check(positive);
  bound->add_option("--nobs", nobs, "Sample size n for the critical-dimension report")->check(CLI::PositiveNumber);
  bound->callback([&] {
    active = bound;
    action = [&] {
      const SymMatrix b = read_sym_matrix(matrix_path);
      const SpectralSummary s = spectral_summary(b);
      const QuadraticFormMoments mom = qf_moments(s);
      Outcome o;
      o.result = {{"summary", to_json(s)},
                  {"z_sq", upper_quantile_sq(s, x)},
                  {"z_sq_lower", lower_quantile_sq(s, x)},
                  {"level", std::exp(-x)},
                  {"moments", {{"mean", mom.mean}, {"variance", mom.variance}}}};
      if (bound->count("--gsq")) o.result["subgaussian_z_sq"] = subgaussian_upper_quantile_sq(s, {gsq}, x);
      if (nobs > 0) {
        const auto cd = critical_dimension_report(s, nobs);
        o.result["critical_dimension"] = {{"eff_dim", cd.eff_dim},
                                          {"ratio", cd.ratio},
                                          {"regime", std::string(to_string(cd.regime))},
                                          {"convention", "tooling thresholds: ok <= 0.1 < marginal <= 1 < violated"}};
      }
      return o;
    };
  });

  // invert
  auto* invert = app.add_subcommand("invert", "Bound-implied x for a threshold z^2");
  add_common(invert, common);
  invert->add_option("--matrix", matrix_path, "Covariance B (CSV)")->required()->check(CLI::ExistingFile);
  invert->add_option("--zsq", zsq, "Threshold z^2 >= 0")->required()->check(nonneg);
  invert->callback([&] {
    active = invert;
    action = [&] {
      const SpectralSummary s = spectral_summary(read_sym_matrix(matrix_path));
      const double xi = bound_implied_x(s, zsq);
      Outcome o;
      o.result = {{"summary", to_json(s)},
                  {"x", xi},
                  {"branch", zsq >= s.trace ? "upper" : "lower"},
                  {"bound_p_value", std::exp(-xi)}};
      return o;
    };
  });

  // tensor
  auto* tensor = app.add_subcommand("tensor", "Symmetric 3-tensor calculus");
  tensor->require_subcommand(1);
  auto add_tensor_in = [&](CLI::App* c) {
    add_common(c, common);
    c->add_option("--tensor", tensor_path, "Tensor file (i j k value per line)")->required()->check(CLI::ExistingFile);
    c->add_option("--dim", dim, "Dimension p (default: largest index)")->check(CLI::PositiveNumber);
  };
  auto load_tensor = [&] { return read_tensor(tensor_path, dim > 0 ? std::optional<int>(dim) : std::nullopt); };
  auto add_norm_opts = [&](CLI::App* c) {
    c->add_option("--restarts", norm_opts.restarts, "Power-iteration restarts")->check(CLI::Range(1, 100000));
    c->add_option("--iters", norm_opts.iters, "Iterations per restart")->check(CLI::Range(1, 10000000));
    c->add_option("--tol", norm_opts.tol, "Relative convergence tolerance")->check(positive);
  };

  auto* t_eval = tensor->add_subcommand("eval", "T(u)");
  add_tensor_in(t_eval);
  t_eval->add_option("--u", u_vec, "Point u (comma separated)")->required()->delimiter(',');
  t_eval->callback([&] {
    active = t_eval;
    action = [&] {
      Outcome o;
      o.result = {{"value", evaluate(load_tensor(), to_vector(u_vec))}};
      return o;
    };
  });

  auto* t_grad = tensor->add_subcommand("grad", "grad T(u) and the slice T[u]");
  add_tensor_in(t_grad);
  t_grad->add_option("--u", u_vec, "Point u (comma separated)")->required()->delimiter(',');
  t_grad->callback([&] {
    active = t_grad;
    action = [&] {
      const SymTensor3 t = load_tensor();
      const Vector u = to_vector(u_vec);
      Outcome o;
      o.result = {{"gradient", to_json(gradient(t, u))}, {"slice", to_json(slice(t, u).matrix())}};
      return o;
    };
  });

  auto* t_norm = tensor->add_subcommand("norm", "sup_{|u|=1} |T(u)| by power iteration");
  add_tensor_in(t_norm);
  add_norm_opts(t_norm);
  t_norm->callback([&] {
    active = t_norm;
    action = [&] {
      const NormResult nr = operator_norm(load_tensor(), norm_opts);
      Outcome o;
      o.result = {{"value", nr.value}, {"maximizer", to_json(nr.maximizer)}, {"converged", nr.converged}};
      return o;
    };
  });

  auto* t_mom = tensor->add_subcommand("moments", "Exact Gaussian moments and trace quantities");
  add_tensor_in(t_mom);
  t_mom->callback([&] {
    active = t_mom;
    action = [&] {
      const SymTensor3 t = load_tensor();
      const auto m = gaussian_moments_exact(t);
      Outcome o;
      o.result = {{"frobenius_sq", frobenius_sq(t)},
                  {"trace_vector", to_json(trace_vector(t))},
                  {"e_t2", m.e_t2},
                  {"e_centered2", m.e_centered2},
                  {"e_grad_norm2", m.e_grad_norm2},
                  {"s_matrix", to_json(s_matrix(t).matrix())}};
      return o;
    };
  });

  auto* t_cert = tensor->add_subcommand("certify", "Minimal tau with |T(u)| <= tau |Gamma u|^3");
  add_tensor_in(t_cert);
  add_norm_opts(t_cert);
  t_cert->add_option("--gamma", gamma_path, "Gamma (CSV, positive definite)")->required()->check(CLI::ExistingFile);
  t_cert->add_option("--verify-tau", verify_tau, "Check a given tau on 10^4 random directions instead")
      ->check(positive);
  t_cert->callback([&] {
    active = t_cert;
    action = [&] {
      const SymTensor3 t = load_tensor();
      const SymMatrix gamma = read_sym_matrix(gamma_path);
      Outcome o;
      if (verify_tau > 0.0) {
        const auto v = verify_gamma(t, gamma, verify_tau);
        o.result = {{"tau", verify_tau}, {"max_ratio", v.max_ratio}, {"pass", v.pass}, {"samples", 10000}};
        o.pass = v.pass;
      } else {
        const auto c = certify_gamma(t, gamma, norm_opts);
        o.result = {{"tau", c.tau}, {"certified", c.certified}, {"method", c.method}};
      }
      return o;
    };
  });

  auto* t_bounds = tensor->add_subcommand("bounds", "Bound sheet implied by a (Gamma) certificate");
  add_tensor_in(t_bounds);
  add_norm_opts(t_bounds);
  t_bounds->add_option("--gamma", gamma_path, "Gamma (CSV)")->check(CLI::ExistingFile);
  t_bounds->add_option("--dmat", dmat_path, "D for the colored case N(0, D^-2) (CSV)")->check(CLI::ExistingFile);
  t_bounds->add_option("--x", x, "Exponent for the Herbst radius r = z(J^2, x)")->check(nonneg);
  t_bounds->callback([&] {
    active = t_bounds;
    action = [&] {
      if (gamma_path.empty()) throw Error(ErrorCode::MissingCertificate, "--gamma is required for a bound sheet");
      const SymTensor3 t = load_tensor();
      const GammaCertificate cert = certify_gamma(t, read_sym_matrix(gamma_path), norm_opts);
      std::optional<ColoredSpec> colored;
      if (!dmat_path.empty()) colored = make_colored(read_sym_matrix(dmat_path), cert.gamma);
      const BoundSheet sheet = gamma_bounds(cert, colored);
      // Exact quantities of the tensor the sheet speaks about.
      const SymTensor3 target = colored ? pushforward_tensor(t, colored->dmat) : t;
      const Matrix g2 = colored ? colored->jsq->matrix() : Matrix(cert.gamma.matrix() * cert.gamma.matrix());
      const double fr = frobenius_sq(target);
      const double mnorm = trace_vector(target).norm();
      const auto mom = gaussian_moments_exact(target);
      const Matrix gap = s_matrix(target).matrix() - sheet.s_matrix_dominance_factor * g2;
      Eigen::SelfAdjointEigenSolver<Matrix> es(gap, Eigen::EigenvaluesOnly);
      const double lam_max = es.eigenvalues().maxCoeff();
      const double scale = 1.0 + std::abs(sheet.s_matrix_dominance_factor) * g2.norm();
      Outcome o;
      o.result = {{"certificate", {{"tau", cert.tau}, {"certified", cert.certified}, {"method", cert.method}}},
                  {"sheet", to_json(sheet)},
                  {"exact", {{"frobenius_sq", fr}, {"trace_vec_norm", mnorm}, {"e_t2", mom.e_t2},
                             {"s_gap_lambda_max", lam_max}}}};
      const bool ok = fr <= sheet.frobenius_sq_bound * (1 + 1e-10) && mnorm <= sheet.trace_vec_bound * (1 + 1e-10) &&
                      lam_max <= 1e-8 * scale && mom.e_t2 <= sheet.e_t2_bound * (1 + 1e-10);
      o.result["dominated"] = ok;
      o.pass = ok;
      if (t_bounds->count("--x")) {
        const SpectralSummary j2 = spectral_summary(colored ? *colored->jsq : SymMatrix(g2));
        const double r = herbst_radius(j2, x);
        o.result["herbst"] = {{"x", x}, {"radius", r}, {"opnorm_j", std::sqrt(j2.opnorm)}};
        if (cert.tau > 0.0) {
          o.result["herbst"]["epsilon"] = herbst_epsilon(cert.tau, r, std::sqrt(j2.opnorm), EpsilonKind::Tensor);
        }
      }
      return o;
    };
  });

  // verify
  auto* verify = app.add_subcommand("verify", "Monte Carlo and quadrature verification drivers");
  verify->require_subcommand(1);

  auto* v_tail = verify->add_subcommand("tail", "Empirical tails of |xi|^2 beyond the quantile bounds");
  add_common(v_tail, common);
  add_stochastic(v_tail, stoch, 1000000);
  v_tail->add_option("--matrix", matrix_path, "Covariance B (CSV)")->required()->check(CLI::ExistingFile);
  v_tail->add_option("--family", family_name, "Noise family")
      ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  v_tail->add_option("--x", x_grid, "Exponent(s) x >= 0")->required()->delimiter(',')->check(nonneg);
  v_tail->add_option("--side", side_name, "Tail side")->check(CLI::IsMember({"upper", "lower"}));
  v_tail->callback([&] {
    active = v_tail;
    action = [&] {
      Outcome o;
      o.reports = verify_quantile_bound(read_sym_matrix(matrix_path), NoiseFamily::parse(family_name), x_grid,
                                        side_name == "upper" ? Side::Upper : Side::Lower, stoch.n,
                                        RngSpec{stoch.seed, 0, 4096}, common.threads);
      o.pass = all_pass(o.reports);
      return o;
    };
  });

  auto* v_tm = verify->add_subcommand("tensor-moments", "Exact Gaussian tensor moments against Monte Carlo");
  add_common(v_tm, common);
  add_stochastic(v_tm, stoch, 500000);
  v_tm->add_option("--tensor", tensor_path, "Tensor file")->required()->check(CLI::ExistingFile);
  v_tm->add_option("--dim", dim, "Dimension p")->check(CLI::PositiveNumber);
  v_tm->add_option("--gamma", gamma_path, "Gamma for the colored bound (CSV)")->check(CLI::ExistingFile);
  v_tm->add_option("--dmat", dmat_path, "D for the colored case (CSV)")->check(CLI::ExistingFile);
  v_tm->callback([&] {
    active = v_tm;
    action = [&] {
      const SymTensor3 t = load_tensor();
      std::optional<ColoredCheck> colored;
      if (!gamma_path.empty()) {
        const GammaCertificate cert = certify_gamma(t, read_sym_matrix(gamma_path));
        const SymMatrix d = dmat_path.empty() ? SymMatrix::identity(t.dim()) : read_sym_matrix(dmat_path);
        colored = ColoredCheck{make_colored(d, cert.gamma), cert};
      } else if (!dmat_path.empty()) {
        throw Error(ErrorCode::MissingGamma, "--dmat needs --gamma for the colored bound");
      }
      Outcome o;
      o.reports = verify_tensor_moments(t, colored, stoch.n, RngSpec{stoch.seed, 0, 4096}, common.threads);
      o.pass = all_pass(o.reports);
      return o;
    };
  });

  auto* v_mgf = verify->add_subcommand("mgf", "Truncated MGF, truncation probability and deviation tail");
  add_common(v_mgf, common);
  add_stochastic(v_mgf, stoch, 1000000);
  v_mgf->add_option("--tensor", tensor_path, "Tensor file")->required()->check(CLI::ExistingFile);
  v_mgf->add_option("--dim", dim, "Dimension p")->check(CLI::PositiveNumber);
  v_mgf->add_option("--gamma", gamma_path, "Gamma (CSV)")->required()->check(CLI::ExistingFile);
  v_mgf->add_option("--dmat", dmat_path, "D (CSV, default identity)")->check(CLI::ExistingFile);
  v_mgf->add_option("--x", x, "Exponent x")->required()->check(nonneg);
  v_mgf->add_option("--mu", mu_grid, "mu values (comma separated)")->delimiter(',');
  v_mgf->callback([&] {
    active = v_mgf;
    action = [&] {
      const SymTensor3 t = load_tensor();
      const GammaCertificate cert = certify_gamma(t, read_sym_matrix(gamma_path));
      const SymMatrix d = dmat_path.empty() ? SymMatrix::identity(t.dim()) : read_sym_matrix(dmat_path);
      if (mu_grid.empty()) mu_grid = {-2, -1, -0.5, 0.5, 1, 2};
      HerbstSetup setup;
      Outcome o;
      o.reports = verify_truncated_mgf(t, cert, make_colored(d, cert.gamma), x, mu_grid, stoch.n,
                                       RngSpec{stoch.seed, 0, 4096}, common.threads, &setup);
      o.result = {{"radius", setup.radius}, {"epsilon", setup.epsilon}, {"opnorm_j", setup.opnorm_j},
                  {"centering", setup.centering}, {"tau", cert.tau}};
      if (setup.epsilon > kEpsilonWarn) err << "warning: EpsilonTooLarge (eps = " << setup.epsilon << ")\n";
      o.pass = all_pass(o.reports);
      return o;
    };
  });

  auto* v_taylor = verify->add_subcommand("taylor", "Taylor-remainder bounds for X ~ N(0, eps^2)");
  add_common(v_taylor, common);
  add_stochastic(v_taylor, stoch, 1000000);
  v_taylor->add_option("--eps", eps, "eps > 0")->required()->check(positive);
  v_taylor->add_option("--k", k, "Truncation order (2 or 3)")->check(CLI::IsMember({2, 3}));
  v_taylor->callback([&] {
    active = v_taylor;
    action = [&] {
      Outcome o;
      o.reports = verify_taylor_remainder(eps, k, stoch.n, RngSpec{stoch.seed, 0, 4096}, common.threads);
      o.pass = all_pass(o.reports);
      return o;
    };
  });

  auto* v_const = verify->add_subcommand("constants", "Moment constants C_k^2 = 2^{k+1} k!");
  add_common(v_const, common);
  add_stochastic(v_const, stoch, 1000000);
  v_const->add_option("--eps", eps, "eps > 0")->required()->check(positive);
  v_const->add_option("--k", k_grid, "Orders k (comma separated)")->required()->delimiter(',')->check(CLI::Range(1, 150));
  v_const->callback([&] {
    active = v_const;
    action = [&] {
      Outcome o;
      o.reports = verify_moment_constants(eps, k_grid, stoch.n, RngSpec{stoch.seed, 0, 4096}, common.threads);
      o.pass = all_pass(o.reports);
      return o;
    };
  });

  // confset
  auto* confset = app.add_subcommand("confset", "Least-squares confidence-set radius");
  add_common(confset, common);
  confset->add_option("--design", design_path, "Design Psi (CSV, n x p)")->required()->check(CLI::ExistingFile);
  confset->add_option("--x", x, "Confidence exponent x")->required()->check(nonneg);
  confset->add_option("--sigma", sigma, "iid noise scale")->check(positive);
  confset->add_option("--matrix", matrix_path, "Noise covariance (CSV, n x n); overrides --sigma")
      ->check(CLI::ExistingFile);
  confset->callback([&] {
    active = confset;
    action = [&] {
      const Matrix design = read_csv_matrix(design_path);
      const SymMatrix cov = matrix_path.empty()
                                ? SymMatrix(Matrix::Identity(design.rows(), design.rows()) * sigma * sigma)
                                : read_sym_matrix(matrix_path);
      const ConfidenceSetSpec cs = confset_radius(design, cov, x);
      Outcome o;
      o.result = {{"x", cs.x}, {"radius_sq", cs.radius_sq}, {"level", std::exp(-x)}, {"summary", to_json(cs.summary)}};
      return o;
    };
  });

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Non-coverage frequency of the confidence set");
  add_common(coverage, common);
  coverage->add_option("--design", design_path, "Design Psi (CSV, n x p)")->required()->check(CLI::ExistingFile);
  coverage->add_option("--x", x, "Confidence exponent x")->required()->check(nonneg);
  coverage->add_option("--reps", reps, "Replications")->check(CLI::Range(std::uint64_t{1}, std::uint64_t{1} << 40));
  coverage->add_option("--seed", stoch.seed, "Master seed (required)")->required();
  coverage->add_option("--family", family_name, "Noise family")
      ->check(CLI::IsMember({"gaussian", "rademacher", "uniform"}));
  coverage->add_option("--sigma", sigma, "Noise scale")->check(positive);
  coverage->add_option("--truth", truth, "True parameter (comma separated, default zero)")->delimiter(',');
  coverage->callback([&] {
    active = coverage;
    action = [&] {
      LinearModelSpec model;
      model.design = read_csv_matrix(design_path);
      model.noise = NoiseFamily::parse(family_name);
      model.sigma = sigma;
      model.truth = truth.empty() ? Vector::Zero(model.design.cols()) : to_vector(truth);
      Outcome o;
      o.reports = {coverage_experiment(model, x, reps, RngSpec{stoch.seed, 0, 4096}, common.threads)};
      o.pass = all_pass(o.reports);
      return o;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "hdconc: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!action || !active) {
    err << "hdconc: no command given\n";
    return kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = action();
  } catch (const Error& e) {
    err << "hdconc: " << e.what() << "\n";
    return kExitUsage;
  }
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::string command;
  for (const CLI::App* a = active; a && a->get_parent(); a = a->get_parent()) {
    command = command.empty() ? a->get_name() : a->get_name() + " " + command;
  }

  std::string text;
  if (common.csv && !outcome.reports.empty()) {
    text = reports_csv(outcome.reports);
  } else {
    json doc = {{"command", command},
                {"config", config_of(active)},
                {"result", outcome.result},
                {"reports", to_json(outcome.reports, elapsed_ms)},
                {"pass", outcome.pass},
                {"elapsed_ms", elapsed_ms}};
    text = doc.dump(2) + "\n";
  }
  if (common.out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(common.out_path);
    if (!f) {
      err << "hdconc: cannot write " << common.out_path << "\n";
      return kExitUsage;
    }
    f << text;
  }
  return outcome.pass ? kExitOk : kExitFail;
}

}  // namespace hdconc::cli
