#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>

#include "spca/diagnostics.hpp"
#include "spca/error.hpp"
#include "spca/io.hpp"
#include "spca/parallel.hpp"
#include "spca/pipeline.hpp"
#include "spca/radial.hpp"
#include "spca/synth.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace spca;

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "all") {
      out.push_back(static_cast<std::size_t>(-1));
      continue;
    }
    try {
      std::size_t used = 0;
      const long v = std::stol(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError("bad K list entry \"" + item + "\"");
    }
  }
  if (out.empty()) throw ConfigError("K list is empty");
  return out;
}

void print_json_or_csv(bool as_json, const json& j, const std::string& csv) {
  if (as_json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << csv;
  }
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("spca");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] %^%l%$ %v");
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Rotation-invariant PCA of image stacks in a prolate spheroidal basis"};
  app.require_subcommand(1);
  bool verbose = false;
  int threads = 0;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");
  app.add_option("--threads", threads, "Worker threads (default: SPCA_THREADS or all cores)")->check(CLI::NonNegativeNumber);

  // basis
  auto* basis_cmd = app.add_subcommand("basis", "Build and save a truncated basis");
  int L = 16;
  double ratio = 1.0, T = 10.0, theta_q = 1e-15;
  std::string out;
  basis_cmd->add_option("--size", L, "Sampling rate L (images of side 2L+1 or 2L)")->required()->check(CLI::PositiveNumber);
  basis_cmd->add_option("--bandlimit-ratio", ratio, "c / (pi L)")->capture_default_str();
  basis_cmd->add_option("--truncation", T, "Truncation parameter T")->capture_default_str();
  basis_cmd->add_option("--out", out, "Output basis file")->required();

  // quad
  auto* quad_cmd = app.add_subcommand("quad", "Build or validate a quadrature rule");
  std::string basis_path, rule_path;
  bool validate = false;
  quad_cmd->add_option("--basis", basis_path, "Basis file")->required();
  quad_cmd->add_option("--accuracy", theta_q, "Target accuracy theta_q")->capture_default_str();
  quad_cmd->add_option("--out", out, "Output rule file");
  quad_cmd->add_option("--rule", rule_path, "Rule file to validate");
  quad_cmd->add_flag("--validate", validate, "Print moment residuals as CSV");

  // expand
  auto* expand_cmd = app.add_subcommand("expand", "Expansion coefficients of an image stack");
  std::string stack_path;
  bool direct = false;
  double eps_nufft = 1e-12;
  expand_cmd->add_option("--stack", stack_path, "Image stack file")->required();
  expand_cmd->add_option("--basis", basis_path, "Basis file")->required();
  auto* rule_opt = expand_cmd->add_option("--rule", rule_path, "Quadrature rule (fast path)");
  expand_cmd->add_flag("--direct", direct, "Use the direct pixel sum")->excludes(rule_opt);
  expand_cmd->add_option("--eps-nufft", eps_nufft, "Nonuniform FFT accuracy")->capture_default_str();
  expand_cmd->add_option("--out", out, "Output coefficient file")->required();

  // reconstruct
  auto* rec_cmd = app.add_subcommand("reconstruct", "Images from expansion coefficients");
  std::string coeffs_path;
  rec_cmd->add_option("--coeffs", coeffs_path, "Coefficient file")->required();
  rec_cmd->add_option("--basis", basis_path, "Basis file")->required();
  rec_cmd->add_option("--out", out, "Output image stack")->required();

  // pca
  auto* pca_cmd = app.add_subcommand("pca", "Rotationally invariant covariance and its eigenpairs");
  std::string solver = "auto";
  pca_cmd->add_option("--coeffs", coeffs_path, "Coefficient file")->required();
  pca_cmd->add_option("--basis", basis_path, "Basis file")->required();
  pca_cmd->add_option("--solver", solver, "Block solver")->capture_default_str()->check(CLI::IsMember({"auto", "eigen", "svd"}));
  pca_cmd->add_option("--out", out, "Output model file")->required();

  // project
  auto* proj_cmd = app.add_subcommand("project", "Project images onto the leading components");
  std::string model_path;
  int K = 10;
  proj_cmd->add_option("--model", model_path, "Model file")->required();
  proj_cmd->add_option("--coeffs", coeffs_path, "Coefficient file")->required();
  proj_cmd->add_option("-K", K, "Number of components")->capture_default_str()->check(CLI::NonNegativeNumber);
  proj_cmd->add_option("--out", out, "Output CSV (m,k,re,im)")->required();

  // components
  auto* comp_cmd = app.add_subcommand("components", "Render leading components (real and imaginary parts)");
  int top = 12, side = 0;
  comp_cmd->add_option("--model", model_path, "Model file")->required();
  comp_cmd->add_option("--basis", basis_path, "Basis file")->required();
  comp_cmd->add_option("--top", top, "Number of components")->capture_default_str()->check(CLI::PositiveNumber);
  comp_cmd->add_option("--side", side, "Image side (default 2L+1)");
  comp_cmd->add_option("--out", out, "Output image stack, images 2k and 2k+1 hold Re and Im of component k")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic stack with known concentration levels");
  SynthConfig sc;
  std::string truth_path;
  synth_cmd->add_option("--basis", basis_path, "Basis file")->required();
  synth_cmd->add_option("--count", sc.count, "Number of images")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--side", sc.side, "Image side (default 2L+1)");
  synth_cmd->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--eps", sc.eps_space, "L2 norm outside the disk")->capture_default_str();
  synth_cmd->add_option("--delta", sc.delta_c, "Fourier-side L2 norm beyond the bandlimit")->capture_default_str();
  synth_cmd->add_option("--out", out, "Output image stack")->required();
  synth_cmd->add_option("--truth", truth_path, "Also write ground-truth coefficients");

  // diag
  auto* diag_cmd = app.add_subcommand("diag", "Numerical diagnostics");
  diag_cmd->require_subcommand(1);
  bool as_json = false;
  auto* gram_cmd = diag_cmd->add_subcommand("gram", "Spectrum of the sampled Gram matrix");
  gram_cmd->add_option("--basis", basis_path, "Basis file")->required();
  gram_cmd->add_option("--side", side, "Image side (default 2L+1)");
  gram_cmd->add_flag("--json", as_json, "JSON output");
  auto* lambda_cmd = diag_cmd->add_subcommand("lambda", "Eigenvalue sum identity and decay profile");
  lambda_cmd->add_option("--size", L, "Sampling rate L")->required()->check(CLI::PositiveNumber);
  lambda_cmd->add_option("--bandlimit-ratio", ratio, "c / (pi L)")->capture_default_str();
  lambda_cmd->add_flag("--json", as_json, "JSON output");
  auto* nodes_cmd = diag_cmd->add_subcommand("nodes", "Quadrature node counts");
  nodes_cmd->add_option("--rule", rule_path, "Rule file")->required();
  nodes_cmd->add_option("--size", L, "Sampling rate L")->required();
  nodes_cmd->add_flag("--json", as_json, "JSON output");
  auto* err_cmd = diag_cmd->add_subcommand("errcurve", "Theoretical and empirical error against K");
  std::string k_list = "0,1,2,5,10,25";
  double eps_space = 0.0, delta_c = 0.0;
  err_cmd->add_option("--stack", stack_path, "Image stack file")->required();
  err_cmd->add_option("--basis", basis_path, "Basis file")->required();
  err_cmd->add_option("--coeffs", coeffs_path, "Coefficient file")->required();
  err_cmd->add_option("--model", model_path, "Model file")->required();
  err_cmd->add_option("--K", k_list, "Comma-separated K values ('all' allowed)")->capture_default_str();
  err_cmd->add_option("--eps", eps_space, "Space concentration for the bound")->capture_default_str();
  err_cmd->add_option("--delta", delta_c, "Frequency concentration for the bound")->capture_default_str();
  err_cmd->add_flag("--json", as_json, "JSON output");

  // run
  auto* run_cmd = app.add_subcommand("run", "End-to-end pipeline");
  std::string config_path;
  PipelineConfig flags;
  std::string method_flag, run_stack, out_dir;
  run_cmd->add_option("--config", config_path, "JSON config file (flags win)");
  auto* o_L = run_cmd->add_option("--size", flags.L, "Sampling rate L");
  auto* o_ratio = run_cmd->add_option("--bandlimit-ratio", flags.ratio, "c / (pi L)");
  auto* o_T = run_cmd->add_option("--truncation", flags.T, "Truncation parameter T");
  auto* o_tq = run_cmd->add_option("--accuracy", flags.theta_q, "Quadrature accuracy theta_q");
  auto* o_nufft = run_cmd->add_option("--eps-nufft", flags.eps_nufft, "Nonuniform FFT accuracy");
  auto* o_method = run_cmd->add_option("--method", method_flag, "fast or direct")->check(CLI::IsMember({"fast", "direct"}));
  auto* o_K = run_cmd->add_option("-K", flags.K, "Number of components to project");
  auto* o_stack = run_cmd->add_option("--stack", run_stack, "Input stack (default: synthesize)");
  auto* o_out = run_cmd->add_option("--out-dir", out_dir, "Output directory");
  auto* o_seed = run_cmd->add_option("--seed", flags.seed, "Synthetic data seed");
  auto* o_count = run_cmd->add_option("--count", flags.synth_count, "Synthetic image count");
  auto* o_eps = run_cmd->add_option("--eps", flags.synth_eps, "Synthetic out-of-disk norm");
  auto* o_delta = run_cmd->add_option("--delta", flags.synth_delta, "Synthetic out-of-band norm");
  bool no_cache = false;
  run_cmd->add_flag("--no-cache", no_cache, "Rebuild basis and rule even if cached");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::Config);
  }
  if (verbose) spdlog::set_level(spdlog::level::info);
  if (threads > 0) set_thread_count(threads);

  try {
    if (*basis_cmd) {
      BandParams p = BandParams::nyquist(L, ratio, T);
      p.validate();
      const PswfBasis basis = PswfBasis::build(p);
      save_basis(out, basis);
      spdlog::info("basis: {} functions (N >= 0), {} counting +-N", basis.size(), basis.full_cardinality());
    } else if (*quad_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      if (validate) {
        const QuadratureRule rule = rule_path.empty() ? build_rule(basis, theta_q) : load_rule(rule_path);
        RadialOptions ro;
        const auto system2c = solve_radial(0, 2.0 * basis.params().c, ro);
        const auto res = moment_residuals(rule, system2c);
        std::cout << "k,residual\n";
        for (std::size_t k = 0; k < res.size(); ++k) std::printf("%zu,%.17g\n", k + 1, res[k]);
        std::printf("# radial_validation,%.17g\n",
                    radial_validation_error(rule.radial_nodes, rule.radial_weights, rule.bandlimit));
      } else {
        if (out.empty()) throw ConfigError("--out is required unless --validate is given");
        const QuadratureRule rule = build_rule(basis, theta_q);
        save_rule(out, rule);
        spdlog::info("rule: {} rings, {} nodes", rule.rings(), rule.total_nodes());
      }
    } else if (*expand_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      const ImageStack stack = load_stack(stack_path);
      CoefficientSet coeffs;
      if (direct) {
        coeffs = expand_direct(stack, basis);
      } else {
        if (rule_path.empty()) throw ConfigError("give --rule for the fast path or --direct");
        coeffs = expand_fast(stack, basis, load_rule(rule_path), {eps_nufft, true});
      }
      save_coefficients(out, coeffs);
    } else if (*rec_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      save_stack(out, reconstruct_stack(load_coefficients(coeffs_path), basis));
    } else if (*pca_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      SpcaOptions opts;
      opts.solver = solver == "eigen" ? BlockSolver::Eigen : solver == "svd" ? BlockSolver::Svd : BlockSolver::Auto;
      const SpcaModel model = build_model(load_coefficients(coeffs_path), basis, opts);
      save_model(out, model);
      spdlog::info("model: {} components in {} blocks", model.components(), model.blocks.size());
    } else if (*proj_cmd) {
      const SpcaModel model = load_model(model_path);
      const CoefficientSet coeffs = load_coefficients(coeffs_path);
      save_projections(out, project(b_coefficients(coeffs, model), model, static_cast<std::size_t>(K)));
    } else if (*comp_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      const SpcaModel model = load_model(model_path);
      const int s = side > 0 ? side : 2 * basis.params().L + 1;
      const int n = std::min<int>(top, static_cast<int>(model.components()));
      ImageStack stack = ImageStack::zeros(2 * n, s);
      stack.provenance = "components of " + model_path;
      for (int k = 0; k < n; ++k) {
        const auto g = component_image(model, basis, static_cast<std::size_t>(k), s);
        auto re = stack.image(2 * k);
        auto im = stack.image(2 * k + 1);
        for (std::size_t p = 0; p < g.size(); ++p) {
          re[p] = g[p].real();
          im[p] = g[p].imag();
        }
      }
      save_stack(out, stack);
    } else if (*synth_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      const SynthResult r = synth_stack(sc, basis);
      save_stack(out, r.stack);
      if (!truth_path.empty()) save_coefficients(truth_path, r.truth);
      spdlog::info("synth: eps_effective {:.3e}, delta_effective {:.3e}", r.eps_effective, r.delta_effective);
    } else if (*gram_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      const GramReport g = gram_spectrum(basis, side);
      json j = {{"L", g.L}, {"c", g.c}, {"T", g.T}, {"size", g.size},
                {"max_deviation", g.max_deviation}, {"predicted", g.predicted},
                {"min_eigenvalue", g.eigenvalues.size() ? g.eigenvalues(0) : 0.0},
                {"max_eigenvalue", g.eigenvalues.size() ? g.eigenvalues(g.eigenvalues.size() - 1) : 0.0}};
      std::ostringstream csv;
      csv.precision(17);
      csv << "k,nu\n";
      for (Eigen::Index k = 0; k < g.eigenvalues.size(); ++k) csv << k + 1 << ',' << g.eigenvalues(k) << '\n';
      print_json_or_csv(as_json, j, csv.str());
    } else if (*lambda_cmd) {
      const double c = ratio * std::numbers::pi * L;
      const auto at_c = solve_radial(0, c);
      const auto at_2c = solve_radial(0, 2.0 * c);
      const LambdaSumReport s = lambda_sum_identity(c, at_c);
      const LambdaDecayReport d = lambda_decay_profile(2.0 * c, at_2c);
      json j = {{"c", c},
                {"sum", s.sum},
                {"closed_form", s.closed_form},
                {"asymptote", s.asymptote},
                {"decay", {{"bandlimit", d.bandlimit}, {"first_small", d.first_small}, {"estimate", d.estimate},
                           {"gap", d.gap}, {"monotone", d.monotone}}}};
      std::ostringstream csv;
      csv.precision(17);
      csv << "n,abs_lambda_c,abs_lambda_2c\n";
      for (std::size_t n = 0; n < std::max(at_c.size(), at_2c.size()); ++n) {
        csv << n + 1 << ',';
        if (n < at_c.size()) csv << at_c[n].abs_lambda();
        csv << ',';
        if (n < at_2c.size()) csv << at_2c[n].abs_lambda();
        csv << '\n';
      }
      print_json_or_csv(as_json, j, csv.str());
    } else if (*nodes_cmd) {
      const QuadratureRule rule = load_rule(rule_path);
      const NodeReport r = node_report(rule, L);
      json j = {{"L", r.L}, {"radial", r.radial}, {"total", r.total}, {"estimate", r.estimate}, {"pixels", r.pixels}};
      std::ostringstream csv;
      csv << "ring,radius,weight,angular\n";
      csv.precision(17);
      for (std::size_t l = 0; l < rule.rings(); ++l) {
        csv << l << ',' << rule.radial_nodes[l] << ',' << rule.radial_weights[l] << ',' << rule.angular_counts[l] << '\n';
      }
      print_json_or_csv(as_json, j, csv.str());
    } else if (*err_cmd) {
      const PswfBasis basis = load_basis(basis_path);
      const ImageStack stack = load_stack(stack_path);
      const CoefficientSet coeffs = load_coefficients(coeffs_path);
      const SpcaModel model = load_model(model_path);
      const auto Ks = parse_k_list(k_list);
      const auto rows = error_curve(stack, basis, coeffs, model, Ks, {eps_space, delta_c});
      json j = json::array();
      std::ostringstream csv;
      csv.precision(17);
      csv << "K,theoretical,empirical,tail_continuous,error_continuous,bound\n";
      for (const auto& r : rows) {
        j.push_back({{"K", r.K}, {"theoretical", r.theoretical}, {"empirical", r.empirical},
                     {"tail_continuous", r.tail_continuous}, {"error_continuous", r.error_continuous},
                     {"bound", r.bound}});
        csv << r.K << ',' << r.theoretical << ',' << r.empirical << ',' << r.tail_continuous << ','
            << r.error_continuous << ',' << r.bound << '\n';
      }
      print_json_or_csv(as_json, j, csv.str());
    } else if (*run_cmd) {
      PipelineConfig cfg = config_path.empty() ? PipelineConfig{}
                                               : PipelineConfig::from_json(read_file(config_path), PipelineConfig{});
      if (*o_L) cfg.L = flags.L;
      if (*o_ratio) cfg.ratio = flags.ratio;
      if (*o_T) cfg.T = flags.T;
      if (*o_tq) cfg.theta_q = flags.theta_q;
      if (*o_nufft) cfg.eps_nufft = flags.eps_nufft;
      if (*o_method) cfg.method = method_flag == "direct" ? ExpansionMethod::Direct : ExpansionMethod::Fast;
      if (*o_K) cfg.K = flags.K;
      if (*o_stack) cfg.stack = run_stack;
      if (*o_out) cfg.out_dir = out_dir;
      if (*o_seed) cfg.seed = flags.seed;
      if (*o_count) cfg.synth_count = flags.synth_count;
      if (*o_eps) cfg.synth_eps = flags.synth_eps;
      if (*o_delta) cfg.synth_delta = flags.synth_delta;
      if (no_cache) cfg.use_cache = false;
      if (threads > 0) cfg.threads = threads;
      std::cout << run_pipeline(cfg, [](std::string_view s) { spdlog::info("{}", s); });
    }
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(ErrorKind::Numerical);
  }
  return 0;
}
