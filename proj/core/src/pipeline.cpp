#include "spca/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "spca/error.hpp"
#include "spca/io.hpp"
#include "spca/parallel.hpp"
#include "spca/pswf_basis.hpp"
#include "spca/quadrature.hpp"
#include "spca/spca_model.hpp"
#include "spca/synth.hpp"

namespace spca {
namespace {

using json = nlohmann::ordered_json;

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

const char* method_name(ExpansionMethod m) { return m == ExpansionMethod::Fast ? "fast" : "direct"; }

class Stage {
 public:
  Stage(const LogSink& log, std::string name) : log_(log), name_(std::move(name)) {}
  ~Stage() {
    if (!log_) return;
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    std::ostringstream msg;
    msg << name_ << " done in " << std::fixed << std::setprecision(3) << s << " s";
    log_(msg.str());
  }

 private:
  const LogSink& log_;
  std::string name_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void note(const LogSink& log, const std::string& s) {
  if (log) log(s);
}

bool same_params(const BandParams& a, const BandParams& b) {
  return a.L == b.L && a.c == b.c && a.T == b.T && a.eps_nystrom == b.eps_nystrom && a.theta_q == b.theta_q;
}

}  // namespace

void PipelineConfig::validate() const {
  if (L < 1) throw ConfigError("L must be positive");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("bandlimit ratio must lie in (0, 1]");
  if (!(T > 0.0)) throw ConfigError("truncation parameter T must be positive");
  if (!(theta_q > 0.0 && theta_q < 1.0)) throw ConfigError("theta_q must lie in (0, 1)");
  if (!(eps_nufft > 0.0 && eps_nufft < 1.0)) throw ConfigError("eps_nufft must lie in (0, 1)");
  if (K < 0) throw ConfigError("K must be nonnegative");
  if (threads < 0) throw ConfigError("thread count must be nonnegative");
  if (stack.empty() && synth_count < 1) throw ConfigError("synthetic stack needs at least one image");
  if (synth_eps < 0.0 || synth_delta < 0.0) throw ConfigError("synthetic concentration levels must be nonnegative");
  if (out_dir.empty()) throw ConfigError("output directory is required");
}

PipelineConfig PipelineConfig::from_json(std::string_view text, PipelineConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const auto& v = it.value();
      if (k == "L") c.L = v.get<int>();
      else if (k == "ratio") c.ratio = v.get<double>();
      else if (k == "T") c.T = v.get<double>();
      else if (k == "theta_q") c.theta_q = v.get<double>();
      else if (k == "eps_nufft") c.eps_nufft = v.get<double>();
      else if (k == "method") {
        const auto m = v.get<std::string>();
        if (m == "fast") c.method = ExpansionMethod::Fast;
        else if (m == "direct") c.method = ExpansionMethod::Direct;
        else throw ConfigError("method must be \"fast\" or \"direct\"");
      } else if (k == "K") c.K = v.get<int>();
      else if (k == "stack") c.stack = v.get<std::string>();
      else if (k == "out_dir") c.out_dir = v.get<std::string>();
      else if (k == "threads") c.threads = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "synth_count") c.synth_count = v.get<int>();
      else if (k == "synth_eps") c.synth_eps = v.get<double>();
      else if (k == "synth_delta") c.synth_delta = v.get<double>();
      else if (k == "use_cache") c.use_cache = v.get<bool>();
      else throw ConfigError("unknown config key \"" + k + "\"");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::from_json(std::string_view text) { return from_json(text, PipelineConfig{}); }

std::string PipelineConfig::to_json() const {
  json j;
  j["L"] = L;
  j["ratio"] = ratio;
  j["T"] = T;
  j["theta_q"] = theta_q;
  j["eps_nufft"] = eps_nufft;
  j["method"] = method_name(method);
  j["K"] = K;
  j["stack"] = stack.string();
  j["out_dir"] = out_dir.string();
  j["threads"] = threads;
  j["seed"] = seed;
  j["synth_count"] = synth_count;
  j["synth_eps"] = synth_eps;
  j["synth_delta"] = synth_delta;
  j["use_cache"] = use_cache;
  return j.dump(2);
}

std::string run_pipeline(const PipelineConfig& config, const LogSink& log) {
  config.validate();
  if (config.threads > 0) set_thread_count(config.threads);
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir.string());
  const auto path = [&](const char* name) { return config.out_dir / name; };

  BandParams params = BandParams::nyquist(config.L, config.ratio, config.T);
  params.theta_q = config.theta_q;
  params.validate();

  json report;
  report["config"] = json::parse(config.to_json());

  // Basis
  std::optional<PswfBasis> basis;
  if (config.use_cache && std::filesystem::exists(path("basis.pswb"))) {
    PswfBasis cached = load_basis(path("basis.pswb"));
    if (same_params(cached.params(), params)) {
      note(log, "basis: reusing cache");
      basis.emplace(std::move(cached));
    }
  }
  if (!basis) {
    Stage s(log, "basis");
    basis.emplace(PswfBasis::build(params));
    save_basis(path("basis.pswb"), *basis);
  }
  report["basis"] = {{"size", basis->size()},
                     {"full_cardinality", basis->full_cardinality()},
                     {"max_N", basis->max_N()},
                     {"hash", hex(basis->hash())}};

  // Stack
  ImageStack stack;
  double eps_space = 0.0, delta_c = 0.0;
  if (config.stack.empty()) {
    Stage s(log, "synth");
    SynthConfig sc;
    sc.count = config.synth_count;
    sc.seed = config.seed;
    sc.eps_space = config.synth_eps;
    sc.delta_c = config.synth_delta;
    SynthResult r = synth_stack(sc, *basis);
    eps_space = r.eps_effective;
    delta_c = r.delta_effective;
    stack = std::move(r.stack);
    save_stack(path("stack.spci"), stack);
  } else {
    stack = load_stack(config.stack);
  }
  report["stack"] = {{"M", stack.count}, {"side", stack.side}, {"provenance", stack.provenance}};

  // Rule and coefficients
  CoefficientSet coeffs;
  if (config.method == ExpansionMethod::Fast) {
    std::optional<QuadratureRule> rule;
    if (config.use_cache && std::filesystem::exists(path("rule.pswq"))) {
      QuadratureRule cached = load_rule(path("rule.pswq"));
      if (cached.theta_q == config.theta_q) {
        if (cached.basis_hash != basis->hash()) {
          throw ConfigError("stale cache: " + path("rule.pswq").string() +
                            " was built for a different basis; remove it or disable the cache");
        }
        note(log, "rule: reusing cache");
        rule.emplace(std::move(cached));
      }
    }
    if (!rule) {
      Stage s(log, "rule");
      rule.emplace(build_rule(*basis, config.theta_q));
      save_rule(path("rule.pswq"), *rule);
    }
    report["rule"] = {{"radial_nodes", rule->rings()},
                      {"total_nodes", rule->total_nodes()},
                      {"pixels", static_cast<std::size_t>(stack.side) * stack.side},
                      {"hash", hex(rule->hash())}};
    Stage s(log, "expand (fast)");
    coeffs = expand_fast(stack, *basis, *rule, {config.eps_nufft, true});
  } else {
    Stage s(log, "expand (direct)");
    coeffs = expand_direct(stack, *basis);
  }
  save_coefficients(path("coeffs.spcc"), coeffs);
  report["coefficients"] = {{"method", method_name(coeffs.method)},
                            {"count", coeffs.indices.size()},
                            {"hash", hex(coeffs.hash())}};

  // Model and projections
  SpcaModel model;
  {
    Stage s(log, "pca");
    model = build_model(coeffs, *basis);
  }
  save_model(path("model.spcm"), model);
  const std::size_t K = std::min<std::size_t>(config.K, model.components());
  const ProjectionSet proj = project(coeffs, *basis, model, K);
  save_projections(path("proj.csv"), proj);

  const double tail = model.tail(K, true);
  const double E = expansion_error_bound(eps_space, delta_c, params.T);
  json top = json::array();
  for (std::size_t k = 0; k < std::min<std::size_t>(model.components(), 12); ++k) {
    top.push_back({{"N", model.ranking[k].N}, {"value", model.ranking[k].value}});
  }
  report["model"] = {{"components", model.components()},
                     {"blocks", model.blocks.size()},
                     {"K", K},
                     {"residual_tail", tail},
                     {"top", top}};
  report["bounds"] = {{"eps_space", eps_space},
                      {"delta_c", delta_c},
                      {"expansion_error_bound", E},
                      {"total_error_bound", total_error_bound(tail, eps_space, delta_c, params.T)}};
  const std::string text = report.dump(2) + "\n";
  write_file_atomic(path("report.json"), text);
  return text;
}

}  // namespace spca
