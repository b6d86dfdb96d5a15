#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include "spca/expand.hpp"

namespace spca {

struct PipelineConfig {
  int L = 16;
  double ratio = 1.0;  // c / (pi L)
  double T = 10.0;
  double theta_q = 1e-15;
  double eps_nufft = 1e-12;
  ExpansionMethod method = ExpansionMethod::Fast;
  int K = 10;
  std::filesystem::path stack;   // empty: synthesize
  std::filesystem::path out_dir = "spca_out";
  int threads = 0;               // 0: SPCA_THREADS or hardware
  std::uint64_t seed = 1;
  int synth_count = 100;
  double synth_eps = 0.0;
  double synth_delta = 0.0;
  bool use_cache = true;

  // Throws ConfigError.
  void validate() const;
  // Keys missing from the JSON keep the values already in base.
  static PipelineConfig from_json(std::string_view text, PipelineConfig base);
  static PipelineConfig from_json(std::string_view text);
  std::string to_json() const;
};

using LogSink = std::function<void(std::string_view)>;

// Runs basis -> rule (fast path) -> coefficients -> model -> projections and
// writes each artifact plus report.json into out_dir. Returns the report text.
std::string run_pipeline(const PipelineConfig& config, const LogSink& log = {});

}  // namespace spca
