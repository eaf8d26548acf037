#pragma once

#include <cstdint>
#include <filesystem>

#include "json.hpp"

#include "emdtex/bemd.hpp"
#include "emdtex/losses.hpp"

namespace emdtex::cli {

// Environment variable naming a default JSON config file.
inline constexpr const char* kConfigEnv = "EMDTEX_CONFIG";

struct CliConfig {
  std::size_t n_bimfs = 3;
  double sd_threshold = 0.2;
  double alpha = 1.0;
  losses::LossWeights weights;
  bemd::WindowRule window_rule = bemd::WindowRule::kMinAdjacentDistance;
  bool smoothing = true;
  int jobs = 1;
  std::uint64_t seed = 0;

  // Throws kInvalidArgument when a value violates a module precondition.
  void validate() const;
};

// Overlays the keys present in `j` onto `cfg`. Unknown keys are a kFormat error.
// Recognised: n_bimfs, sd_threshold, alpha, window_rule, smoothing, jobs, seed,
// weights {lambda_rec, lambda_cyc, lambda_id, lambda_age, lambda_emd, lambda_s}.
void apply_config(CliConfig& cfg, const nlohmann::json& j);
void apply_config_file(CliConfig& cfg, const std::filesystem::path& path);

// Partial weights object (or {"weights": {...}}) over `base`.
losses::LossWeights apply_weights(losses::LossWeights base, const nlohmann::json& j);
losses::LossWeights read_weights_file(losses::LossWeights base, const std::filesystem::path& path);

nlohmann::json weights_to_json(const losses::LossWeights& w);

}  // namespace emdtex::cli
