#include "emdtex/cli/config.hpp"

#include <cmath>
#include <string>

#include "emdtex/error.hpp"
#include "emdtex/io/files.hpp"

namespace emdtex::cli {

using nlohmann::json;

namespace {

json parse_json_file(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  try {
    return json::parse(reinterpret_cast<const char*>(bytes.data()),
                       reinterpret_cast<const char*>(bytes.data()) + bytes.size());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, path.string() + ": " + e.what());
  }
}

template <typename T>
T value_of(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, "config key '" + key + "': " + e.what());
  }
}

}  // namespace

void CliConfig::validate() const {
  if (n_bimfs < 1) throw Error(ErrorCode::kInvalidArgument, "--n-bimfs must be >= 1");
  if (!(sd_threshold > 0.0)) throw Error(ErrorCode::kInvalidArgument, "--sd-threshold must be > 0");
  if (!std::isfinite(alpha)) throw Error(ErrorCode::kInvalidArgument, "--alpha must be finite");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "--jobs must be >= 1");
  weights.validate();
}

losses::LossWeights apply_weights(losses::LossWeights w, const json& j) {
  const json& src = j.contains("weights") ? j.at("weights") : j;
  if (!src.is_object()) throw Error(ErrorCode::kFormat, "weights must be a JSON object");
  for (const auto& [key, value] : src.items()) {
    double* slot = nullptr;
    if (key == "lambda_rec") slot = &w.lambda_rec;
    else if (key == "lambda_cyc") slot = &w.lambda_cyc;
    else if (key == "lambda_id") slot = &w.lambda_id;
    else if (key == "lambda_age") slot = &w.lambda_age;
    else if (key == "lambda_emd") slot = &w.lambda_emd;
    else if (key == "lambda_s") slot = &w.lambda_s;
    else throw Error(ErrorCode::kFormat, "unknown weight '" + key + "'");
    if (!value.is_number()) throw Error(ErrorCode::kFormat, "weight '" + key + "' must be a number");
    *slot = value.get<double>();
  }
  w.validate();
  return w;
}

losses::LossWeights read_weights_file(losses::LossWeights base, const std::filesystem::path& path) {
  return apply_weights(base, parse_json_file(path));
}

json weights_to_json(const losses::LossWeights& w) {
  return {{"lambda_rec", w.lambda_rec}, {"lambda_cyc", w.lambda_cyc},
          {"lambda_id", w.lambda_id},   {"lambda_age", w.lambda_age},
          {"lambda_emd", w.lambda_emd}, {"lambda_s", w.lambda_s}};
}

void apply_config(CliConfig& cfg, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "n_bimfs") cfg.n_bimfs = value_of<std::size_t>(j, key);
    else if (key == "sd_threshold") cfg.sd_threshold = value_of<double>(j, key);
    else if (key == "alpha") cfg.alpha = value_of<double>(j, key);
    else if (key == "window_rule") cfg.window_rule = bemd::window_rule_from_string(value_of<std::string>(j, key));
    else if (key == "smoothing") cfg.smoothing = value_of<bool>(j, key);
    else if (key == "jobs") cfg.jobs = value_of<int>(j, key);
    else if (key == "seed") cfg.seed = value_of<std::uint64_t>(j, key);
    else if (key == "weights") cfg.weights = apply_weights(cfg.weights, value);
    else throw Error(ErrorCode::kFormat, "unknown config key '" + key + "'");
  }
}

void apply_config_file(CliConfig& cfg, const std::filesystem::path& path) {
  apply_config(cfg, parse_json_file(path));
}

}  // namespace emdtex::cli
