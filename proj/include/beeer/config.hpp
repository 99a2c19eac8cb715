// JSON configuration parsing for the CLI tools. Unknown keys are rejected
// so typos fail loudly; every key is optional and falls back to the
// documented default.
#pragma once

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "beeer/errors.hpp"
#include "beeer/harness.hpp"
#include "beeer/perturb.hpp"
#include "beeer/represent.hpp"

namespace beeer {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                       const char* where) {
  if (!j.is_object()) {
    throw ConfigError(std::string(where) + ": expected a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) {
      if (key == a) {
        ok = true;
        break;
      }
    }
    if (!ok) {
      throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key \"") + key + "\" has the wrong type");
  }
}

}  // namespace detail

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline DecodeConfig parse_decode_config(const nlohmann::json& j) {
  detail::check_keys(j, {"center_threshold", "nms_window", "min_instance_px"}, "decode");
  DecodeConfig cfg;
  cfg.center_threshold = detail::get_or(j, "center_threshold", cfg.center_threshold);
  cfg.nms_window = detail::get_or(j, "nms_window", cfg.nms_window);
  cfg.min_instance_px = detail::get_or(j, "min_instance_px", cfg.min_instance_px);
  cfg.validate();
  return cfg;
}

inline BoundaryConfig parse_boundary_config(const nlohmann::json& j) {
  detail::check_keys(j, {"dilation_radius", "connectivity"}, "boundary");
  BoundaryConfig cfg;
  cfg.dilation_radius = detail::get_or(j, "dilation_radius", cfg.dilation_radius);
  cfg.connectivity = detail::get_or(j, "connectivity", cfg.connectivity);
  cfg.validate();
  return cfg;
}

inline FelzParams parse_felz_params(const nlohmann::json& j) {
  detail::check_keys(j, {"k", "min_size", "smoothing_sigma"}, "felz");
  FelzParams p;
  p.k = detail::get_or(j, "k", p.k);
  p.min_size = detail::get_or(j, "min_size", p.min_size);
  p.smoothing_sigma = detail::get_or(j, "smoothing_sigma", p.smoothing_sigma);
  p.validate();
  return p;
}

inline PerturbConfig parse_perturb_config(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"p_boundary", "subsample_keep_min", "subsample_keep_max",
                      "morph_radius_min", "morph_radius_max", "p_remove", "p_split", "p_add_fp",
                      "max_added_fp", "fp_max_overlap", "felz", "seed"},
                     "perturb");
  PerturbConfig cfg;
  cfg.p_boundary = detail::get_or(j, "p_boundary", cfg.p_boundary);
  cfg.subsample_keep_min = detail::get_or(j, "subsample_keep_min", cfg.subsample_keep_min);
  cfg.subsample_keep_max = detail::get_or(j, "subsample_keep_max", cfg.subsample_keep_max);
  cfg.morph_radius_min = detail::get_or(j, "morph_radius_min", cfg.morph_radius_min);
  cfg.morph_radius_max = detail::get_or(j, "morph_radius_max", cfg.morph_radius_max);
  cfg.p_remove = detail::get_or(j, "p_remove", cfg.p_remove);
  cfg.p_split = detail::get_or(j, "p_split", cfg.p_split);
  cfg.p_add_fp = detail::get_or(j, "p_add_fp", cfg.p_add_fp);
  cfg.max_added_fp = detail::get_or(j, "max_added_fp", cfg.max_added_fp);
  cfg.fp_max_overlap = detail::get_or(j, "fp_max_overlap", cfg.fp_max_overlap);
  if (j.contains("felz")) cfg.felz = parse_felz_params(j.at("felz"));
  cfg.seed = detail::get_or(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

struct ToolConfig {
  RunConfig run;
  PerturbConfig perturb;
};

/// Full tool configuration: RunConfig keys at the top level plus a nested
/// "perturb" object.
inline ToolConfig parse_tool_config(const nlohmann::json& j) {
  detail::check_keys(j,
                     {"decode", "boundary", "fg_overlap_ratio", "fg_threshold",
                      "parallel_workers", "perturb"},
                     "config");
  ToolConfig cfg;
  if (j.contains("decode")) cfg.run.decode = parse_decode_config(j.at("decode"));
  if (j.contains("boundary")) cfg.run.boundary = parse_boundary_config(j.at("boundary"));
  cfg.run.fg_overlap_ratio = detail::get_or(j, "fg_overlap_ratio", cfg.run.fg_overlap_ratio);
  cfg.run.fg_threshold = detail::get_or(j, "fg_threshold", cfg.run.fg_threshold);
  cfg.run.parallel_workers = detail::get_or(j, "parallel_workers", cfg.run.parallel_workers);
  if (j.contains("perturb")) cfg.perturb = parse_perturb_config(j.at("perturb"));
  cfg.run.validate();
  return cfg;
}

/// A perturbation config file may be either the full tool schema (the
/// "perturb" object is taken) or a bare PerturbConfig object.
inline PerturbConfig parse_perturb_config_file(const nlohmann::json& j) {
  if (j.contains("perturb") || j.contains("decode") || j.contains("boundary") ||
      j.contains("fg_overlap_ratio") || j.contains("fg_threshold") ||
      j.contains("parallel_workers")) {
    return parse_tool_config(j).perturb;
  }
  return parse_perturb_config(j);
}

}  // namespace beeer
