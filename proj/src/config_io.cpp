#include "misscov/config_io.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace misscov {

namespace {

[[noreturn]] void fail_at(const std::string& origin, const YAML::Node& node,
                          const std::string& message) {
  std::ostringstream msg;
  msg << origin << ":" << (node.Mark().line + 1) << ": " << message;
  throw std::runtime_error(msg.str());
}

double as_double(const std::string& origin, const YAML::Node& node, const char* key) {
  try {
    return node.as<double>();
  } catch (const YAML::Exception&) {
    fail_at(origin, node, std::string(key) + " must be a number");
  }
}

std::uint64_t as_u64(const std::string& origin, const YAML::Node& node, const char* key) {
  try {
    return node.as<std::uint64_t>();
  } catch (const YAML::Exception&) {
    fail_at(origin, node, std::string(key) + " must be a nonnegative integer");
  }
}

ExperimentConfig parse_config_node(const YAML::Node& root, const std::string& origin) {
  if (!root.IsMap()) throw std::runtime_error(origin + ":1: config must be a key/value mapping");

  static const std::set<std::string> known = {
      "d",          "spectrum",         "rotation_seed", "dist",
      "dof",        "p_values",         "N_values",      "trials",
      "delta",      "master_seed",      "estimators",    "output_path",
      "kappa",      "net_extra_random", "psd_project",   "opnorm_constants",
      "gate_constant", "record_timing", "threads"};
  for (const auto& entry : root) {
    const std::string key = entry.first.as<std::string>();
    if (!known.count(key)) fail_at(origin, entry.first, "unknown key '" + key + "'");
  }

  auto require = [&](const char* key) -> YAML::Node {
    YAML::Node node = root[key];
    if (!node) throw std::runtime_error(origin + ":1: missing required key '" + std::string(key) + "'");
    return node;
  };

  ExperimentConfig cfg;
  cfg.d = as_u64(origin, require("d"), "d");

  {
    const YAML::Node node = require("spectrum");
    try {
      cfg.spectrum = SpectrumTag::parse(node.as<std::string>());
    } catch (const std::exception& e) {
      fail_at(origin, node, e.what());
    }
  }
  if (YAML::Node node = root["rotation_seed"]) cfg.rotation_seed = as_u64(origin, node, "rotation_seed");
  {
    const YAML::Node node = require("dist");
    try {
      dist_from_string(node.as<std::string>(), cfg.dist, cfg.dof);
    } catch (const std::exception& e) {
      fail_at(origin, node, e.what());
    }
  }
  {
    const YAML::Node node = require("p_values");
    if (!node.IsSequence()) fail_at(origin, node, "p_values must be a list");
    for (const auto& item : node) {
      const double p = as_double(origin, item, "p value");
      if (!(p > 0.0 && p <= 1.0)) fail_at(origin, item, "p values must lie in (0,1]");
      cfg.p_values.push_back(p);
    }
  }
  {
    const YAML::Node node = require("N_values");
    if (!node.IsSequence()) fail_at(origin, node, "N_values must be a list");
    for (const auto& item : node) {
      const std::uint64_t n = as_u64(origin, item, "N value");
      if (n < 8) fail_at(origin, item, "N values must be >= 8");
      cfg.n_values.push_back(n);
    }
  }
  cfg.trials = as_u64(origin, require("trials"), "trials");
  cfg.delta = as_double(origin, require("delta"), "delta");
  cfg.master_seed = as_u64(origin, require("master_seed"), "master_seed");
  {
    const YAML::Node node = require("estimators");
    if (!node.IsSequence()) fail_at(origin, node, "estimators must be a list");
    for (const auto& item : node) {
      try {
        cfg.estimators.push_back(estimator_tag_parse(item.as<std::string>()));
      } catch (const std::exception& e) {
        fail_at(origin, item, e.what());
      }
    }
  }
  cfg.output_path = require("output_path").as<std::string>();

  if (YAML::Node node = root["kappa"]) cfg.kappa = as_double(origin, node, "kappa");
  if (YAML::Node node = root["net_extra_random"])
    cfg.net_extra_random = as_u64(origin, node, "net_extra_random");
  if (YAML::Node node = root["psd_project"]) cfg.psd_project = node.as<bool>();
  if (YAML::Node node = root["gate_constant"])
    cfg.gate_constant = as_double(origin, node, "gate_constant");
  if (YAML::Node node = root["record_timing"]) cfg.record_timing = node.as<bool>();
  if (YAML::Node node = root["threads"]) cfg.threads = static_cast<int>(as_u64(origin, node, "threads"));
  if (YAML::Node node = root["opnorm_constants"]) {
    if (!node.IsMap()) fail_at(origin, node, "opnorm_constants must be a mapping {C1, L1, L2}");
    if (YAML::Node c = node["C1"]) cfg.opnorm_constants.C1 = as_double(origin, c, "C1");
    if (YAML::Node c = node["L1"]) cfg.opnorm_constants.L1 = as_double(origin, c, "L1");
    if (YAML::Node c = node["L2"]) cfg.opnorm_constants.L2 = as_double(origin, c, "L2");
    try {
      cfg.opnorm_constants.validate();
    } catch (const std::exception& e) {
      fail_at(origin, node, e.what());
    }
  }

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(origin + ": " + e.what());
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    std::ostringstream msg;
    msg << origin << ":" << (e.mark.line + 1) << ": " << e.msg;
    throw std::runtime_error(msg.str());
  }
  return parse_config_node(root, origin);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buffer;
  buffer << f.rdbuf();
  return parse_experiment_config(buffer.str(), path);
}

}  // namespace misscov
