#include "alvar/harness/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "alvar/harness/io.hpp"

namespace alvar::harness {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "model",         "params",          "observations",     "particles",
      "steps",         "replicates",      "reference_replicates", "estimators",
      "resampling",    "test_function",   "seed",             "out",
      "checkpoint_stride", "lag_cap",     "particle_counts",  "burn_in",
      "max_lag",       "quantile",        "threads"};
  return keys;
}

template <typename T>
T get_as(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config key '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw std::invalid_argument(std::string("config key '") + key +
                                "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

void read_params(const json& params, ExperimentConfig& cfg) {
  if (!params.is_object()) throw std::invalid_argument("config key 'params' must be an object");
  for (const auto& [key, value] : params.items()) {
    if (!value.is_number()) {
      throw std::invalid_argument("model parameter '" + key + "' must be numeric");
    }
    const double v = value.get<double>();
    if (cfg.model == ModelKind::stochastic_volatility) {
      if (key == "a") cfg.sv.a = v;
      else if (key == "b") cfg.sv.b = v;
      else if (key == "sigma") cfg.sv.sigma = v;
      else throw std::invalid_argument("unknown SV parameter '" + key + "'");
    } else {
      if (key == "a") cfg.lg.a = v;
      else if (key == "b") cfg.lg.b = v;
      else if (key == "sigma_u") cfg.lg.sigma_u = v;
      else if (key == "sigma_v") cfg.lg.sigma_v = v;
      else throw std::invalid_argument("unknown linear Gaussian parameter '" + key + "'");
    }
  }
}

std::string policy_to_string(const ExperimentConfig& cfg) { return cfg.policy_spec; }

}  // namespace

ResamplingPolicy parse_policy(const std::string& spec) {
  if (spec == "always") return ResamplingPolicy::always();
  if (spec.rfind("ess:", 0) == 0) {
    double alpha = 0.0;
    try {
      alpha = std::stod(spec.substr(4));
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed ESS threshold in '" + spec + "'");
    }
    return ResamplingPolicy::ess_threshold(alpha);
  }
  if (spec.rfind("schedule:", 0) == 0) {
    return ResamplingPolicy::fixed_schedule(read_schedule_csv(spec.substr(9)));
  }
  throw std::invalid_argument("unknown resampling policy '" + spec + "'");
}

EstimatorSelection parse_estimators(const std::vector<std::string>& names) {
  EstimatorSelection sel;
  sel.alvar = false;
  for (const auto& name : names) {
    if (name == "alvar" || name == "alvar_adaptive") {
      sel.alvar = true;
    } else if (name == "cle") {
      sel.cle = true;
    } else if (name.rfind("fixed_lag:", 0) == 0) {
      try {
        std::size_t used = 0;
        const auto text = name.substr(10);
        const long long lag = std::stoll(text, &used);
        if (lag < 0 || used != text.size()) throw std::invalid_argument(name);
        sel.fixed_lags.push_back(static_cast<std::size_t>(lag));
      } catch (const std::exception&) {
        throw std::invalid_argument("malformed estimator '" + name + "'");
      }
    } else {
      throw std::invalid_argument("unknown estimator '" + name + "'");
    }
  }
  return sel;
}

double apply_test_function(TestFunction f, double x) {
  return f == TestFunction::square ? x * x : x;
}

void ExperimentConfig::validate() const {
  if (particles < 1) throw std::invalid_argument("particles must be positive");
  if (checkpoint_stride < 1) throw std::invalid_argument("checkpoint_stride must be positive");
  if (lag_cap && *lag_cap < 1) throw std::invalid_argument("lag_cap must be positive");
  if (!(quantile > 0.0)) throw std::invalid_argument("quantile must be positive");
  for (auto n : particle_counts) {
    if (n < 1) throw std::invalid_argument("particle_counts entries must be positive");
  }
  if (model == ModelKind::stochastic_volatility) sv.validate();
  else lg.validate();
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  ExperimentConfig cfg;
  if (doc.contains("model")) {
    const auto m = get_as<std::string>(doc, "model");
    if (m == "sv") cfg.model = ModelKind::stochastic_volatility;
    else if (m == "lg") cfg.model = ModelKind::linear_gaussian;
    else throw std::invalid_argument("unknown model '" + m + "'");
  }
  if (doc.contains("params")) read_params(doc.at("params"), cfg);
  if (doc.contains("observations")) cfg.observations_path = get_as<std::string>(doc, "observations");
  if (doc.contains("particles")) cfg.particles = get_count(doc, "particles");
  if (doc.contains("steps")) cfg.steps = get_count(doc, "steps");
  if (doc.contains("replicates")) cfg.replicates = get_count(doc, "replicates");
  if (doc.contains("reference_replicates")) {
    cfg.reference_replicates = get_count(doc, "reference_replicates");
  }
  if (doc.contains("estimators")) {
    cfg.estimators = parse_estimators(get_as<std::vector<std::string>>(doc, "estimators"));
  }
  if (doc.contains("resampling")) {
    cfg.policy_spec = get_as<std::string>(doc, "resampling");
    cfg.policy = parse_policy(cfg.policy_spec);
  }
  if (doc.contains("test_function")) {
    const auto f = get_as<std::string>(doc, "test_function");
    if (f == "id") cfg.test_function = TestFunction::identity;
    else if (f == "square") cfg.test_function = TestFunction::square;
    else throw std::invalid_argument("unknown test function '" + f + "'");
  }
  if (doc.contains("seed")) cfg.seed = get_as<std::uint64_t>(doc, "seed");
  if (doc.contains("out")) cfg.out_dir = get_as<std::string>(doc, "out");
  if (doc.contains("checkpoint_stride")) cfg.checkpoint_stride = get_count(doc, "checkpoint_stride");
  if (doc.contains("lag_cap") && !doc.at("lag_cap").is_null()) {
    cfg.lag_cap = get_count(doc, "lag_cap");
  }
  if (doc.contains("particle_counts")) {
    cfg.particle_counts = get_as<std::vector<std::size_t>>(doc, "particle_counts");
  }
  if (doc.contains("burn_in")) cfg.burn_in = get_count(doc, "burn_in");
  if (doc.contains("max_lag")) cfg.max_lag = get_count(doc, "max_lag");
  if (doc.contains("quantile")) cfg.quantile = get_as<double>(doc, "quantile");
  if (doc.contains("threads")) cfg.threads = get_count(doc, "threads");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed config file " + path + ": " + e.what());
  }
  return parse_config(doc);
}

json ExperimentConfig::to_json() const {
  json j;
  j["model"] = model == ModelKind::stochastic_volatility ? "sv" : "lg";
  if (model == ModelKind::stochastic_volatility) {
    j["params"] = {{"a", sv.a}, {"b", sv.b}, {"sigma", sv.sigma}};
  } else {
    j["params"] = {{"a", lg.a}, {"b", lg.b}, {"sigma_u", lg.sigma_u}, {"sigma_v", lg.sigma_v}};
  }
  if (!observations_path.empty()) j["observations"] = observations_path;
  j["particles"] = particles;
  j["steps"] = steps;
  j["replicates"] = replicates;
  j["reference_replicates"] = reference_replicates;
  std::vector<std::string> names;
  if (estimators.alvar) names.emplace_back("alvar");
  if (estimators.cle) names.emplace_back("cle");
  for (auto l : estimators.fixed_lags) names.push_back("fixed_lag:" + std::to_string(l));
  j["estimators"] = names;
  j["resampling"] = policy_to_string(*this);
  j["test_function"] = test_function == TestFunction::identity ? "id" : "square";
  j["seed"] = seed;
  j["out"] = out_dir;
  j["checkpoint_stride"] = checkpoint_stride;
  j["lag_cap"] = lag_cap ? json(*lag_cap) : json(nullptr);
  j["particle_counts"] = particle_counts;
  j["burn_in"] = burn_in;
  j["max_lag"] = max_lag;
  j["quantile"] = quantile;
  j["threads"] = threads;
  return j;
}

}  // namespace alvar::harness
