// Copyright 2026 The mmdest Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMDEST_CONFIG_HPP_
#define MMDEST_CONFIG_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmdest/generators.hpp"
#include "mmdest/kernels.hpp"
#include "mmdest/optim.hpp"
#include "mmdest/robustness.hpp"

namespace mmdest {

using Json = nlohmann::ordered_json;

// Invalid configuration; the message names the offending field or line.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Typed access to one JSON object; remembers which keys were read.
class Fields {
 public:
  Fields(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail("", "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(key, "is required");
    return j_.at(key);
  }

  Fields sub(const std::string& key) { return Fields(raw(key), name(key)); }

  double num(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double def) { return has(key) ? num(key) : (used_.insert(key), def); }

  double positive(const std::string& key, double def) {
    const double v = num(key, def);
    if (!(v > 0.0) || !std::isfinite(v)) fail(key, "must be a positive number");
    return v;
  }

  std::int64_t integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const std::string& key, std::int64_t def) {
    return has(key) ? integer(key) : (used_.insert(key), def);
  }
  std::int64_t integer_at_least(const std::string& key, std::int64_t def, std::int64_t lo) {
    const auto v = integer(key, def);
    if (v < lo) fail(key, "must be >= " + std::to_string(lo));
    return v;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t def) {
    if (!has(key)) return used_.insert(key), def;
    const Json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(key, "expected a nonnegative integer");
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return used_.insert(key), def;
    const Json& v = raw(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& def) {
    return has(key) ? str(key) : (used_.insert(key), def);
  }

  std::vector<double> numbers(const std::string& key) {
    const Json& v = raw(key);
    std::vector<double> out;
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array() || v.empty()) fail(key, "expected a non-empty array of numbers");
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected a non-empty array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    return has(key) ? numbers(key) : (used_.insert(key), def);
  }

  ParamVec vec(const std::string& key) {
    const auto v = numbers(key);
    return Eigen::Map<const ParamVec>(v.data(), static_cast<Index>(v.size()));
  }

  // {"lo": a, "hi": b, "count": n} or an explicit array
  std::vector<double> grid(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_object()) return numbers(key);
    Fields g(v, name(key));
    const double lo = g.num("lo"), hi = g.num("hi");
    const auto count = g.integer_at_least("count", 2, 1);
    g.finish();
    if (!(hi >= lo)) fail(key, "needs hi >= lo");
    std::vector<double> out;
    for (std::int64_t i = 0; i < count; ++i)
      out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return out;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) throw ConfigError("field '" + name(k) + "': unknown key");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : key.empty() ? path_ : path_ + "." + key; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("field '" + name(key) + "': " + what);
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline Json to_json(const ParamVec& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Json to_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

}  // namespace detail

// ---- model ----

struct ModelConfig {
  ModelFamily family = ModelFamily::gaussian_location;
  Index dim = 1;
  double sigma = 1.0;
  Index horizon = 100;
  std::array<double, 3> rates{5.0, 0.025, 6.0};
  double dt = 0.0;  // 0: family default
  std::vector<double> times = ObservationGrid::equispaced(1.0, 10);
  double eps = 0.1;
  double x0 = 1.0, y0 = 0.0;
};

inline double default_dt(const ModelConfig& c) {
  switch (c.family) {
    case ModelFamily::lotka_volterra: return 1e-3;
    case ModelFamily::multiscale_sde: return MultiscaleSde::default_dt(c.eps);
    case ModelFamily::coarse_sde: return 1e-2;
    default: return 0.0;
  }
}

inline GeneratorModel build_model(const ModelConfig& c) {
  const double dt = c.dt > 0.0 ? c.dt : default_dt(c);
  switch (c.family) {
    case ModelFamily::gaussian_location: return GaussianLocation(c.dim, c.sigma);
    case ModelFamily::gaussian_scale: return GaussianScale(c.dim);
    case ModelFamily::g_and_k: return GAndK();
    case ModelFamily::stoch_vol: return StochVol(c.horizon);
    case ModelFamily::lotka_volterra: return LotkaVolterra(c.rates, dt, c.times);
    case ModelFamily::multiscale_sde: return MultiscaleSde(c.eps, dt, c.times, c.x0, c.y0);
    case ModelFamily::coarse_sde: return CoarseSde(dt, c.times, c.x0);
  }
  throw std::logic_error("build_model: unhandled family");
}

inline ModelConfig parse_model(detail::Fields f) {
  ModelConfig c;
  const std::string fam = f.str("family");
  try {
    c.family = model_family_from_string(fam);
  } catch (const std::invalid_argument& e) {
    f.fail("family", e.what());
  }
  switch (c.family) {
    case ModelFamily::gaussian_location:
      c.dim = f.integer_at_least("dim", 1, 1);
      c.sigma = f.positive("sigma", 1.0);
      break;
    case ModelFamily::gaussian_scale: c.dim = f.integer_at_least("dim", 1, 1); break;
    case ModelFamily::g_and_k: break;
    case ModelFamily::stoch_vol: c.horizon = f.integer_at_least("T", 100, 1); break;
    case ModelFamily::lotka_volterra: {
      const auto r = f.numbers("rates", {5.0, 0.025, 6.0});
      if (r.size() != 3) f.fail("rates", "expected 3 numbers");
      std::copy(r.begin(), r.end(), c.rates.begin());
      c.dt = f.positive("dt", 1e-3);
      c.times = f.numbers("times", c.times);
      break;
    }
    case ModelFamily::multiscale_sde:
      c.eps = f.positive("eps", 0.1);
      c.dt = f.positive("dt", MultiscaleSde::default_dt(c.eps));
      c.times = f.numbers("times", c.times);
      c.x0 = f.num("x0", 1.0);
      c.y0 = f.num("y0", 0.0);
      break;
    case ModelFamily::coarse_sde:
      c.dt = f.positive("dt", 1e-2);
      c.times = f.numbers("times", c.times);
      c.x0 = f.num("x0", 1.0);
      break;
  }
  f.finish();
  try {
    (void)build_model(c);
  } catch (const std::invalid_argument& e) {
    f.fail("", e.what());
  }
  return c;
}

inline Json to_json(const ModelConfig& c) {
  Json j;
  j["family"] = std::string(to_string(c.family));
  switch (c.family) {
    case ModelFamily::gaussian_location:
      j["dim"] = c.dim;
      j["sigma"] = c.sigma;
      break;
    case ModelFamily::gaussian_scale: j["dim"] = c.dim; break;
    case ModelFamily::g_and_k: break;
    case ModelFamily::stoch_vol: j["T"] = c.horizon; break;
    case ModelFamily::lotka_volterra:
      j["rates"] = {c.rates[0], c.rates[1], c.rates[2]};
      j["dt"] = c.dt;
      j["times"] = detail::to_json(c.times);
      break;
    case ModelFamily::multiscale_sde:
      j["eps"] = c.eps;
      j["dt"] = c.dt;
      j["times"] = detail::to_json(c.times);
      j["x0"] = c.x0;
      j["y0"] = c.y0;
      break;
    case ModelFamily::coarse_sde:
      j["dt"] = c.dt;
      j["times"] = detail::to_json(c.times);
      j["x0"] = c.x0;
      break;
  }
  return j;
}

// ---- kernel ----

// A KernelSpec whose lengthscale may be deferred to the median heuristic of the data.
struct KernelConfig {
  KernelSpec spec;
  bool median = false;

  KernelSpec resolve(const SampleSet& data, std::uint64_t seed) const {
    if (!median) return spec;
    return with_lengthscale(median_heuristic(data, seed));
  }

  // same family (and beta) with lengthscale l; not defined for mixtures
  KernelSpec with_lengthscale(double l) const {
    if (spec.family() == KernelFamily::mixture)
      throw ConfigError("field 'kernel.lengthscale': a mixture needs explicit lengthscales");
    return KernelSpec(spec.family(), l, spec.components().front().beta);
  }
};

inline KernelConfig parse_kernel(detail::Fields f) {
  KernelConfig k;
  const std::string fam = f.str("family");
  KernelFamily family;
  try {
    family = kernel_family_from_string(fam);
  } catch (const std::invalid_argument& e) {
    f.fail("family", e.what());
  }
  const double beta = f.positive("beta", 0.5);
  std::vector<double> ls{1.0};
  if (f.has("lengthscale") && f.raw("lengthscale").is_string()) {
    if (f.str("lengthscale") != "median") f.fail("lengthscale", "expected numbers or \"median\"");
    if (family == KernelFamily::mixture) f.fail("lengthscale", "a mixture needs explicit lengthscales");
    k.median = true;
  } else {
    ls = f.numbers("lengthscale", {1.0});
  }
  try {
    if (family == KernelFamily::mixture) {
      const auto w = f.numbers("weights");
      std::vector<KernelComponent> comps;
      std::vector<std::string> names(ls.size(), "gaussian-density");
      if (f.has("components")) {
        const Json& c = f.raw("components");
        if (!c.is_array()) f.fail("components", "expected an array of family names");
        names.clear();
        for (const auto& e : c) {
          if (!e.is_string()) f.fail("components", "expected an array of family names");
          names.push_back(e.get<std::string>());
        }
      }
      if (names.size() != ls.size() || w.size() != ls.size())
        f.fail("", "lengthscale, weights and components must have the same length");
      for (std::size_t s = 0; s < ls.size(); ++s)
        comps.push_back({kernel_family_from_string(names[s]), ls[s], beta});
      k.spec = KernelSpec::mixture(std::move(comps), w);
    } else {
      if (ls.size() != 1) f.fail("lengthscale", "expected a single lengthscale");
      if (f.has("weights")) f.fail("weights", "only valid for mixtures");
      k.spec = KernelSpec(family, ls[0], beta);
    }
  } catch (const std::invalid_argument& e) {
    f.fail("", e.what());
  }
  f.finish();
  return k;
}

inline Json to_json(const KernelConfig& k) {
  Json j;
  const KernelSpec& s = k.spec;
  j["family"] = std::string(to_string(s.family()));
  if (k.median) {
    j["lengthscale"] = "median";
  } else {
    Json ls = Json::array();
    for (const auto& c : s.components()) ls.push_back(c.lengthscale);
    j["lengthscale"] = ls;
  }
  if (s.family() == KernelFamily::mixture) {
    j["weights"] = detail::to_json(s.weights());
    Json names = Json::array();
    for (const auto& c : s.components()) names.push_back(std::string(to_string(c.family)));
    j["components"] = names;
  }
  j["beta"] = s.components().front().beta;
  return j;
}

// ---- fit ----

inline FitConfig parse_fit(detail::Fields f) {
  FitConfig c;
  c.iterations = f.integer_at_least("iterations", c.iterations, 1);
  c.n_sim = f.integer_at_least("n_sim", c.n_sim, 2);
  c.minibatch = f.integer_at_least("minibatch", c.minibatch, 0);
  try {
    c.schedule = schedule_kind_from_string(f.str("schedule", "constant"));
  } catch (const std::invalid_argument& e) {
    f.fail("schedule", e.what());
  }
  try {
    c.method = fit_method_from_string(f.str("method", "natural-sgd"));
  } catch (const std::invalid_argument& e) {
    f.fail("method", e.what());
  }
  c.eta0 = f.positive("eta0", c.eta0);
  c.exponent = f.positive("exponent", c.exponent);
  c.ridge = f.num("ridge", c.ridge);
  if (!(c.ridge >= 0.0)) f.fail("ridge", "must be >= 0");
  c.grad_tol = f.num("grad_tol", c.grad_tol);
  if (!(c.grad_tol >= 0.0)) f.fail("grad_tol", "must be >= 0");
  c.frozen_draws = f.flag("frozen_draws", c.frozen_draws);
  c.average_tail = f.num("average_tail", c.average_tail);
  if (!(c.average_tail >= 0.0 && c.average_tail <= 1.0)) f.fail("average_tail", "must lie in [0,1]");
  c.record_loss = f.flag("record_loss", c.record_loss);
  if (f.has("lower")) c.lower = f.vec("lower");
  if (f.has("upper")) c.upper = f.vec("upper");
  c.max_halvings = static_cast<int>(f.integer_at_least("max_halvings", c.max_halvings, 0));
  f.finish();
  return c;
}

inline Json to_json(const FitConfig& c) {
  Json j;
  j["iterations"] = c.iterations;
  j["n_sim"] = c.n_sim;
  j["minibatch"] = c.minibatch;
  j["schedule"] = std::string(to_string(c.schedule));
  j["eta0"] = c.eta0;
  j["exponent"] = c.exponent;
  j["method"] = std::string(to_string(c.method));
  j["ridge"] = c.ridge;
  j["grad_tol"] = c.grad_tol;
  j["frozen_draws"] = c.frozen_draws;
  j["average_tail"] = c.average_tail;
  j["record_loss"] = c.record_loss;
  if (c.lower) j["lower"] = detail::to_json(*c.lower);
  if (c.upper) j["upper"] = detail::to_json(*c.upper);
  j["max_halvings"] = c.max_halvings;
  return j;
}

// ---- command sections ----

struct DataConfig {
  Index m = 1000;
  std::string file;  // CSV with a header row; overrides simulation from theta_star
};

struct LandscapeConfig {
  Index index = 0;
  Json theta_source;
  std::vector<double> theta;
  std::vector<double> lengthscales;
  Index n = 1000;
};

struct VarianceConfig {
  std::string model = "location";  // location, scale, mixture
  double sigma = 1.0;
  double theta = 0.0;
  std::vector<double> d{1.0};
  std::vector<double> l{1.0};
  std::optional<double> l_exponent;  // l = l_scale * d^l_exponent instead of the l grid
  double l_scale = 1.0;
  std::vector<double> weights;  // mixture: l are the component lengthscales
};

struct InfluenceConfig {
  std::string model = "location";
  double l = 1.0, sigma = 1.0, theta = 0.0, d = 1.0;
  Json z_source;
  std::vector<double> z;
  std::vector<double> lengthscales, weights;  // mixture
};

struct RobustnessConfig {
  std::string sweep = "dirac";  // dirac, epsilon
  double epsilon = 0.2;         // dirac
  Json grid_source;
  std::vector<double> grid;     // z values (dirac) or epsilons (epsilon)
  std::vector<double> z{10.0};  // epsilon sweep location
  std::vector<std::uint64_t> seeds;
  ContaminationMode mode = ContaminationMode::deterministic_count;
};

struct GradcheckConfig {
  std::vector<ModelFamily> families;
  std::vector<KernelFamily> kernels{KernelFamily::gaussian_rbf, KernelFamily::gaussian_density, KernelFamily::imq};
  std::optional<double> lengthscale;  // empty: median heuristic per family
  int trials = 10;
  Index n = 20;
};

struct GodambeConfig {
  Index n_outer = 2000, n_inner = 2000;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"fit", "landscape", "variance", "influence",
                                              "robustness", "gradcheck", "godambe"};
  return names;
}

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::optional<ModelConfig> model;
  std::optional<KernelConfig> kernel;
  std::optional<ParamVec> theta_star, theta0;
  DataConfig data;
  FitConfig fit;
  LandscapeConfig landscape;
  VarianceConfig variance;
  InfluenceConfig influence;
  RobustnessConfig robustness;
  GradcheckConfig gradcheck;
  GodambeConfig godambe;
};

namespace detail {

inline const std::vector<std::string>& sections_for(const std::string& cmd) {
  static const std::map<std::string, std::vector<std::string>> m{
      {"fit", {"model", "kernel", "theta_star", "theta0", "data", "fit"}},
      {"landscape", {"model", "kernel", "theta_star", "data", "landscape"}},
      {"variance", {"variance"}},
      {"influence", {"influence"}},
      {"robustness", {"model", "kernel", "theta_star", "theta0", "data", "fit", "robustness"}},
      {"gradcheck", {"model", "gradcheck"}},
      {"godambe", {"model", "kernel", "theta_star", "godambe"}}};
  return m.at(cmd);
}

inline bool uses(const std::string& cmd, const std::string& section) {
  const auto& s = sections_for(cmd);
  return std::find(s.begin(), s.end(), section) != s.end();
}

inline std::string check_theory_model(Fields& f, const std::vector<std::string>& allowed) {
  const std::string m = f.str("model", allowed.front());
  if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) f.fail("model", "unknown model '" + m + "'");
  return m;
}

}  // namespace detail

// Parses and validates a configuration. `command` (from the command line)
// must agree with a "command" field when both are given; relative data
// paths resolve against base_dir.
inline RunConfig parse_config(const Json& j, const std::string& command,
                              const std::filesystem::path& base_dir = {}) {
  using detail::Fields;
  Fields root(j, "");
  RunConfig c;
  c.command = command;
  if (root.has("command")) {
    const std::string in_file = root.str("command");
    if (c.command.empty()) c.command = in_file;
    if (in_file != c.command)
      root.fail("command", "config says '" + in_file + "' but '" + c.command + "' was requested");
  }
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), c.command) == names.end())
    throw ConfigError("unknown command '" + c.command + "'");
  c.seed = root.seed("seed", 0);
  if (root.has("manifest")) (void)root.raw("manifest");  // outputs of an earlier run

  auto need = [&](const std::string& key) {
    if (detail::uses(c.command, key) && !root.has(key)) root.fail(key, "is required by '" + c.command + "'");
  };

  if (root.has("model")) c.model = parse_model(root.sub("model"));
  if (root.has("kernel")) c.kernel = parse_kernel(root.sub("kernel"));
  if (root.has("theta_star")) c.theta_star = root.vec("theta_star");
  if (root.has("theta0")) c.theta0 = root.vec("theta0");
  if (root.has("data")) {
    Fields f = root.sub("data");
    c.data.m = f.integer_at_least("m", c.data.m, 2);
    c.data.file = f.str("file", "");
    f.finish();
    if (!c.data.file.empty()) {
      std::filesystem::path p(c.data.file);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      if (!std::filesystem::exists(p)) throw ConfigError("field 'data.file': no such file '" + p.string() + "'");
      c.data.file = std::filesystem::absolute(p).string();
    }
  }
  if (root.has("fit")) c.fit = parse_fit(root.sub("fit"));
  c.fit.seed = c.seed;

  if (root.has("landscape")) {
    Fields f = root.sub("landscape");
    c.landscape.index = f.integer_at_least("index", 0, 0);
    c.landscape.theta_source = f.has("theta") ? f.raw("theta") : Json{{"lo", -3.0}, {"hi", 3.0}, {"count", 61}};
    c.landscape.theta = Fields(Json{{"theta", c.landscape.theta_source}}, "landscape").grid("theta");
    c.landscape.lengthscales = f.numbers("lengthscales", {1.0});
    for (double l : c.landscape.lengthscales)
      if (!(l > 0.0)) f.fail("lengthscales", "must be positive");
    c.landscape.n = f.integer_at_least("n", 1000, 2);
    f.finish();
  }
  if (root.has("variance")) {
    Fields f = root.sub("variance");
    auto& v = c.variance;
    v.model = detail::check_theory_model(f, {"location", "scale", "mixture"});
    v.sigma = f.positive("sigma", 1.0);
    v.theta = f.num("theta", 0.0);
    v.d = f.numbers("d", {1.0});
    for (double d : v.d)
      if (!(d >= 1.0)) f.fail("d", "dimensions must be >= 1");
    if (f.has("l_exponent")) {
      v.l_exponent = f.num("l_exponent");
      v.l_scale = f.positive("l_scale", 1.0);
    } else {
      v.l = f.numbers("l", {1.0});
      for (double l : v.l)
        if (!(l > 0.0)) f.fail("l", "lengthscales must be positive");
    }
    if (v.model == "mixture") {
      v.weights = f.numbers("weights");
      if (v.weights.size() != v.l.size() || v.l.size() < 2 || v.l_exponent)
        f.fail("weights", "a mixture needs >= 2 lengthscales in 'l' and matching weights");
    }
    f.finish();
  }
  if (root.has("influence")) {
    Fields f = root.sub("influence");
    auto& v = c.influence;
    v.model = detail::check_theory_model(f, {"location", "scale", "mixture"});
    v.sigma = f.positive("sigma", 1.0);
    v.theta = f.num("theta", 0.0);
    v.d = f.num("d", 1.0);
    if (!(v.d >= 1.0)) f.fail("d", "must be >= 1");
    if (v.model == "mixture") {
      v.lengthscales = f.numbers("lengthscales");
      v.weights = f.numbers("weights");
      if (v.lengthscales.size() != v.weights.size() || v.lengthscales.size() < 2)
        f.fail("weights", "a mixture needs >= 2 lengthscales and matching weights");
    } else {
      v.l = f.positive("l", 1.0);
    }
    v.z_source = f.has("z") ? f.raw("z") : Json{{"lo", -10.0}, {"hi", 10.0}, {"count", 201}};
    v.z = Fields(Json{{"z", v.z_source}}, "influence").grid("z");
    f.finish();
  }
  if (root.has("robustness")) {
    Fields f = root.sub("robustness");
    auto& r = c.robustness;
    r.sweep = f.str("sweep", "dirac");
    if (r.sweep != "dirac" && r.sweep != "epsilon") f.fail("sweep", "expected \"dirac\" or \"epsilon\"");
    r.grid_source = f.raw("grid");
    r.grid = Fields(Json{{"grid", r.grid_source}}, "robustness").grid("grid");
    if (r.sweep == "dirac") {
      r.epsilon = f.num("epsilon", 0.2);
      if (!(r.epsilon >= 0.0 && r.epsilon <= 1.0)) f.fail("epsilon", "must lie in [0,1]");
    } else {
      r.z = f.numbers("z", {10.0});
      for (double e : r.grid)
        if (!(e >= 0.0 && e <= 1.0)) f.fail("grid", "epsilons must lie in [0,1]");
    }
    try {
      r.mode = contamination_mode_from_string(f.str("mode", "deterministic-count"));
    } catch (const std::invalid_argument& e) {
      f.fail("mode", e.what());
    }
    if (f.has("seeds")) {
      const Json& s = f.raw("seeds");
      if (!s.is_array() || s.empty()) f.fail("seeds", "expected a non-empty array of seeds");
      for (const auto& e : s) {
        if (!e.is_number_integer() || e.get<std::int64_t>() < 0) f.fail("seeds", "expected nonnegative integers");
        r.seeds.push_back(e.get<std::uint64_t>());
      }
    } else {
      const auto n = f.integer_at_least("n_seeds", 5, 1);
      for (std::int64_t i = 0; i < n; ++i) r.seeds.push_back(c.seed + static_cast<std::uint64_t>(i));
    }
    f.finish();
  }
  if (root.has("gradcheck")) {
    Fields f = root.sub("gradcheck");
    auto& g = c.gradcheck;
    if (f.has("families")) {
      const Json& a = f.raw("families");
      if (!a.is_array() || a.empty()) f.fail("families", "expected a non-empty array of model families");
      for (const auto& e : a) {
        try {
          g.families.push_back(model_family_from_string(e.is_string() ? e.get<std::string>() : ""));
        } catch (const std::invalid_argument& ex) {
          f.fail("families", ex.what());
        }
      }
    }
    if (f.has("kernels")) {
      const Json& a = f.raw("kernels");
      if (!a.is_array() || a.empty()) f.fail("kernels", "expected a non-empty array of kernel families");
      g.kernels.clear();
      for (const auto& e : a) {
        KernelFamily k;
        try {
          k = kernel_family_from_string(e.is_string() ? e.get<std::string>() : "");
        } catch (const std::invalid_argument& ex) {
          f.fail("kernels", ex.what());
        }
        if (k == KernelFamily::mixture || k == KernelFamily::matern12)
          f.fail("kernels", "gradcheck needs a single differentiable kernel family");
        g.kernels.push_back(k);
      }
    }
    if (f.has("lengthscale") && !(f.raw("lengthscale").is_string() && f.str("lengthscale") == "median"))
      g.lengthscale = f.positive("lengthscale", 1.0);
    g.trials = static_cast<int>(f.integer_at_least("trials", 10, 1));
    g.n = f.integer_at_least("n", 20, 2);
    f.finish();
  }
  if (c.gradcheck.families.empty())
    c.gradcheck.families = {ModelFamily::gaussian_location, ModelFamily::gaussian_scale, ModelFamily::g_and_k,
                            ModelFamily::stoch_vol,         ModelFamily::lotka_volterra, ModelFamily::multiscale_sde,
                            ModelFamily::coarse_sde};
  if (root.has("godambe")) {
    Fields f = root.sub("godambe");
    c.godambe.n_outer = f.integer_at_least("n_outer", 2000, 2);
    c.godambe.n_inner = f.integer_at_least("n_inner", 2000, 2);
    f.finish();
  }
  root.finish();

  // cross-field checks for the requested command
  const std::string& cmd = c.command;
  if (cmd == "gradcheck") return c;
  for (const char* key : {"model", "kernel", "theta0"}) need(key);
  if (detail::uses(cmd, "theta_star") && !(cmd == "fit" && !c.data.file.empty())) need("theta_star");
  if (cmd == "robustness") need("robustness");
  if (!c.model) return c;
  const GeneratorModel model = build_model(*c.model);
  const Index p = model.param_dim();
  auto check_theta = [&](const std::optional<ParamVec>& t, const char* key) {
    if (!t || !detail::uses(cmd, key)) return;
    if (t->size() != p)
      throw ConfigError(std::string("field '") + key + "': expected " + std::to_string(p) + " parameters for " +
                        std::string(to_string(c.model->family)));
    try {
      model.check_domain(*t, std::string(key) == "theta0");
    } catch (const DomainError& e) {
      throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
  };
  check_theta(c.theta_star, "theta_star");
  check_theta(c.theta0, "theta0");
  if (c.fit.lower && c.fit.lower->size() != p) throw ConfigError("field 'fit.lower': wrong length");
  if (c.fit.upper && c.fit.upper->size() != p) throw ConfigError("field 'fit.upper': wrong length");
  if (detail::uses(cmd, "fit") && c.fit.minibatch > c.data.m && c.data.file.empty())
    throw ConfigError("field 'fit.minibatch': larger than data.m");
  if (detail::uses(cmd, "kernel") && cmd != "landscape" && c.kernel && !c.kernel->spec.differentiable())
    throw ConfigError("field 'kernel.family': " + cmd + " needs a differentiable kernel");
  if (cmd == "landscape" && c.landscape.index >= p)
    throw ConfigError("field 'landscape.index': model has " + std::to_string(p) + " parameters");
  if (cmd == "robustness" && c.robustness.sweep == "epsilon" && static_cast<Index>(c.robustness.z.size()) != model.data_dim() &&
      c.robustness.z.size() != 1)
    throw ConfigError("field 'robustness.z': expected 1 or " + std::to_string(model.data_dim()) + " values");
  return c;
}

// Parses JSON text; syntax errors report line and column.
inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path.string());
}

// `seed`, when given, replaces the configured seed before validation.
inline RunConfig load_config(const std::filesystem::path& path, const std::string& command,
                             std::optional<std::uint64_t> seed = std::nullopt) {
  Json j = read_json_file(path);
  if (seed && j.is_object()) j["seed"] = *seed;
  return parse_config(j, command, path.parent_path());
}

// The configuration with every default filled in, restricted to the sections the command reads.
inline Json resolved_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  const std::string& cmd = c.command;
  if (c.model && detail::uses(cmd, "model")) j["model"] = to_json(*c.model);
  if (c.kernel && detail::uses(cmd, "kernel")) j["kernel"] = to_json(*c.kernel);
  if (c.theta_star && detail::uses(cmd, "theta_star")) j["theta_star"] = detail::to_json(*c.theta_star);
  if (c.theta0 && detail::uses(cmd, "theta0")) j["theta0"] = detail::to_json(*c.theta0);
  if (detail::uses(cmd, "data")) {
    j["data"]["m"] = c.data.m;
    if (!c.data.file.empty()) j["data"]["file"] = c.data.file;
  }
  if (detail::uses(cmd, "fit")) j["fit"] = to_json(c.fit);
  if (cmd == "landscape") {
    j["landscape"] = {{"index", c.landscape.index},
                      {"theta", c.landscape.theta_source},
                      {"lengthscales", detail::to_json(c.landscape.lengthscales)},
                      {"n", c.landscape.n}};
  } else if (cmd == "variance") {
    const auto& v = c.variance;
    Json s{{"model", v.model}, {"sigma", v.sigma}, {"theta", v.theta}, {"d", detail::to_json(v.d)}};
    if (v.l_exponent) {
      s["l_exponent"] = *v.l_exponent;
      s["l_scale"] = v.l_scale;
    } else {
      s["l"] = detail::to_json(v.l);
    }
    if (v.model == "mixture") s["weights"] = detail::to_json(v.weights);
    j["variance"] = s;
  } else if (cmd == "influence") {
    const auto& v = c.influence;
    Json s{{"model", v.model}, {"sigma", v.sigma}, {"theta", v.theta}, {"d", v.d}};
    if (v.model == "mixture") {
      s["lengthscales"] = detail::to_json(v.lengthscales);
      s["weights"] = detail::to_json(v.weights);
    } else {
      s["l"] = v.l;
    }
    s["z"] = v.z_source;
    j["influence"] = s;
  } else if (cmd == "robustness") {
    const auto& r = c.robustness;
    Json s{{"sweep", r.sweep}, {"grid", r.grid_source}};
    if (r.sweep == "dirac") s["epsilon"] = r.epsilon;
    else s["z"] = detail::to_json(r.z);
    s["mode"] = std::string(to_string(r.mode));
    s["seeds"] = r.seeds;
    j["robustness"] = s;
  } else if (cmd == "gradcheck") {
    const auto& g = c.gradcheck;
    Json fams = Json::array(), kers = Json::array();
    for (auto f : g.families) fams.push_back(std::string(to_string(f)));
    for (auto k : g.kernels) kers.push_back(std::string(to_string(k)));
    j["gradcheck"] = {{"families", fams}, {"kernels", kers}, {"trials", g.trials}, {"n", g.n}};
    if (g.lengthscale) j["gradcheck"]["lengthscale"] = *g.lengthscale;
    else j["gradcheck"]["lengthscale"] = "median";
  } else if (cmd == "godambe") {
    j["godambe"] = {{"n_outer", c.godambe.n_outer}, {"n_inner", c.godambe.n_inner}};
  }
  return j;
}

}  // namespace mmdest

#endif  // MMDEST_CONFIG_HPP_
