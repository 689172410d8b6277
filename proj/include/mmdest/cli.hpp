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

#ifndef MMDEST_CLI_HPP_
#define MMDEST_CLI_HPP_

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mmdest/check.hpp"
#include "mmdest/config.hpp"
#include "mmdest/mmd.hpp"
#include "mmdest/optim.hpp"
#include "mmdest/parallel.hpp"
#include "mmdest/robustness.hpp"
#include "mmdest/theory.hpp"

namespace mmdest {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// shortest text that reads back to the same double
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string to_csv(const CsvTable& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.parent_path() / (path.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

// Numeric CSV with a header row.
inline SampleSet read_data_csv(const std::string& path, Index expected_cols) {
  std::ifstream in(path);
  if (!in) throw ConfigError("field 'data.file': cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("field 'data.file': '" + path + "' is empty");
  std::vector<double> vals;
  Index rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Index cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": '" + cell + "' is not a number");
      }
      ++cols;
    }
    if (cols != expected_cols)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(expected_cols) +
                        " columns, found " + std::to_string(cols));
    ++rows;
  }
  if (rows < 2) throw ConfigError("field 'data.file': need at least 2 rows");
  return Eigen::Map<const SampleSet>(vals.data(), rows, expected_cols);
}

struct RunOutput {
  CsvTable table;
  Json result = Json::object();
  bool ok = true;  // false: ran to completion but a check failed
  std::string message;
};

namespace detail {

inline std::vector<std::string> theta_header(const char* prefix, Index p) {
  std::vector<std::string> h;
  for (Index i = 1; i <= p; ++i) h.push_back(std::string(prefix) + std::to_string(i));
  return h;
}

inline SampleSet observed_data(const RunConfig& c, const GeneratorModel& model) {
  if (!c.data.file.empty()) return read_data_csv(c.data.file, model.data_dim());
  return model.simulate(*c.theta_star, model.sample_latent(c.data.m, c.seed, kDataStream));
}

inline RunOutput run_fit(const RunConfig& c) {
  const GeneratorModel model = build_model(*c.model);
  const SampleSet data = observed_data(c, model);
  if (c.fit.minibatch > data.rows()) throw ConfigError("field 'fit.minibatch': larger than the data set");
  const KernelSpec kernel = c.kernel->resolve(data, c.seed);
  const FitTrace tr = fit(kernel, model, data, *c.theta0, c.fit);

  RunOutput out;
  const Index p = model.param_dim();
  out.table.header = {"k"};
  for (auto& h : theta_header("theta_", p)) out.table.header.push_back(h);
  for (const char* h : {"eta", "grad_norm", "loss", "rejected"}) out.table.header.push_back(h);
  for (const FitRecord& r : tr.records) {
    std::vector<std::string> row{std::to_string(r.k)};
    for (Index i = 0; i < p; ++i) row.push_back(fmt(r.theta[i]));
    for (double v : {r.eta, r.grad_norm, r.loss}) row.push_back(fmt(v));
    row.push_back(std::to_string(r.rejected));
    out.table.rows.push_back(std::move(row));
  }
  out.result["theta_hat"] = to_json(tr.theta_hat);
  out.result["termination"] = tr.termination;
  out.result["lengthscale"] = kernel.lengthscale();
  return out;
}

inline RunOutput run_landscape(const RunConfig& c) {
  const GeneratorModel model = build_model(*c.model);
  const SampleSet data = observed_data(c, model);
  const auto& L = c.landscape;
  RunOutput out;
  out.table.header = {"lengthscale", "theta", "loss"};
  const std::size_t nt = L.theta.size();
  for (std::size_t g = 0; g < L.lengthscales.size(); ++g) {
    const KernelSpec kernel = c.kernel->with_lengthscale(L.lengthscales[g]);
    const LatentDraws u = model.sample_latent(L.n, c.seed, g);
    std::vector<double> loss(nt);
    parallel_for(static_cast<long>(nt), [&](long t) {
      ParamVec th = *c.theta_star;
      th[L.index] = L.theta[static_cast<std::size_t>(t)];
      try {
        loss[static_cast<std::size_t>(t)] = mmd2_uu(kernel, model.simulate(th, u), data);
      } catch (const DomainError&) {
        loss[static_cast<std::size_t>(t)] = std::numeric_limits<double>::quiet_NaN();
      }
    });
    for (std::size_t t = 0; t < nt; ++t) out.table.rows.push_back({fmt(L.lengthscales[g]), fmt(L.theta[t]), fmt(loss[t])});
  }
  return out;
}

inline RunOutput run_variance(const RunConfig& c) {
  const auto& v = c.variance;
  RunOutput out;
  out.table.header = {"model", "d", "l", "variance"};
  for (double d : v.d) {
    if (v.model == "mixture") {
      out.table.rows.push_back({v.model, fmt(d), "nan", fmt(mix_asym_variance(v.l, v.weights, v.sigma, d))});
      continue;
    }
    const std::vector<double> ls = v.l_exponent ? std::vector<double>{v.l_scale * std::pow(d, *v.l_exponent)} : v.l;
    for (double l : ls) {
      const double var = v.model == "location" ? loc_asym_variance(l, v.sigma, d) : scale_asym_variance(l, v.theta, d);
      out.table.rows.push_back({v.model, fmt(d), fmt(l), fmt(var)});
    }
  }
  return out;
}

inline RunOutput run_influence(const RunConfig& c) {
  const auto& v = c.influence;
  RunOutput out;
  out.table.header = {"z", "influence"};
  const Index d = static_cast<Index>(v.d);
  const ParamVec theta = ParamVec::Constant(d, v.theta);
  for (double z : v.z) {
    ParamVec zv = theta;
    zv[0] = z;  // displaced along the first axis
    double val = 0.0;
    if (v.model == "location") val = loc_influence(v.l, v.sigma, v.d, theta, zv)[0];
    else if (v.model == "mixture") val = mix_influence(v.lengthscales, v.weights, v.sigma, v.d, theta, zv)[0];
    else val = scale_influence(v.l, v.theta, v.d, z);
    out.table.rows.push_back({fmt(z), fmt(val)});
  }
  if (v.model == "location") out.result["gross_sensitivity"] = loc_gross_sensitivity(v.l, v.sigma, v.d);
  if (v.model == "scale") out.result["gross_sensitivity"] = scale_gross_sensitivity(v.l, v.theta, v.d);
  return out;
}

inline RunOutput run_robustness(const RunConfig& c) {
  const auto& r = c.robustness;
  FitSetup setup{c.kernel->spec, build_model(*c.model), *c.theta_star, *c.theta0, c.fit, c.data.m, r.mode};
  if (c.kernel->median) setup.kernel = c.kernel->resolve(clean_data(setup, r.seeds.front()), c.seed);
  const Index p = setup.model.param_dim(), dd = setup.model.data_dim();
  SweepResult res;
  if (r.sweep == "dirac") {
    std::vector<Eigen::VectorXd> zs;
    for (double z : r.grid) zs.push_back(Eigen::VectorXd::Constant(dd, z));
    res = sweep_dirac(zs, r.epsilon, setup, r.seeds);
  } else {
    const Eigen::VectorXd z = r.z.size() == 1 ? Eigen::VectorXd::Constant(dd, r.z[0])
                                              : Eigen::Map<const Eigen::VectorXd>(r.z.data(), dd).eval();
    res = sweep_epsilon(r.grid, z, setup, r.seeds);
  }
  RunOutput out;
  out.table.header = {"sweep_value", "seed"};
  for (auto& h : theta_header("theta_hat_", p)) out.table.header.push_back(h);
  out.table.header.push_back("l1_error");
  int failed = 0;
  for (const SweepRow& row : res.rows) {
    std::vector<std::string> cells{fmt(row.sweep_value), std::to_string(row.seed)};
    for (Index i = 0; i < p; ++i) cells.push_back(row.error.empty() ? fmt(row.theta_hat[i]) : "nan");
    cells.push_back(fmt(row.l1_error));
    out.table.rows.push_back(std::move(cells));
    if (!row.error.empty()) {
      ++failed;
      std::cerr << "warning: fit failed at sweep value " << fmt(row.sweep_value) << ", seed " << row.seed << ": "
                << row.error << "\n";
    }
  }
  out.result["failed_rows"] = failed;
  out.result["lengthscale"] = setup.kernel.lengthscale();
  return out;
}

inline RunOutput run_gradcheck(const RunConfig& c) {
  const auto& g = c.gradcheck;
  RunOutput out;
  out.table.header = {"family", "kernel", "lengthscale", "trials", "max_rel_error", "tolerance", "pass"};
  for (ModelFamily fam : g.families) {
    ModelConfig mc;
    if (c.model && c.model->family == fam) mc = *c.model;
    else mc.family = fam;
    const GeneratorModel model = build_model(mc);
    double l = 0.0;
    if (g.lengthscale) {
      l = *g.lengthscale;
    } else {
      const ParamVec th = random_theta(model, c.seed, 0);
      l = median_heuristic(model.simulate(th, model.sample_latent(200, c.seed, 3)));
    }
    for (KernelFamily kf : g.kernels) {
      const KernelSpec kernel(kf, l);
      const GradCheckResult res = gradcheck(kernel, model, g.trials, g.n, c.seed);
      out.table.rows.push_back({std::string(to_string(fam)), std::string(to_string(kf)), fmt(l),
                                std::to_string(res.trials), fmt(res.max_rel_error), fmt(res.tolerance),
                                res.passed() ? "true" : "false"});
      if (!res.passed()) {
        out.ok = false;
        out.message += std::string(to_string(fam)) + "/" + std::string(to_string(kf)) + " exceeds tolerance; ";
      }
    }
  }
  return out;
}

inline RunOutput run_godambe(const RunConfig& c) {
  const GeneratorModel model = build_model(*c.model);
  KernelSpec kernel = c.kernel->spec;
  if (c.kernel->median)
    kernel = c.kernel->resolve(model.simulate(*c.theta_star, model.sample_latent(2000, c.seed, 3)), c.seed);
  const GodambeEstimate est = godambe_mc(kernel, model, *c.theta_star, c.godambe.n_outer, c.godambe.n_inner, c.seed);
  RunOutput out;
  out.table.header = {"quantity", "i", "j", "value"};
  auto emit = [&](const char* name, const Eigen::MatrixXd& m) {
    for (Index i = 0; i < m.rows(); ++i)
      for (Index j = 0; j < m.cols(); ++j)
        out.table.rows.push_back({name, std::to_string(i + 1), std::to_string(j + 1), fmt(m(i, j))});
  };
  emit("g", est.g);
  emit("sigma", est.sigma);
  emit("c", est.c);
  emit("mbar", est.mbar);
  // closed forms hold for single gaussian kernels of either amplitude
  const bool gaussian = kernel.family() == KernelFamily::gaussian_density || kernel.family() == KernelFamily::gaussian_rbf;
  if (gaussian && c.model->family == ModelFamily::gaussian_location)
    out.result["closed_form_c"] = loc_asym_variance(kernel.lengthscale(), c.model->sigma, static_cast<double>(c.model->dim));
  if (gaussian && c.model->family == ModelFamily::gaussian_scale)
    out.result["closed_form_c"] = scale_asym_variance(kernel.lengthscale(), (*c.theta_star)[0], static_cast<double>(c.model->dim));
  return out;
}

}  // namespace detail

inline RunOutput execute(const RunConfig& c) {
  const std::string& cmd = c.command;
  if (cmd == "fit") return detail::run_fit(c);
  if (cmd == "landscape") return detail::run_landscape(c);
  if (cmd == "variance") return detail::run_variance(c);
  if (cmd == "influence") return detail::run_influence(c);
  if (cmd == "robustness") return detail::run_robustness(c);
  if (cmd == "gradcheck") return detail::run_gradcheck(c);
  if (cmd == "godambe") return detail::run_godambe(c);
  throw ConfigError("unknown command '" + cmd + "'");
}

// Runs the command and writes <out_dir>/<command>.csv plus its manifest.
inline RunOutput run(const RunConfig& c, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory '" + out_dir.string() + "'");
  RunOutput out = execute(c);
  const std::string name = c.command + ".csv";
  write_atomic(out_dir / name, to_csv(out.table));
  Json manifest = resolved_json(c);
  manifest["manifest"] = {{"csv", name}, {"result", out.result}};
  write_atomic(out_dir / (name + ".manifest.json"), manifest.dump(2) + "\n");
  return out;
}

}  // namespace mmdest

#endif  // MMDEST_CLI_HPP_
