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

#ifndef MMDEST_ROBUSTNESS_HPP_
#define MMDEST_ROBUSTNESS_HPP_

#include <cmath>
#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmdest/generators.hpp"
#include "mmdest/kernels.hpp"
#include "mmdest/latent.hpp"
#include "mmdest/optim.hpp"
#include "mmdest/parallel.hpp"

namespace mmdest {

enum class ContaminationMode { deterministic_count, bernoulli };

inline std::string_view to_string(ContaminationMode m) {
  return m == ContaminationMode::bernoulli ? "bernoulli" : "deterministic-count";
}
inline ContaminationMode contamination_mode_from_string(std::string_view s) {
  if (s == "deterministic-count") return ContaminationMode::deterministic_count;
  if (s == "bernoulli") return ContaminationMode::bernoulli;
  throw std::invalid_argument("unknown contamination mode '" + std::string(s) + "'");
}

struct ContaminationSpec {
  double epsilon = 0.0;
  Eigen::VectorXd z;
  ContaminationMode mode = ContaminationMode::deterministic_count;
};

namespace detail {

// rows to replace, shared by the Dirac and simulator variants
inline std::vector<Index> contaminated_rows(Index m, double eps, ContaminationMode mode, std::uint64_t seed) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("contaminate: epsilon must lie in [0,1]");
  std::vector<Index> rows;
  if (mode == ContaminationMode::deterministic_count) {
    const Index k = static_cast<Index>(std::floor(eps * static_cast<double>(m)));
    rows = sample_without_replacement(m, k, seed, 0);
  } else {
    const CounterRng rng(seed, 0);
    for (Index i = 0; i < m; ++i)
      if (rng.uniform(static_cast<std::uint64_t>(i)) < eps) rows.push_back(i);
  }
  return rows;
}

}  // namespace detail

inline SampleSet contaminate(const SampleSet& data, const ContaminationSpec& spec, std::uint64_t seed) {
  if (spec.z.size() != data.cols()) throw std::invalid_argument("contaminate: z has the wrong dimension");
  SampleSet out = data;
  for (Index i : detail::contaminated_rows(data.rows(), spec.epsilon, spec.mode, seed))
    out.row(i) = spec.z.transpose();
  return out;
}

// replaced rows are drawn from the model at theta_corrupt instead of a fixed point
template <Generator G>
SampleSet contaminate_with_simulator(const SampleSet& data, double eps, ContaminationMode mode, const G& model,
                                     const ParamVec& theta_corrupt, std::uint64_t seed) {
  if (model.data_dim() != data.cols())
    throw std::invalid_argument("contaminate_with_simulator: model dimension mismatch");
  SampleSet out = data;
  const auto rows = detail::contaminated_rows(data.rows(), eps, mode, seed);
  if (rows.empty()) return out;
  const SampleSet sims =
      model.simulate(theta_corrupt, model.sample_latent(static_cast<Index>(rows.size()), seed, 1));
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) = sims.row(static_cast<Index>(i));
  return out;
}

// Everything needed to generate clean data and fit it.
struct FitSetup {
  KernelSpec kernel;
  GeneratorModel model;
  ParamVec theta_star;
  ParamVec theta0;
  FitConfig fit;
  Index m = 1000;
  ContaminationMode mode = ContaminationMode::deterministic_count;
};

struct SweepRow {
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  Eigen::VectorXd theta_hat;
  double l1_error = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // non-empty when the fit failed
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string kind;  // "dirac" or "epsilon"
};

// stream used for the clean data of a seed
inline constexpr std::uint64_t kDataStream = std::uint64_t{1} << 50;

inline SampleSet clean_data(const FitSetup& setup, std::uint64_t seed) {
  return setup.model.simulate(setup.theta_star, setup.model.sample_latent(setup.m, seed, kDataStream));
}

namespace detail {

inline SweepRow sweep_cell(const FitSetup& setup, const SampleSet& clean, double eps, const Eigen::VectorXd& z,
                           std::uint64_t seed, double value) {
  SweepRow row;
  row.sweep_value = value;
  row.seed = seed;
  try {
    const SampleSet data = contaminate(clean, {eps, z, setup.mode}, seed);
    FitConfig cfg = setup.fit;
    cfg.seed = seed;
    const FitTrace tr = fit(setup.kernel, setup.model, data, setup.theta0, cfg);
    row.theta_hat = tr.theta_hat;
    row.l1_error = (tr.theta_hat - setup.theta_star).lpNorm<1>();
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

template <class Cell>
SweepResult run_sweep(std::size_t n_values, const std::vector<std::uint64_t>& seeds, const FitSetup& setup,
                      Cell&& cell, const char* kind) {
  std::vector<SampleSet> clean;
  for (auto seed : seeds) clean.push_back(clean_data(setup, seed));
  SweepResult out;
  out.kind = kind;
  out.rows.resize(n_values * seeds.size());
  parallel_for(static_cast<long>(out.rows.size()), [&](long t) {
    const std::size_t v = static_cast<std::size_t>(t) / seeds.size();
    const std::size_t s = static_cast<std::size_t>(t) % seeds.size();
    out.rows[static_cast<std::size_t>(t)] = cell(v, seeds[s], clean[s]);
  });
  return out;
}

}  // namespace detail

// For each z and seed: contaminate the seed's clean data with eps mass at z, fit, record the l1 error.
inline SweepResult sweep_dirac(const std::vector<Eigen::VectorXd>& z_grid, double eps, const FitSetup& setup,
                               const std::vector<std::uint64_t>& seeds) {
  return detail::run_sweep(
      z_grid.size(), seeds, setup,
      [&](std::size_t v, std::uint64_t seed, const SampleSet& clean) {
        return detail::sweep_cell(setup, clean, eps, z_grid[v], seed, z_grid[v][0]);
      },
      "dirac");
}

inline SweepResult sweep_epsilon(const std::vector<double>& eps_grid, const Eigen::VectorXd& z,
                                 const FitSetup& setup, const std::vector<std::uint64_t>& seeds) {
  return detail::run_sweep(
      eps_grid.size(), seeds, setup,
      [&](std::size_t v, std::uint64_t seed, const SampleSet& clean) {
        return detail::sweep_cell(setup, clean, eps_grid[v], z, seed, eps_grid[v]);
      },
      "epsilon");
}

}  // namespace mmdest

#endif  // MMDEST_ROBUSTNESS_HPP_
