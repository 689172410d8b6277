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

// mmdest: command-line front end.
//
//   mmdest <command> --config run.json [--seed N] [--out DIR] [--threads N]
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mmdest/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Minimum MMD estimation for simulator models"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  for (const auto& name : mmdest::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker thread cap (also MMDEST_THREADS)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (threads) mmdest::set_thread_cap(*threads);

  mmdest::RunConfig cfg;
  try {
    cfg = mmdest::load_config(config_path, command, seed);
  } catch (const mmdest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    const auto out = mmdest::run(cfg, out_dir);
    std::cout << "wrote " << (std::filesystem::path(out_dir) / (command + ".csv")).string() << "\n";
    if (!out.result.empty()) std::cout << out.result.dump() << "\n";
    if (!out.ok) {
      std::cerr << "check failed: " << out.message << "\n";
      return 1;
    }
  } catch (const mmdest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
