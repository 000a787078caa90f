#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "besim/config.hpp"
#include "besim/error.hpp"
#include "besim/runner.hpp"

namespace {

int fail(const std::exception& e, const std::filesystem::path* out_dir) {
  const std::string text = besim::error_json(e);
  std::cerr << text << "\n";
  if (out_dir && std::filesystem::is_directory(*out_dir)) {
    std::ofstream f(*out_dir / "error.json");
    f << text << "\n";
  }
  if (const auto* be = dynamic_cast<const besim::Error*>(&e))
    return be->kind() == besim::ErrorKind::configuration ? 2 : 3;
  return 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic pseudo-spectral Beris-Edwards Q-tensor / Navier-Stokes simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string resume;
  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config file")->required()->check(CLI::ExistingFile);
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides [io] out_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "random seed (overrides [io] seed)");
  auto* resume_opt = run->add_option("--resume", resume, "checkpoint to resume a single run from")
                         ->check(CLI::ExistingFile);

  std::string check_path;
  auto* check = app.add_subcommand("check", "parse and validate a config file");
  check->add_option("config", check_path, "config file")->required()->check(CLI::ExistingFile);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "print the summary JSON of an output directory");
  report->add_option("out_dir", report_dir, "output directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  if (*check) {
    try {
      const besim::RunConfig cfg = besim::load_config(check_path);
      std::cout << "ok: " << besim::to_string(cfg.experiment) << " on " << cfg.dims[0] << "x" << cfg.dims[1]
                << "x" << cfg.dims[2] << ", t_end = " << cfg.t_end << "\n";
      return 0;
    } catch (const std::exception& e) {
      return fail(e, nullptr);
    }
  }
  if (*report) {
    try {
      std::cout << besim::summarize(report_dir);
      return 0;
    } catch (const std::exception& e) {
      return fail(e, nullptr);
    }
  }

  std::filesystem::path target;
  try {
    const besim::RunConfig cfg = besim::load_config(config_path);
    target = *out_opt ? std::filesystem::path(out_dir) : std::filesystem::path(cfg.out_dir);
    besim::RunOptions opt;
    if (*out_opt) opt.out_dir = out_dir;
    if (*seed_opt) opt.seed = seed;
    if (*resume_opt) opt.resume = resume;
    opt.workers = besim::workers_from_env();
    const auto dir = besim::run(cfg, opt);
    std::cout << besim::summarize(dir);
    return 0;
  } catch (const std::exception& e) {
    return fail(e, target.empty() ? nullptr : &target);
  }
}
