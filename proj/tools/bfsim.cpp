// bfsim: command-line driver for trajectories, steady solves, regularity
// sweeps and the verification experiments.
//
// Exit codes: 0 success or passing verdict, 1 numerical failure or failing
// verdict, 2 configuration or usage error.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bf/config.hpp"
#include "bf/dynamics.hpp"
#include "bf/steady.hpp"
#include "bf/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace bf;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  if (!os) throw NumericalFailure("cannot write " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

struct Run {
  std::string command;
  std::string config_path;
  fs::path out;
  int jobs = 1;
  std::string started = utc_now();
  std::optional<config::JobSpec> job;
};

void write_manifest(const Run& run, int code, const std::string& status, const std::string& message) {
  if (run.out.empty()) return;
  fs::create_directories(run.out);
  std::vector<std::string> files{"manifest.json"};
  for (const auto& e : fs::recursive_directory_iterator(run.out))
    if (e.is_regular_file()) {
      const std::string rel = fs::relative(e.path(), run.out).generic_string();
      if (rel != "manifest.json") files.push_back(rel);
    }
  std::sort(files.begin(), files.end());
  json m;
  m["command"] = run.command;
  m["config_path"] = run.config_path;
  json echo = json::object();
  if (run.job)
    for (const auto& [k, v] : config::echo_map(*run.job)) echo[k] = v;
  m["config_echo"] = echo;
  m["output_dir"] = run.out.string();
  m["jobs"] = run.jobs;
  m["started"] = run.started;
  m["finished"] = utc_now();
  m["exit_status"] = code;
  m["status"] = status;
  if (!message.empty()) m["message"] = message;
  m["artifacts"] = files;
  write_json(run.out / "manifest.json", m);
}

int simulate(const config::JobSpec& job, const fs::path& out) {
  std::ofstream csv(out / "trajectory.csv", std::ios::binary);
  dynamics::RunOptions o;
  o.csv_sink = &csv;
  const auto log = dynamics::run_trajectory(job.sim, o);
  checkpoint::save((out / "final.bfld").string(), log.final_state);
  return 0;
}

int steady_solve(const config::JobSpec& job, const fs::path& out) {
  const auto& s = job.sim;
  auto grid = make_grid(s.grid.dim, s.grid.n, s.grid.length);
  const auto g = fields::make_forcing(grid, s.forcing);
  steady::SteadyOptions o;
  o.method = job.steady_method;
  o.tol = job.steady_tol;
  if (s.init.kind != InitKind::zero) o.initial = fields::make_initial(grid, s.init);
  const auto sol = steady::solve_steady(g, s.model, s.convective, o);
  json j;
  j["method"] = steady::to_string(sol.method);
  j["iterations"] = sol.iterations;
  j["residual"] = sol.residual;
  j["assembled_residual"] = steady::assembled_residual(sol.w, sol.p, g, s.model, s.convective);
  j["g_l2"] = spectral::sobolev_norm(g, 0.0);
  j["w_l2"] = spectral::sobolev_norm(sol.w, 0.0);
  j["w_h1"] = spectral::sobolev_norm(sol.w, 1.0);
  j["w_h2"] = spectral::sobolev_norm(sol.w, 2.0);
  j["p_l2"] = spectral::sobolev_norm(sol.p, 0.0);
  j["p_h1"] = spectral::sobolev_norm(sol.p, 1.0);
  write_json(out / "steady.json", j);
  checkpoint::save((out / "w.bfld").string(), sol.w);
  return 0;
}

int sweep(const config::JobSpec& job, const fs::path& out) {
  const auto& s = job.sim;
  auto grid = make_grid(s.grid.dim, s.grid.n, s.grid.length);
  ForcingSpec unit = s.forcing;
  unit.amplitude = 1.0;
  if (unit.kind == ForcingKind::zero) throw ConfigError("sweep needs a nonzero forcing.kind", "forcing.kind");
  steady::SteadyOptions o;
  o.method = job.steady_method;
  o.tol = job.steady_tol;
  const auto table = steady::regularity_sweep(fields::make_forcing(grid, unit), job.sweep_amplitudes, s.model,
                                              s.convective, o);
  {
    std::ofstream csv(out / "sweep.csv", std::ios::binary);
    steady::write_csv(csv, table);
  }
  bool all = true;
  for (const auto& r : table.rows) all = all && r.converged;
  json j;
  j["slope"] = table.slope;
  j["slope_points"] = table.slope_points;
  j["energy_constant"] = table.energy_constant;
  j["q"] = s.model.q();
  j["all_converged"] = all;
  j["evidence_csv"] = "sweep.csv";
  write_json(out / "sweep.json", j);
  return all ? 0 : 1;
}

int report(const verify::VerdictReport& rep, const fs::path& out) {
  for (const auto& e : rep.evidence) write_text(out / e.file, e.csv);
  write_json(out / "verdict.json", rep.to_json());
  return rep.pass() ? 0 : 1;
}

int run_verify(const std::string& experiment, const config::JobSpec& job, const fs::path& out) {
  const auto& s = job.sim;
  const auto& vo = job.verify;
  if (experiment == "energy") return report(verify::verify_energy(s, vo), out);
  if (experiment == "lipschitz") return report(verify::verify_lipschitz(s, vo), out);
  if (experiment == "smoothing") return report(verify::verify_smoothing(s, vo), out);
  if (experiment == "lyapunov") return report(verify::verify_lyapunov(s, vo), out);
  if (experiment == "negnorm") return report(verify::verify_negative_norm(s, vo), out);
  return report(verify::verify_convective(s, vo), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brinkman-Forchheimer pseudo-spectral solver and estimate checks"};
  app.require_subcommand(1);
  std::string config_path, out_dir, experiment;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "Configuration file");
  app.add_option("--out", out_dir, "Output directory (overrides the 'out' key)");
  app.add_option("--jobs", jobs, "Maximum concurrent runs")->check(CLI::PositiveNumber);
  app.add_option("--seed-override", seed, "Replace every seed in the configuration");

  auto* sim = app.add_subcommand("simulate", "Run a trajectory");
  auto* st = app.add_subcommand("steady", "Solve the stationary problem");
  auto* sw = app.add_subcommand("sweep", "Steady regularity sweep over forcing amplitudes");
  auto* ver = app.add_subcommand("verify", "Run a verification experiment");
  ver->add_option("experiment", experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"energy", "lipschitz", "smoothing", "lyapunov", "negnorm", "convective"}));
  auto* orc = app.add_subcommand("oracle-check", "Compare the stepper with the reduced Galerkin oracle");
  for (auto* sub : {sim, st, sw, ver, orc}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  Run run;
  run.config_path = config_path;
  run.out = out_dir;
  run.jobs = jobs;
  config::Command cmd = config::Command::simulate;
  if (st->parsed()) cmd = config::Command::steady;
  if (sw->parsed()) cmd = config::Command::sweep;
  if (ver->parsed()) cmd = config::Command::verify;
  if (orc->parsed()) cmd = config::Command::oracle_check;
  run.command = config::to_string(cmd);
  if (cmd == config::Command::verify) run.command += " " + experiment;

  int code = 0;
  std::string status = "ok", message;
  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream is(config_path, std::ios::binary);
      if (!is) throw ConfigError("cannot read config file " + config_path, "--config");
      std::ostringstream ss;
      ss << is.rdbuf();
      text = ss.str();
    }
    config::JobSpec job = config::parse_config(text, cmd);
    if (seed) config::override_seeds(job, *seed);
    if (!out_dir.empty()) job.out = out_dir;
    if (job.out.empty()) throw ConfigError("no output directory: pass --out or set out", "out");
    run.out = job.out;
    run.job = job;
    fs::create_directories(run.out);

    switch (cmd) {
      case config::Command::simulate: code = simulate(job, run.out); break;
      case config::Command::steady: code = steady_solve(job, run.out); break;
      case config::Command::sweep: code = sweep(job, run.out); break;
      case config::Command::verify: code = run_verify(experiment, job, run.out); break;
      case config::Command::oracle_check: code = report(verify::oracle_check(job.sim, job.oracle), run.out); break;
    }
    if (code != 0) status = cmd == config::Command::sweep ? "numerical_failure" : "verdict_fail";
  } catch (const ConfigError& e) {
    code = 2;
    status = "config_error";
    message = e.what();
    std::cerr << "config error [" << e.key() << "]: " << e.what() << "\n";
  } catch (const NumericalFailure& e) {
    code = 1;
    status = "numerical_failure";
    message = e.what();
    std::cerr << "numerical failure: " << e.what() << "\n";
  } catch (const std::exception& e) {
    code = 1;
    status = "error";
    message = e.what();
    std::cerr << "error: " << e.what() << "\n";
  }
  try {
    write_manifest(run, code, status, message);
  } catch (const std::exception& e) {
    std::cerr << "cannot write manifest: " << e.what() << "\n";
    if (code == 0) code = 1;
  }
  if (code == 0) std::cout << run.command << ": ok\n";
  else if (status == "verdict_fail") std::cout << run.command << ": FAIL\n";
  return code;
}
