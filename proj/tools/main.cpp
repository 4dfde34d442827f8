// shuntbound command line: generate, solve, cross-check and benchmark
// shunting-yard routing instances.
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "shuntbound/generator.hpp"
#include "shuntbound/io.hpp"
#include "shuntbound/model.hpp"
#include "shuntbound/oracle.hpp"
#include "shuntbound/solver.hpp"

namespace {

using namespace shuntbound;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeout = 3;

ModeFlags parse_mode(const std::string& spec) {
  ModeFlags m;
  std::stringstream ss(spec);
  std::string flag;
  while (std::getline(ss, flag, ',')) {
    if (flag == "matching")
      m.matching = true;
    else if (flag == "directions")
      m.directions = true;
    else if (flag == "services")
      m.services = true;
    else if (flag == "timed")
      m.timed = true;
    else if (!flag.empty())
      throw std::runtime_error("unknown mode flag \"" + flag + "\"");
  }
  return m;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_file(out_path, j.dump(2) + "\n");
}

int status_exit(Status s) {
  switch (s) {
    case Status::Optimal: return kExitOk;
    case Status::Infeasible: return kExitInfeasible;
    case Status::Timeout: return kExitTimeout;
  }
  return kExitUsage;
}

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << *v;
  return os.str();
}

int run_gen(uint64_t seed, const GenParams& params, const std::string& out) {
  Instance inst = generate_instance(seed, params);
  emit(instance_to_json(inst), out);
  return kExitOk;
}

int run_solve(const std::string& instance_path, const std::string& out,
              const std::string& solution_out, std::optional<double> budget,
              std::optional<double> bound, int level, const std::string& mode_spec,
              bool no_timing) {
  Instance inst = load_instance(instance_path);
  if (!mode_spec.empty()) {
    inst.mode = parse_mode(mode_spec);
    inst.finalize();
  }
  if (level >= 0) inst = relax_instance(inst, level);
  auto report = validate_instance(inst);
  if (!report.ok()) {
    std::cerr << report.summary();
    return kExitUsage;
  }
  SolveConfig cfg;
  cfg.budget_seconds = budget;
  cfg.bound = bound;
  Outcome outcome = solve(inst, cfg);
  emit(outcome_to_json(inst, outcome, !no_timing), out);
  if (!solution_out.empty() && outcome.status == Status::Optimal)
    write_file(solution_out, solution_to_json(inst, outcome.solution).dump(2) + "\n");
  return status_exit(outcome.status);
}

int run_oracle(const std::string& instance_path, const std::string& out, int level,
               bool no_timing) {
  Instance inst = load_instance(instance_path);
  if (level >= 0) inst = relax_instance(inst, level);
  auto report = validate_instance(inst);
  if (!report.ok()) {
    std::cerr << report.summary();
    return kExitUsage;
  }
  Outcome outcome = brute_force(inst);
  emit(outcome_to_json(inst, outcome, !no_timing), out);
  return status_exit(outcome.status);
}

int run_validate(const std::string& instance_path, const std::string& solution_path, int level,
                 const std::string& mode_spec) {
  Instance inst = load_instance(instance_path);
  if (!mode_spec.empty()) {
    inst.mode = parse_mode(mode_spec);
    inst.finalize();
  }
  if (level >= 0) inst = relax_instance(inst, level);
  auto report = validate_instance(inst);
  std::cout << report.summary();
  if (!report.ok()) return kExitInfeasible;
  if (solution_path.empty()) return kExitOk;
  auto paths = load_solution(inst, solution_path);
  auto sol = validate_solution(inst, paths);
  if (!sol.pass()) {
    for (const auto& v : sol.violations) std::cout << "violation: " << v << "\n";
    return kExitInfeasible;
  }
  std::cout << "solution valid, cost " << sol.recomputed_cost << "\n";
  return kExitOk;
}

int run_bench(const std::string& suite_dir, const std::string& out_csv,
              std::optional<double> budget, uint64_t seed) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(suite_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .json instances in " + suite_dir);

  struct Task {
    std::string file;
    int level;
  };
  std::vector<Task> tasks;
  for (const auto& f : files)
    for (int level = 0; level < kRelaxLevels; ++level) tasks.push_back({f, level});

  int threads = 4;
  if (const char* env = std::getenv("SHUNTBOUND_THREADS")) threads = std::max(1, atoi(env));
  threads = std::min<int>(threads, (int)tasks.size());

  std::vector<std::string> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next.fetch_add(1); k < tasks.size(); k = next.fetch_add(1)) {
      const Task& t = tasks[k];
      Instance inst = relax_instance(load_instance(t.file), t.level);
      SolveConfig cfg;
      cfg.budget_seconds = budget;
      Outcome o = solve(inst, cfg);
      std::ostringstream row;
      row << inst.name << ',' << t.level << ',' << inst.mode.matching << ','
          << inst.mode.directions << ',' << inst.mode.services << ',' << inst.mode.timed << ','
          << to_string(o.status) << ',' << num(o.cost) << ',' << num(o.lower_bound) << ','
          << (o.stats.high_level_expanded + o.stats.low_level_expanded) << ','
          << o.stats.runtime_ms << ',' << seed;
      rows[k] = row.str();
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ostringstream csv;
  csv << "instance,level,matching,directions,services,timed,status,cost,lower_bound,"
         "nodes_expanded,runtime_ms,seed\n";
  for (const auto& r : rows) csv << r << "\n";
  if (out_csv.empty())
    std::cout << csv.str();
  else
    write_file(out_csv, csv.str());
  return kExitOk;
}

int run_dump(const std::string& instance_path) {
  Instance inst = load_instance(instance_path);
  std::cout << inst.graph.dump();
  std::cout << "agents " << inst.agents.size() << ", goals " << inst.goals.size() << ", horizon "
            << inst.horizon << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal routing bounds for shunting yards"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  GenParams params;
  std::string out, instance_path, solution_path, mode_spec, suite_dir;
  std::optional<double> budget, bound;
  int level = -1;
  bool no_timing = false;
  bool classic = false, no_directions = false, staggered = false;

  auto* gen = app.add_subcommand("gen", "generate a pseudo-random instance");
  gen->add_option("--seed", seed, "generator seed")->capture_default_str();
  gen->add_option("--tracks", params.n_tracks, "number of locations")->capture_default_str();
  gen->add_option("--agents", params.n_agents, "number of train units")->capture_default_str();
  gen->add_option("--types", params.n_types, "number of unit types")->capture_default_str();
  gen->add_option("--tasks", params.tasks_per_agent, "service tasks per unit")
      ->capture_default_str();
  gen->add_option("--horizon", params.horizon, "planning horizon")->capture_default_str();
  gen->add_flag("--classic", classic, "fixed per-agent goals, untimed");
  gen->add_flag("--no-directions", no_directions, "skip the direction split");
  gen->add_flag("--staggered", staggered, "spread arrivals/departures over the horizon");
  gen->add_option("--out", out, "output file (default stdout)");

  auto* solve_cmd = app.add_subcommand("solve", "optimal search on an instance");
  solve_cmd->add_option("--instance", instance_path, "instance file")->required();
  solve_cmd->add_option("--out", out, "outcome file (default stdout)");
  solve_cmd->add_option("--solution", solution_path, "also write the solution here");
  solve_cmd->add_option("--budget", budget, "time budget in seconds");
  solve_cmd->add_option("--bound", bound, "decision mode: is the optimum <= bound?");
  solve_cmd->add_option("--level", level, "relaxation level 0..3 (default: as-is)");
  solve_cmd->add_option("--mode", mode_spec, "override mode flags, e.g. matching,timed");
  solve_cmd->add_flag("--no-timing", no_timing, "zero runtime_ms for reproducible bytes");
  solve_cmd->add_option("--seed", seed, "accepted for interface symmetry; unused");

  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive ground truth (tiny instances)");
  oracle_cmd->add_option("--instance", instance_path, "instance file")->required();
  oracle_cmd->add_option("--out", out, "outcome file (default stdout)");
  oracle_cmd->add_option("--level", level, "relaxation level 0..3 (default: as-is)");
  oracle_cmd->add_flag("--no-timing", no_timing, "zero runtime_ms for reproducible bytes");
  oracle_cmd->add_option("--seed", seed, "accepted for interface symmetry; unused");

  auto* validate_cmd = app.add_subcommand("validate", "check an instance and optional solution");
  validate_cmd->add_option("--instance", instance_path, "instance file")->required();
  validate_cmd->add_option("--solution", solution_path, "solution file");
  validate_cmd->add_option("--level", level, "check against this relaxation level, as solve did");
  validate_cmd->add_option("--mode", mode_spec, "override mode flags, as solve did");
  validate_cmd->add_option("--seed", seed, "accepted for interface symmetry; unused");

  auto* bench_cmd = app.add_subcommand("bench", "solve a suite across all relaxation levels");
  bench_cmd->add_option("--suite", suite_dir, "directory of instance .json files")->required();
  bench_cmd->add_option("--out", out, "CSV file (default stdout)");
  bench_cmd->add_option("--budget", budget, "per-solve budget in seconds");
  bench_cmd->add_option("--seed", seed, "echoed into the CSV seed column");

  auto* dump_cmd = app.add_subcommand("dump", "print the location graph of an instance");
  dump_cmd->add_option("--instance", instance_path, "instance file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      if (level >= 0) throw std::runtime_error("--level applies to solve/oracle");
      params.directions = !no_directions;
      params.with_classic_goals = classic;
      params.staggered_times = staggered;
      return run_gen(seed, params, out);
    }
    if (solve_cmd->parsed())
      return run_solve(instance_path, out, solution_path, budget, bound, level, mode_spec,
                       no_timing);
    if (oracle_cmd->parsed()) return run_oracle(instance_path, out, level, no_timing);
    if (validate_cmd->parsed())
      return run_validate(instance_path, solution_path, level, mode_spec);
    if (bench_cmd->parsed()) return run_bench(suite_dir, out, budget, seed);
    if (dump_cmd->parsed()) return run_dump(instance_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
