#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctfgo/harness.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const auto config = ctfgo::ScenarioConfig::from_json(read_file(config_path));
  const auto dataset = ctfgo::simulate(config);
  const std::string dir = ctfgo::resolve_output_dir(out_dir);
  ctfgo::save_dataset(dataset, dir);
  long nlos = 0, total = 0;
  for (const auto& e : dataset.epochs)
    for (const auto& o : e.observations) {
      ++total;
      nlos += o.los_truth.value_or(true) ? 0 : 1;
    }
  std::cout << "wrote " << dataset.epochs.size() << " epochs, " << total
            << " observations (" << nlos << " NLOS) to " << dir << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  auto config = ctfgo::RunConfig::from_json(read_file(config_path));
  if (!out_dir.empty()) config.output_dir = out_dir;
  const auto report = ctfgo::run(config);
  std::cout << report.to_json() << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& config_paths,
                const std::string& out_dir) {
  std::vector<ctfgo::RunConfig> configs;
  for (const auto& p : config_paths)
    configs.push_back(ctfgo::RunConfig::from_json(read_file(p)));
  const auto cmp = ctfgo::compare(configs);
  std::cout << cmp.to_text();
  if (!out_dir.empty()) {
    const std::string dir = ctfgo::resolve_output_dir(out_dir);
    fs::create_directories(dir);
    write_file(fs::path(dir) / "comparison.csv", cmp.to_csv());
    write_file(fs::path(dir) / "comparison.txt", cmp.to_text());
    std::cout << "wrote comparison to " << dir << "\n";
  }
  return 0;
}

int cmd_export_density(const std::string& run_dir, double lo, double hi,
                       int points) {
  int written = 0;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("gmm_snapshots", 0) != 0 || entry.path().extension() != ".csv")
      continue;
    const auto snapshots = ctfgo::snapshots_from_csv(read_file(entry.path().string()));
    if (snapshots.empty()) continue;
    std::string out_name = "density" + name.substr(std::string("gmm_snapshots").size());
    write_file(entry.path().parent_path() / out_name,
               ctfgo::export_density(snapshots, lo, hi, points));
    ++written;
  }
  if (written == 0)
    throw std::runtime_error("no gmm_snapshots*.csv found in " + run_dir);
  std::cout << "wrote " << written << " density file(s) in " << run_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time GNSS/odometry fusion harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir, run_dir;
  std::vector<std::string> config_paths;
  double grid_lo = 0.0, grid_hi = 0.0;
  int grid_points = 401;

  auto* sim = app.add_subcommand("simulate", "Generate a scenario dataset");
  sim->add_option("config", config_path, "Scenario config (JSON)")->required();
  sim->add_option("-o,--output", out_dir, "Output directory")->required();

  auto* runc = app.add_subcommand("run", "Run the estimator on a scenario");
  runc->add_option("config", config_path, "Run config (JSON)")->required();
  runc->add_option("-o,--output", out_dir, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Compare noise treatments");
  cmp->add_option("configs", config_paths, "Run configs (JSON)")->required();
  cmp->add_option("-o,--output", out_dir, "Output directory");

  auto* dens = app.add_subcommand("export-density",
                                  "Export mixture densities from a run");
  dens->add_option("run_dir", run_dir, "Run output directory")->required();
  dens->add_option("--lo", grid_lo, "Grid lower bound (meters)");
  dens->add_option("--hi", grid_hi, "Grid upper bound (meters)");
  dens->add_option("--points", grid_points, "Grid point count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir);
    if (runc->parsed()) return cmd_run(config_path, out_dir);
    if (cmp->parsed()) return cmd_compare(config_paths, out_dir);
    if (dens->parsed())
      return cmd_export_density(run_dir, grid_lo, grid_hi, grid_points);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
