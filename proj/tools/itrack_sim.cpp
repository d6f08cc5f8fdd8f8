// Command-line front end: run a scenario, sweep speeds, or replay a trace.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "itrack/scenario_gen.hpp"
#include "itrack/simulator.hpp"

namespace {

std::string runBaseName(const itrack::RunSummary &s) {
  std::ostringstream os;
  os << s.name << (s.intention_blind ? "_blind" : "_aware") << "_seed"
     << s.seed;
  return os.str();
}

itrack::RunResult runOnce(itrack::ScenarioConfig cfg, const std::string &out,
                          bool verbose) {
  itrack::Scenario scenario = itrack::buildScenario(std::move(cfg));
  itrack::RunResult result =
      itrack::runScenario(scenario, verbose ? &std::cerr : nullptr);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    const std::string base = out + "/" + runBaseName(result.summary);
    itrack::writeTrace(base + ".trace.csv", result.rows);
    itrack::writeSummary(base + ".summary.txt", result.summary);
  }
  return result;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"intention-aware aerial tracking simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, ablation, trace_path, speeds_arg;
  std::uint64_t seed = 0;
  bool have_seed = false, verbose = false, want_summary = false;
  int repeats = 1;

  CLI::App *run = app.add_subcommand("run", "simulate one scenario");
  run->add_option("config", config_path, "scenario config file")->required();
  run->add_option("--seed", seed, "override the scenario seed")
      ->each([&](const std::string &) { have_seed = true; });
  run->add_option("--ablation", ablation,
                  "on = intention-blind, off = intention-aware");
  run->add_option("--out", out_dir, "directory for trace + summary files");
  run->add_flag("--verbose", verbose, "per-replan log on stderr");

  CLI::App *sweep = app.add_subcommand("sweep", "repeat over target speeds");
  sweep->add_option("config", config_path, "scenario config file")->required();
  sweep->add_option("--speeds", speeds_arg, "comma-separated speeds, m/s")
      ->required();
  sweep->add_option("--repeats", repeats, "seeds per speed")->required();
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI::App *replay = app.add_subcommand("replay", "recompute trace metrics");
  replay->add_option("trace", trace_path, "trace CSV file")->required();
  replay->add_flag("--summary", want_summary, "print row-derived metrics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      itrack::ScenarioConfig cfg = itrack::loadScenarioConfig(config_path);
      if (have_seed) cfg.seed = seed;
      if (!ablation.empty()) {
        if (ablation == "on") cfg.intention_blind = true;
        else if (ablation == "off") cfg.intention_blind = false;
        else throw std::runtime_error("--ablation expects on|off");
      }
      const itrack::RunResult result = runOnce(std::move(cfg), out_dir, verbose);
      itrack::printSummary(std::cout, result.summary);
      return 0;
    }

    if (sweep->parsed()) {
      const itrack::ScenarioConfig base = itrack::loadScenarioConfig(config_path);
      std::vector<double> speeds;
      {
        std::stringstream ss(speeds_arg);
        std::string item;
        while (std::getline(ss, item, ',')) speeds.push_back(std::stod(item));
      }
      if (speeds.empty()) throw std::runtime_error("--speeds is empty");
      if (repeats < 1) throw std::runtime_error("--repeats must be >= 1");

      std::filesystem::create_directories(out_dir);
      std::ofstream agg(out_dir + "/sweep.txt");
      std::map<double, std::pair<double, double>> mean_occ;  // speed -> (aware, blind)
      for (std::size_t si = 0; si < speeds.size(); ++si) {
        for (int rep = 0; rep < repeats; ++rep) {
          double occ[2] = {0.0, 0.0};
          for (const bool blind : {false, true}) {
            itrack::ScenarioConfig cfg = base;
            cfg.target.speed = speeds[si];
            cfg.seed = base.seed + 977 * si + static_cast<std::uint64_t>(rep);
            cfg.intention_blind = blind;
            const itrack::RunResult r = runOnce(std::move(cfg), out_dir, false);
            occ[blind ? 1 : 0] = r.summary.occlusion_fraction;
          }
          std::ostringstream line;
          line << "speed=" << speeds[si] << " rep=" << rep
               << " aware_occlusion=" << occ[0]
               << " blind_occlusion=" << occ[1];
          agg << line.str() << "\n";
          std::cout << line.str() << "\n";
          mean_occ[speeds[si]].first += occ[0] / repeats;
          mean_occ[speeds[si]].second += occ[1] / repeats;
        }
      }
      for (const auto &[spd, m] : mean_occ) {
        std::ostringstream line;
        line << "speed=" << spd << " mean_aware=" << m.first
             << " mean_blind=" << m.second;
        agg << line.str() << "\n";
        std::cout << line.str() << "\n";
      }
      return 0;
    }

    if (replay->parsed()) {
      const std::vector<itrack::TraceRow> rows = itrack::readTrace(trace_path);
      if (want_summary) {
        itrack::RunSummary s = itrack::summarizeRows(rows);
        s.name = std::filesystem::path(trace_path).stem().string();
        itrack::printSummary(std::cout, s);
      } else {
        std::cout << "rows: " << rows.size() << "\n";
      }
      return 0;
    }
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
