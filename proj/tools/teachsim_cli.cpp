// teachsim command-line driver: run, sweep, plot, calibrate.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "teachsim/config.hpp"
#include "teachsim/envs.hpp"
#include "teachsim/experiment.hpp"
#include "teachsim/metrics.hpp"
#include "teachsim/teachers.hpp"

namespace fs = std::filesystem;
using namespace teachsim;

namespace {

constexpr int kExitConfig = 2;
constexpr const char* kDefaultGrid =
    "uniform+disagreement,max_beta+disagreement,max_beta+similarity,max_beta+hybrid";

ExperimentConfig resolve_config(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig config = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + kv + "'");
    set_config_value(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  validate(config);
  return config;
}

struct Combo {
  TeacherStrategy teacher;
  SamplingStrategy sampling;
  std::string name() const {
    return std::string(to_string(teacher)) + "+" + std::string(to_string(sampling));
  }
};

std::vector<Combo> parse_grid(const std::string& text) {
  std::vector<Combo> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto plus = item.find('+');
    if (plus == std::string::npos) throw ConfigError("grid entry '" + item + "' is not teacher+sampling");
    try {
      grid.push_back({parse_teacher_strategy(item.substr(0, plus)),
                      parse_sampling_strategy(item.substr(plus + 1))});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (grid.empty()) throw ConfigError("empty strategy grid");
  return grid;
}

std::vector<RunMetrics> load_seed_runs(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "metrics.csv")) {
      files.push_back(entry.path() / "metrics.csv");
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RunMetrics> runs;
  for (const auto& f : files) runs.push_back(load_csv(f.string()));
  return runs;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            std::uint64_t seed, const std::string& out_dir) {
  const ExperimentConfig config = resolve_config(config_path, overrides);
  const RunOutput run = run_experiment(config, seed);
  write_run(run, out_dir);
  std::cout << "seed " << seed << ": final return "
            << format_double(final_return(run.metrics, config.final_rows)) << " -> " << out_dir
            << "/metrics.csv\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& seeds_text, const std::string& grid_text, const std::string& out_dir) {
  ExperimentConfig config = resolve_config(config_path, overrides);
  if (!seeds_text.empty()) config.seeds = parse_seed_list(seeds_text);
  const auto grid = parse_grid(grid_text);
  fs::create_directories(out_dir);
  std::ofstream summary(fs::path(out_dir) / "summary.csv");
  summary << "strategy,final_return_mean,final_return_stddev,runs\n";
  for (const Combo& combo : grid) {
    ExperimentConfig c = config;
    c.teacher_selection = combo.teacher;
    c.sampling = combo.sampling;
    const fs::path combo_dir = fs::path(out_dir) / combo.name();
    std::vector<RunMetrics> runs;
    std::vector<double> finals;
    for (const std::uint64_t seed : c.seeds) {
      const RunOutput run = run_experiment(c, seed);
      write_run(run, (combo_dir / ("seed_" + std::to_string(seed))).string());
      finals.push_back(final_return(run.metrics, c.final_rows));
      runs.push_back(run.metrics);
      std::cout << combo.name() << " seed " << seed << ": " << format_double(finals.back()) << '\n';
    }
    std::ofstream agg(combo_dir / "aggregate.csv");
    write_aggregate_csv(agg, aggregate(runs));
    summary << combo.name() << ',' << format_double(mean(finals)) << ','
            << format_double(population_stddev(finals)) << ',' << finals.size() << '\n';
    std::cout << combo.name() << ": " << format_double(mean(finals)) << " +/- "
              << format_double(population_stddev(finals)) << '\n';
  }
  return 0;
}

int cmd_plot(const std::string& in_dir, const std::string& out_file) {
  std::vector<PlotSeries> series;
  const fs::path in(in_dir);
  if (fs::exists(in / "metrics.csv")) {
    const RunMetrics run = load_csv((in / "metrics.csv").string());
    series.push_back({in.filename().string(), aggregate(std::span<const RunMetrics>(&run, 1))});
  } else {
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(in)) {
      if (entry.is_directory()) dirs.push_back(entry.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const fs::path& dir : dirs) {
      if (fs::exists(dir / "aggregate.csv")) {
        std::ifstream agg(dir / "aggregate.csv");
        series.push_back({dir.filename().string(), read_aggregate_csv(agg)});
        continue;
      }
      const auto runs = load_seed_runs(dir);
      if (!runs.empty()) series.push_back({dir.filename().string(), aggregate(runs)});
    }
  }
  if (series.empty()) throw std::runtime_error("no metrics found under " + in_dir);
  emit_plot(series, out_file);
  std::cout << "wrote " << out_file << " (" << series.size() << " series)\n";
  return 0;
}

int cmd_calibrate(const std::string& config_path, const std::vector<std::string>& overrides) {
  const ExperimentConfig config = resolve_config(config_path, overrides);
  const EnvSpec spec = make_env(config.env, config.segment_length);
  std::optional<Calibration> cal;
  const TeacherSet teachers = build_teachers(config, spec, &cal);
  if (cal) {
    std::cout << "beta_floor = " << format_double(cal->beta_floor) << '\n'
              << "width = " << format_double(cal->width) << '\n'
              << "min_coverage_beta = " << format_double(cal->min_coverage) << '\n';
  } else {
    std::cout << "width = " << format_double(*config.width) << " (explicit)\n"
              << "min_coverage_beta = "
              << format_double(min_coverage_beta(teachers, spec, kDefaultProbePoints)) << '\n';
  }
  for (const Teacher& t : teachers) {
    std::cout << "teacher " << t.id << " center =";
    for (double c : t.kernel.center()) std::cout << ' ' << format_double(c);
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-teacher preference-learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string seeds_text;
  std::string grid_text = kDefaultGrid;
  std::string in_dir;
  std::string out_file;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI experiment config")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "override a config value, section.key=value");
  };

  CLI::App* run = app.add_subcommand("run", "run one seed");
  add_config(run);
  run->add_option("--seed", seed, "root seed")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "run a strategy grid over several seeds");
  add_config(sweep);
  sweep->add_option("--seeds", seeds_text, "seed list, e.g. 0..9 or 0,2,4");
  sweep->add_option("--grid", grid_text, "teacher+sampling pairs")->capture_default_str();
  sweep->add_option("--out", out_dir, "output directory")->required();

  CLI::App* plot = app.add_subcommand("plot", "plot learning curves as SVG");
  plot->add_option("--in", in_dir, "run or sweep directory")->required()->check(CLI::ExistingDirectory);
  plot->add_option("--out", out_file, "output .svg file")->required();

  CLI::App* calibrate = app.add_subcommand("calibrate", "print the calibrated teacher width");
  add_config(calibrate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, overrides, seed, out_dir);
    if (*sweep) return cmd_sweep(config_path, overrides, seeds_text, grid_text, out_dir);
    if (*plot) return cmd_plot(in_dir, out_file);
    if (*calibrate) return cmd_calibrate(config_path, overrides);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InfeasibleCalibration& e) {
    std::cerr << "calibration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
