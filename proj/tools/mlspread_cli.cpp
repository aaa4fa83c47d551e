// mlspread: command-line driver for the coupled virus/awareness simulator.
//
//   mlspread summarize  --network net.txt --contact-layer work
//   mlspread simulate   --network net.txt --contact-layer work --scenario blocking:21 --seed 42
//   mlspread experiment --network net.txt --contact-layer work --blocking-days 7,14,21 --out results/
//
// Settings may also come from a JSON file given with --config; flags win.

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlspread/mlspread.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntheticSpec {
  std::size_t actors = 0;
  std::vector<mlspread::LayerSpec> layers;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string network_path;
  std::optional<SyntheticSpec> synthetic;
  std::string contact_layer;
  std::string name;
  std::vector<std::string> scenarios;
  std::vector<std::uint32_t> blocking_days;
  std::uint32_t horizon = 150;
  double infected_fraction = 0.01;
  double aware_fraction = 0.01;
  mlspread::ParamGrid grid = mlspread::build_param_grid();
  std::size_t reps = 20;
  std::uint64_t seed = 0;
  std::string out = ".";
  unsigned threads = 1;
  mlspread::Aggregation aggregation = mlspread::Aggregation::Flat;
  std::optional<std::size_t> combo;
  std::optional<std::size_t> rep;
};

// "250:contact=0.032,online=0.03"
SyntheticSpec parse_synthetic(const std::string& text) {
  SyntheticSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--synthetic expects N:layer=p[,layer=p...]");
  try {
    spec.actors = std::stoul(text.substr(0, colon));
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("bad synthetic layer '" + item + "'");
      spec.layers.push_back({item.substr(0, eq), std::stod(item.substr(eq + 1))});
    }
  } catch (const std::logic_error&) {
    throw UsageError("cannot parse --synthetic '" + text + "'");
  }
  return spec;
}

// "0.19:0.10,0.22:0.02"
std::vector<mlspread::BasePair> parse_pairs(const std::string& text) {
  std::vector<mlspread::BasePair> pairs;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--pairs expects beta:gamma[,beta:gamma...]");
    try {
      pairs.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    } catch (const std::logic_error&) {
      throw UsageError("cannot parse beta:gamma pair '" + item + "'");
    }
  }
  return pairs;
}

mlspread::Aggregation parse_aggregation(const std::string& text) {
  if (text == "flat") return mlspread::Aggregation::Flat;
  if (text == "combo-mean") return mlspread::Aggregation::ComboMean;
  throw UsageError("unknown aggregation '" + text + "' (flat or combo-mean)");
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (j.contains("network")) cfg.network_path = j.at("network").get<std::string>();
  if (j.contains("contact_layer")) cfg.contact_layer = j.at("contact_layer").get<std::string>();
  if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    SyntheticSpec spec;
    spec.actors = s.at("actors").get<std::size_t>();
    spec.seed = s.value("seed", std::uint64_t{0});
    for (const auto& [name, p] : s.at("layers").items()) spec.layers.push_back({name, p.get<double>()});
    cfg.synthetic = spec;
  }
  if (j.contains("scenarios")) cfg.scenarios = j.at("scenarios").get<std::vector<std::string>>();
  if (j.contains("blocking_days")) cfg.blocking_days = j.at("blocking_days").get<std::vector<std::uint32_t>>();
  if (j.contains("horizon")) cfg.horizon = j.at("horizon").get<std::uint32_t>();
  if (j.contains("infected_seed_fraction")) cfg.infected_fraction = j.at("infected_seed_fraction").get<double>();
  if (j.contains("aware_seed_fraction")) cfg.aware_fraction = j.at("aware_seed_fraction").get<double>();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.contains("pairs")) {
      cfg.grid.base_pairs.clear();
      for (const auto& pair : g.at("pairs")) cfg.grid.base_pairs.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    if (g.contains("multipliers")) cfg.grid.multipliers = g.at("multipliers").get<std::vector<int>>();
  }
  if (j.contains("reps")) cfg.reps = j.at("reps").get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
  if (j.contains("aggregation")) cfg.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    apply_json(cfg, json::parse(in));
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

std::vector<mlspread::ScenarioSpec> resolve_scenarios(const ExperimentConfig& cfg,
                                                      const std::vector<std::string>& fallback) {
  std::vector<std::string> names = cfg.scenarios.empty() ? fallback : cfg.scenarios;
  for (std::uint32_t d : cfg.blocking_days) names.push_back("blocking:" + std::to_string(d));

  std::vector<mlspread::ScenarioSpec> specs;
  for (const auto& name : names) {
    mlspread::ScenarioSpec spec;
    try {
      spec = mlspread::parse_scenario(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    spec.horizon = cfg.horizon;
    spec.infected_seed_fraction = cfg.infected_fraction;
    spec.aware_seed_fraction = cfg.aware_fraction;
    if (std::find(specs.begin(), specs.end(), spec) == specs.end()) specs.push_back(spec);
  }
  for (const auto& s : specs) {
    try {
      s.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return specs;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.network_path.empty() && !cfg.synthetic) throw UsageError("no network: give --network or --synthetic");
  if (cfg.contact_layer.empty()) throw UsageError("--contact-layer is required");
  if (cfg.reps == 0) throw UsageError("--reps must be at least 1");
  if (cfg.grid.base_pairs.empty() || cfg.grid.multipliers.empty()) throw UsageError("parameter grid is empty");
  try {
    (void)cfg.grid.combos();
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("parameter grid: ") + e.what());
  }
  if (cfg.combo && *cfg.combo >= cfg.grid.size()) throw UsageError("--combo index out of range");
}

std::pair<mlspread::MultilayerNetwork, std::string> load_network(const ExperimentConfig& cfg) {
  if (cfg.synthetic) {
    try {
      auto net = mlspread::generate_synthetic(cfg.synthetic->actors, cfg.synthetic->layers, cfg.contact_layer,
                                              cfg.synthetic->seed);
      return {std::move(net), cfg.name.empty() ? "synthetic" : cfg.name};
    } catch (const mlspread::NetworkError& e) {
      throw UsageError(std::string("synthetic network: ") + e.what());
    }
  }
  std::ifstream in(cfg.network_path);
  if (!in) throw UsageError("cannot open network file '" + cfg.network_path + "'");
  try {
    auto net = mlspread::parse_multilayer_edgelist(in, cfg.contact_layer);
    return {std::move(net), cfg.name.empty() ? fs::path(cfg.network_path).stem().string() : cfg.name};
  } catch (const mlspread::NetworkError& e) {
    throw UsageError(cfg.network_path + ": " + e.what());
  }
}

fs::path prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory '" + out + "'");
  return fs::path(out);
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + path.string() + "'");
  writer(file);
  file.flush();
  if (!file) throw IoError("error while writing '" + path.string() + "'");
}

std::string file_safe(std::string text) {
  for (char& c : text)
    if (c == ':' || c == '/' || c == ' ') c = '-';
  return text;
}

int cmd_summarize(const ExperimentConfig& cfg) {
  if (cfg.network_path.empty() && !cfg.synthetic) throw UsageError("no network: give --network or --synthetic");
  if (cfg.contact_layer.empty()) throw UsageError("--contact-layer is required");
  const auto [net, name] = load_network(cfg);
  mlspread::write_summary_csv(std::cout, name, net);
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto scenarios = resolve_scenarios(cfg, {"simultaneous"});
  const auto [net, name] = load_network(cfg);
  const fs::path dir = prepare_out_dir(cfg.out);
  const auto combos = cfg.grid.combos();

  std::vector<std::size_t> reps;
  if (cfg.rep) {
    reps.push_back(*cfg.rep);  // --rep selects one repetition regardless of --reps
  } else {
    for (std::size_t r = 0; r < cfg.reps; ++r) reps.push_back(r);
  }

  struct Job {
    std::size_t scenario, combo, rep;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (std::size_t c = 0; c < combos.size(); ++c)
      if (!cfg.combo || *cfg.combo == c)
        for (std::size_t r : reps) jobs.push_back({s, c, r});

  std::vector<mlspread::RunTrace> traces(jobs.size());
  mlspread::parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const mlspread::RunKey key{name, scenarios[job.scenario], job.combo, job.rep};
    traces[i] = mlspread::run_scenario(net, combos[job.combo], key.scenario, mlspread::run_seed_for(cfg.seed, key));
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const auto file = dir / ("trace_" + file_safe(name) + "_" + file_safe(scenarios[job.scenario].name()) + "_c" +
                             std::to_string(job.combo) + "_r" + std::to_string(job.rep) + ".csv");
    write_file(file, [&](std::ostream& out) { mlspread::write_trace_csv(out, traces[i]); });
  }
  std::cerr << "wrote " << jobs.size() << " trace file(s) to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto scenarios = resolve_scenarios(cfg, {"sir", "simultaneous", "blocking:21"});
  const auto [net, name] = load_network(cfg);
  const fs::path dir = prepare_out_dir(cfg.out);

  mlspread::ExperimentOptions opt;
  opt.reps = cfg.reps;
  opt.master_seed = cfg.seed;
  opt.threads = cfg.threads;
  opt.aggregation = cfg.aggregation;
  const auto result = mlspread::run_experiment(net, name, cfg.grid, scenarios, opt);

  write_file(dir / "raw_results.csv", [&](std::ostream& out) { mlspread::write_raw_csv(out, result); });
  write_file(dir / "comparison.csv", [&](std::ostream& out) { mlspread::write_comparison_csv(out, result); });
  std::cerr << "ran " << result.runs.size() << " simulations; results in " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled virus (SIR) and awareness (UAU) spreading on multilayer networks"};
  app.require_subcommand(1);

  std::string config_path, network, contact_layer, name, synthetic, pairs, out, aggregation;
  std::vector<std::string> scenarios;
  std::vector<std::uint32_t> blocking_days;
  std::vector<int> multipliers;
  std::uint32_t horizon = 150;
  std::size_t reps = 20, combo = 0, rep = 0;
  std::uint64_t seed = 0, synthetic_seed = 0;
  unsigned threads = 1;
  double infected_fraction = 0.01, aware_fraction = 0.01;

  auto add_network_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file");
    cmd->add_option("--network", network, "Edge-list file: one 'actor actor layer' triple per line");
    cmd->add_option("--contact-layer", contact_layer, "Layer on which the virus spreads");
    cmd->add_option("--synthetic", synthetic, "Random network instead of a file, e.g. 250:contact=0.032,online=0.03");
    cmd->add_option("--synthetic-seed", synthetic_seed, "Seed for --synthetic");
    cmd->add_option("--name", name, "Network name used in outputs and seeds (default: file stem)");
  };
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--scenario", scenarios, "sir | simultaneous | blocking:D (repeatable)");
    cmd->add_option("--blocking-days", blocking_days, "Extra blocking delays, e.g. 7,14,21")->delimiter(',');
    cmd->add_option("--horizon", horizon, "Days to simulate")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--threads", threads, "Worker threads (output does not depend on it)");
    cmd->add_option("--pairs", pairs, "Override (beta,gamma) pairs, e.g. 0.19:0.10,0.31:0.10");
    cmd->add_option("--multipliers", multipliers, "Override awareness multipliers x")->delimiter(',');
    cmd->add_option("--infected-fraction", infected_fraction, "Initially infected share of the contact layer");
    cmd->add_option("--aware-fraction", aware_fraction, "Initially aware share of all actors");
  };

  auto* summarize_cmd = app.add_subcommand("summarize", "Print network statistics as CSV");
  add_network_flags(summarize_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "Write one day-by-day trace CSV per run");
  add_network_flags(simulate_cmd);
  add_run_flags(simulate_cmd);
  simulate_cmd->add_option("--reps", reps, "Repetitions per combination (default 1 for simulate)");
  simulate_cmd->add_option("--combo", combo, "Only this parameter-combination index");
  simulate_cmd->add_option("--rep", rep, "Only this repetition index");

  auto* experiment_cmd = app.add_subcommand("experiment", "Run the full grid and write raw and comparison CSVs");
  add_network_flags(experiment_cmd);
  add_run_flags(experiment_cmd);
  experiment_cmd->add_option("--reps", reps, "Repetitions per combination")->capture_default_str();
  experiment_cmd->add_option("--aggregation", aggregation, "flat | combo-mean");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  auto given = [&](const char* flag) {
    try {
      return cmd->get_option(flag)->count() > 0;
    } catch (const CLI::OptionNotFound&) {
      return false;
    }
  };

  try {
    ExperimentConfig cfg;
    if (cmd == simulate_cmd) cfg.reps = 1;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    if (given("--network")) {
      cfg.network_path = network;
      cfg.synthetic.reset();
    }
    if (given("--synthetic")) cfg.synthetic = parse_synthetic(synthetic);
    if (given("--synthetic-seed")) {
      if (!cfg.synthetic) throw UsageError("--synthetic-seed needs --synthetic");
      cfg.synthetic->seed = synthetic_seed;
    }
    if (given("--contact-layer")) cfg.contact_layer = contact_layer;
    if (given("--name")) cfg.name = name;
    if (given("--scenario")) cfg.scenarios = scenarios;
    if (given("--blocking-days")) cfg.blocking_days = blocking_days;
    if (given("--horizon")) cfg.horizon = horizon;
    if (given("--seed")) cfg.seed = seed;
    if (given("--out")) cfg.out = out;
    if (given("--threads")) cfg.threads = threads;
    if (given("--reps")) cfg.reps = reps;
    if (given("--infected-fraction")) cfg.infected_fraction = infected_fraction;
    if (given("--aware-fraction")) cfg.aware_fraction = aware_fraction;
    if (given("--pairs")) cfg.grid.base_pairs = parse_pairs(pairs);
    if (given("--multipliers")) cfg.grid.multipliers = multipliers;
    if (given("--aggregation")) cfg.aggregation = parse_aggregation(aggregation);
    if (given("--combo")) cfg.combo = combo;
    if (given("--rep")) cfg.rep = rep;
    if (cfg.threads == 0) cfg.threads = std::max(1u, std::thread::hardware_concurrency());

    if (cmd == summarize_cmd) return cmd_summarize(cfg);
    if (cmd == simulate_cmd) return cmd_simulate(cfg);
    return cmd_experiment(cfg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
