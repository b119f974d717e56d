// taguchi: orthogonal-array hyperparameter search from the command line.
//
//   taguchi plan    --config project.json
//   taguchi run     --config project.json [--force]
//   taguchi analyze --config project.json
//   taguchi confirm --config project.json [--record confirm.json]
//   taguchi bench   --space space.json --function cnn_surrogate --trials 100
//   taguchi arrays dump [--name L16] [--json]

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "taguchi/commands.hpp"

namespace {

struct ConfigOverrides {
  std::string config_path;
  std::string space;
  std::string array;
  std::string output_dir;
  std::string selection;
  std::size_t max_in_flight = 0;
};

void add_config_options(CLI::App* command, ConfigOverrides& overrides) {
  command->add_option("-c,--config", overrides.config_path, "Project config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  command->add_option("--space", overrides.space, "Override the design space file");
  command->add_option("--array", overrides.array, "Override the array: auto, gf, catalog name or file");
  command->add_option("--out", overrides.output_dir, "Override the output directory");
  command->add_option("--selection", overrides.selection, "Override the selection metric set");
  command->add_option("-j,--max-in-flight", overrides.max_in_flight,
                      "Override the number of concurrent evaluations");
}

taguchi::ProjectConfig resolve_config(const ConfigOverrides& overrides) {
  auto config = taguchi::load_config(overrides.config_path);
  if (!overrides.space.empty()) config.space_path = overrides.space;
  if (!overrides.array.empty()) config.array = overrides.array;
  if (!overrides.output_dir.empty()) config.output_dir = overrides.output_dir;
  if (!overrides.selection.empty()) config.selection_metric_set = overrides.selection;
  if (overrides.max_in_flight > 0) config.max_in_flight = overrides.max_in_flight;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taguchi orthogonal-array hyperparameter search"};
  app.require_subcommand(1);

  ConfigOverrides overrides;

  auto* plan = app.add_subcommand("plan", "Write the experiment plan for a design space");
  add_config_options(plan, overrides);

  bool force = false;
  auto* run = app.add_subcommand("run", "Evaluate every planned run");
  add_config_options(run, overrides);
  run->add_flag("--force", force, "Re-evaluate runs that already have records");

  auto* analyze = app.add_subcommand("analyze", "Group means, H* and importance ranking");
  add_config_options(analyze, overrides);

  std::string record_file;
  auto* confirm = app.add_subcommand("confirm", "Compare the run at H* with the orthogonal runs");
  add_config_options(confirm, overrides);
  confirm->add_option("--record", record_file, "Confirmation run record (JSON)")
      ->check(CLI::ExistingFile);

  taguchi::cli::BenchCommand bench_command;
  std::uint64_t bench_seed = 1;
  double alpha_error = 0.8;
  auto* bench = app.add_subcommand("bench", "Taguchi vs random vs exhaustive on a synthetic function");
  bench->add_option("--space", bench_command.space_path, "Design space (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  bench->add_option("--function", bench_command.options.function.function, "Synthetic function")
      ->check(CLI::IsMember(taguchi::synthetic_functions()));
  bench->add_option("--array", bench_command.array, "auto, gf, catalog name or file");
  bench->add_option("--objective", bench_command.objective, "single_error or error_and_time")
      ->check(CLI::IsMember({"single_error", "error_and_time"}));
  auto* alpha_option = bench->add_option("--alpha-e", alpha_error, "Error weight for error_and_time");
  bench->add_option("--trials", bench_command.options.trials, "Number of seeded trials")
      ->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_seed, "Base seed (TAGUCHI_SEED overrides)");
  bench->add_option("--noise", bench_command.options.function.noise, "Error noise std-dev")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--budgets", bench_command.options.random_budgets,
                    "Random-search budgets (default: the array's run count)")
      ->delimiter(',');
  bench->add_option("--cap", bench_command.options.exhaustive_cap,
                    "Largest grid enumerated exhaustively");
  bench->add_option("--metric-set", bench_command.options.metric_set, "Metric set to optimize");
  bench->add_option("-o,--output", bench_command.output, "Per-trial CSV (summary written alongside)");

  auto* arrays = app.add_subcommand("arrays", "Orthogonal array catalog");
  arrays->require_subcommand(1);
  std::string array_name;
  bool as_json = false;
  auto* dump = arrays->add_subcommand("dump", "Print catalog arrays");
  dump->add_option("--name", array_name, "Single catalog entry, e.g. L16");
  dump->add_flag("--json", as_json, "JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    namespace cli = taguchi::cli;
    if (*plan) return cli::cmd_plan(resolve_config(overrides), std::cout);
    if (*run) return cli::cmd_run(resolve_config(overrides), force, std::cout);
    if (*analyze) return cli::cmd_analyze(resolve_config(overrides), std::cout);
    if (*confirm) {
      std::optional<std::string> record;
      if (!record_file.empty()) record = record_file;
      return cli::cmd_confirm(resolve_config(overrides), record, std::cout);
    }
    if (*bench) {
      bench_command.options.function.seed = taguchi::seed_from_env(bench_seed);
      if (*alpha_option) bench_command.alpha_error = alpha_error;
      return cli::cmd_bench(bench_command, std::cout);
    }
    if (*dump) {
      std::optional<std::string> name;
      if (!array_name.empty()) name = array_name;
      return cli::cmd_arrays_dump(name, as_json, std::cout);
    }
  } catch (const taguchi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(taguchi::ErrorKind::validation);
  }
  return 0;
}
