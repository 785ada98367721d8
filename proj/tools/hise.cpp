#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "hise/ablation.hpp"
#include "hise/checkpoint.hpp"
#include "hise/data.hpp"
#include "hise/gradsuite.hpp"
#include "hise/metrics.hpp"
#include "hise/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

hise::RunConfig load_config(const std::string& path) {
  hise::RunConfig config = hise::RunConfig::from_json_file(path);
  if (const char* env = std::getenv("HISE_SEED")) {
    config.seed = std::strtoull(env, nullptr, 10);
    std::cerr << "HISE_SEED overrides config seed: " << config.seed << "\n";
  }
  config.validate();
  return config;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

hise::DatasetSplit load_data_dir(const std::string& data_dir, const hise::RunConfig& config) {
  const fs::path dir(data_dir);
  return hise::load_fixtures((dir / "videos.jsonl").string(), (dir / "texts.jsonl").string(),
                             hise::FixtureLimits{config.vocab_size(), config.r_roles});
}

void check_manifest(const std::string& data_dir, const hise::RunConfig& config) {
  const fs::path manifest_path = fs::path(data_dir) / "manifest.json";
  if (!fs::exists(manifest_path)) return;
  std::ifstream in(manifest_path);
  ordered_json manifest;
  in >> manifest;
  auto dim = [&](const char* key, int expected) {
    if (manifest.contains(key) && manifest[key].get<int>() != expected)
      throw std::runtime_error(std::string("fixture ") + key + " (" +
                               std::to_string(manifest[key].get<int>()) +
                               ") does not match the config (" + std::to_string(expected) + ")");
  };
  dim("d_frame", config.d_frame);
  dim("d_roi", config.d_roi);
  dim("vocab_size", config.vocab_size());
  if (manifest.contains("config_hash") &&
      manifest["config_hash"].get<std::string>() != std::to_string(config.hash()))
    std::cerr << "warning: fixture manifest was generated from a different config\n";
}

int cmd_gen_data(const std::string& config_path, const std::string& out_dir) {
  const hise::RunConfig config = load_config(config_path);
  const hise::DatasetSplit split = hise::generate_synthetic(config, config.seed);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_file(dir / "videos.jsonl", hise::to_jsonl(split.videos));
  write_file(dir / "texts.jsonl", hise::to_jsonl(split.texts));

  ordered_json manifest;
  manifest["config_hash"] = std::to_string(config.hash());
  manifest["pairs"] = config.pairs;
  manifest["d_frame"] = config.d_frame;
  manifest["d_roi"] = config.d_roi;
  manifest["vocab_size"] = config.vocab_size();
  manifest["r_roles"] = config.r_roles;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::cerr << "wrote " << split.videos.size() << " videos and " << split.texts.size()
            << " texts to " << out_dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_dir) {
  const hise::RunConfig config = load_config(config_path);
  const hise::DatasetSplit split = load_data_dir(data_dir, config);
  check_manifest(data_dir, config);

  hise::TrainerState state = hise::make_trainer_state(config);
  const hise::TrainResult result = hise::train(state, split, config, &std::cerr);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  hise::save_checkpoint((dir / "checkpoint.bin").string(), state, config);
  write_file(dir / "metrics_history.json", hise::train_history_json(result));
  write_file(dir / "final_metrics.json", result.final_metrics.to_json_text());

  std::cout << result.final_metrics.to_table();
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_dir,
             const std::string& json_out) {
  hise::LoadedCheckpoint loaded = hise::load_checkpoint(ckpt_path);
  const hise::DatasetSplit split = load_data_dir(data_dir, loaded.config);
  check_manifest(data_dir, loaded.config);

  const hise::MetricsReport report = hise::evaluate(loaded.state.live, split, loaded.config);
  std::cout << report.to_table();
  if (!json_out.empty()) write_file(json_out, report.to_json_text());
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& data_dir,
               const std::string& out_dir, const std::string& axis_name) {
  const hise::RunConfig config = load_config(config_path);
  const hise::DatasetSplit split = load_data_dir(data_dir, config);
  check_manifest(data_dir, config);

  const hise::AblationAxis axis = hise::parse_ablation_axis(axis_name);
  const std::vector<hise::AblationRow> rows =
      hise::run_ablation(config, split, axis, &std::cerr);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_file(dir / "ablation.csv", hise::ablation_csv(rows));
  write_file(dir / "ablation.json", hise::ablation_json(rows));

  std::cout << hise::ablation_csv(rows);
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, int num_seeds, bool corrupt) {
  if (const char* env = std::getenv("HISE_SEED")) seed = std::strtoull(env, nullptr, 10);
  const hise::GradSuiteReport report = hise::run_grad_suite(seed, num_seeds, corrupt);
  std::cout << report.to_table();
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HiSE video-text retrieval harness"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir, ckpt_path, json_out;
  std::string axis = "components";
  std::uint64_t seed = 0;
  int num_seeds = 20;
  bool corrupt = false;

  CLI::App* gen = app.add_subcommand("gen-data", "Generate synthetic fixtures");
  gen->add_option("--config", config_path, "RunConfig JSON")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* train = app.add_subcommand("train", "Train a model on fixtures");
  train->add_option("--config", config_path, "RunConfig JSON")->required();
  train->add_option("--data", data_dir, "Fixture directory")->required();
  train->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--data", data_dir, "Fixture directory")->required();
  eval->add_option("--json", json_out, "Write the metrics report to this file");

  CLI::App* ablate = app.add_subcommand("ablate", "Train one model per toggle row");
  ablate->add_option("--config", config_path, "RunConfig JSON")->required();
  ablate->add_option("--data", data_dir, "Fixture directory")->required();
  ablate->add_option("--out", out_dir, "Output directory")->required();
  ablate->add_option("--axis", axis, "components|aggregation|alpha|loss");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  gradcheck->add_option("--seed", seed, "Base seed");
  gradcheck->add_option("--seeds", num_seeds, "Random instances per check");
  gradcheck->add_flag("--corrupt", corrupt, "Inject the negative-control gradient defect")
      ->group("");  // hidden; test hook

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmd_gen_data(config_path, out_dir);
    if (train->parsed()) return cmd_train(config_path, data_dir, out_dir);
    if (eval->parsed()) return cmd_eval(ckpt_path, data_dir, json_out);
    if (ablate->parsed()) return cmd_ablate(config_path, data_dir, out_dir, axis);
    if (gradcheck->parsed()) return cmd_gradcheck(seed, num_seeds, corrupt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
