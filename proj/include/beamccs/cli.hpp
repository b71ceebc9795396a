#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamccs/channelgen.hpp"
#include "beamccs/net.hpp"

namespace beamccs {

/// A stored artifact failed its declared invariants (scaling, labels,
/// quantization grid). Maps to exit code 4.
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// CLI parse or semantic configuration problem. Maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  std::vector<double> snr_grid_db = {-10, -5, 0, 5, 10, 15, 20, 25};
  std::vector<int> m_list = {10, 40};
  std::vector<std::string> methods = {"learned-ccs", "random-ccs",
                                      "random-unstructured", "exhaustive"};
};

struct PathsConfig {
  std::string out_dir = "out";
  std::string train_dataset;
  std::string test_dataset;
  std::string model_prequant;
  std::string model;
  std::string pattern_prequant;
  std::string pattern_quantized;
  std::string base_quantized;
  std::string report_csv;

  /// Fills unset paths with defaults under out_dir.
  void resolve();
};

/// One config file drives the whole pipeline; every randomized step draws
/// its seed from global_seed through fixed derivation streams.
struct RunConfig {
  std::uint64_t global_seed = 1;
  int threads = 0;  // 0 = hardware default
  ScenarioConfig scenario;
  int n_train = 20000;
  int n_test = 5000;
  TrainConfig train;
  int retrain_epochs = 30;
  int quantize_bits = 3;
  EvalConfig eval;
  PathsConfig paths;

  /// Derived seeds written into scenario/train; call after any overrides.
  void derive_seeds();
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);

void cmd_generate(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg, bool retrain_only);
void cmd_eval(const RunConfig& cfg);
void cmd_inspect(const std::string& path);

/// Parses argv, runs one subcommand. Exit codes: 0 success, 2 config error,
/// 3 I/O error, 4 invariant violation.
int run_cli(int argc, char** argv);

}  // namespace beamccs
