// Drives the installed binary end to end through std::system.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "beamccs/channelgen.hpp"
#include "beamccs/cli.hpp"
#include "beamccs/io_util.hpp"

using namespace beamccs;

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
  const std::string cmd =
      std::string(BEAMCCS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string tiny_config_json(const fs::path& out_dir) {
  nlohmann::json j = {
      {"global_seed", 7},
      {"scenario", {{"n_antennas", 8}}},
      {"dataset", {{"n_train", 60}, {"n_test", 20}}},
      {"train",
       {{"epochs", 1}, {"batch_size", 32}, {"m", 4}, {"retrain_epochs", 1}}},
      {"eval", {{"snr_grid_db", {0.0, 10.0}}, {"m_list", {4}}}},
      {"paths", {{"out_dir", out_dir.string()}}},
  };
  return j.dump(2);
}

}  // namespace

TEST_CASE("cli pipeline: generate, train, eval, inspect" *
          doctest::timeout(600)) {
  const fs::path tmp = fs::temp_directory_path() / "beamccs_cli_test";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const fs::path config = tmp / "config.json";
  write_text_file(config, tiny_config_json(tmp / "out"));
  const std::string cfg_flag = " --config " + config.string();

  REQUIRE(run("generate" + cfg_flag) == 0);
  CHECK(fs::exists(tmp / "out" / "train.ds"));
  CHECK(fs::exists(tmp / "out" / "test.ds"));

  const Dataset train_ds = load_dataset((tmp / "out" / "train.ds").string());
  CHECK(train_ds.channels.size() == 60);
  CHECK(train_ds.config.n_antennas == 8);

  REQUIRE(run("train" + cfg_flag) == 0);
  CHECK(fs::exists(tmp / "out" / "model_prequant.ckpt"));
  CHECK(fs::exists(tmp / "out" / "model.ckpt"));
  CHECK(fs::exists(tmp / "out" / "pattern_prequant.csv"));
  CHECK(fs::exists(tmp / "out" / "pattern_quantized.csv"));
  CHECK(fs::exists(tmp / "out" / "base_quantized.json"));

  SUBCASE("retrain-only reuses the stage-one checkpoint") {
    CHECK(run("train --retrain-only" + cfg_flag) == 0);
  }

  REQUIRE(run("eval" + cfg_flag) == 0);
  CHECK(fs::exists(tmp / "out" / "report.csv"));
  const auto bytes = read_file((tmp / "out" / "report.csv").string());
  const std::string csv(bytes.begin(), bytes.end());
  CHECK(csv.rfind("method,M,snr_db,mean_rate,top1,top5,n_channels\n", 0) == 0);
  for (const char* method :
       {"learned-ccs", "random-ccs", "random-unstructured", "exhaustive"}) {
    CHECK(csv.find(method) != std::string::npos);
  }

  SUBCASE("inspect validates datasets, models and reports") {
    CHECK(run("inspect " + (tmp / "out" / "train.ds").string()) == 0);
    CHECK(run("inspect " + (tmp / "out" / "model.ckpt").string()) == 0);
    CHECK(run("inspect " + (tmp / "out" / "report.json").string()) == 0);
    CHECK(run("inspect " + (tmp / "out" / "base_quantized.json").string()) == 0);
  }

  fs::remove_all(tmp);
}

TEST_CASE("cli exit codes") {
  const fs::path tmp = fs::temp_directory_path() / "beamccs_cli_codes";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  SUBCASE("unknown config key is a config error (2)") {
    const fs::path config = tmp / "bad.json";
    write_text_file(config, R"({"not_a_key": 1})");
    CHECK(run("generate --config " + config.string()) == 2);
  }
  SUBCASE("malformed config JSON is a config error (2)") {
    const fs::path config = tmp / "malformed.json";
    write_text_file(config, "{oops");
    CHECK(run("generate --config " + config.string()) == 2);
  }
  SUBCASE("missing input file is an I/O error (3)") {
    CHECK(run("inspect " + (tmp / "nope.ds").string()) == 3);
  }
  SUBCASE("unrecognized file type is an I/O error (3)") {
    const fs::path junk = tmp / "junk.bin";
    write_text_file(junk, "this is not an artifact file at all");
    CHECK(run("inspect " + junk.string()) == 3);
  }
  SUBCASE("dataset violating its scaling invariant is flagged (4)") {
    ScenarioConfig cfg;
    cfg.n_antennas = 8;
    cfg.seed = 3;
    auto [train_ds, test_ds] = generate_dataset(cfg, 10, 4);
    for (cplx& z : train_ds.channels[0].h.data()) z *= 2.0;  // break ||H|| = N
    const fs::path path = tmp / "broken.ds";
    save_dataset(train_ds, path.string());
    CHECK(run("inspect " + path.string()) == 4);
  }
  SUBCASE("missing subcommand is a usage error") {
    CHECK(run("") != 0);
  }

  fs::remove_all(tmp);
}

TEST_CASE("cli flag overrides reach the pipeline") {
  const fs::path tmp = fs::temp_directory_path() / "beamccs_cli_flags";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  const fs::path config = tmp / "config.json";
  write_text_file(config, tiny_config_json(tmp / "ignored"));

  const std::string out_flag = " --out " + (tmp / "other").string();
  REQUIRE(run("generate --config " + config.string() + out_flag +
              " --threads 1") == 0);
  CHECK(fs::exists(tmp / "other" / "train.ds"));
  fs::remove_all(tmp);
}
