#include "beamccs/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "beamccs/ccs.hpp"
#include "beamccs/eval.hpp"
#include "beamccs/io_util.hpp"
#include "beamccs/parallel.hpp"

namespace beamccs {

namespace {

// Seed derivation streams off global_seed.
constexpr std::uint64_t kStreamScenario = 1;
constexpr std::uint64_t kStreamOmega = 2;
constexpr std::uint64_t kStreamTrain = 3;
constexpr std::uint64_t kStreamRetrain = 4;
constexpr std::uint64_t kStreamEval = 5;
constexpr std::uint64_t kStreamRandomCcs = 6;
constexpr std::uint64_t kStreamUnstructured = 7;

std::string joined(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()),
                       text.size()));
}

void write_pattern_csv(const RealMatrix& pattern, const std::string& path) {
  std::string text;
  char buf[64];
  for (int r = 0; r < pattern.rows(); ++r) {
    for (int c = 0; c < pattern.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.12g", pattern(r, c));
      text += buf;
      text += (c + 1 < pattern.cols()) ? ',' : '\n';
    }
  }
  write_text(path, text);
}

TrainConfig train_config_from_json(const nlohmann::json& j, int* retrain_epochs) {
  TrainConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") {
      cfg.epochs = value.get<int>();
    } else if (key == "batch_size") {
      cfg.batch_size = value.get<int>();
    } else if (key == "learning_rate") {
      cfg.learning_rate = value.get<double>();
    } else if (key == "optimizer") {
      const auto name = value.get<std::string>();
      if (name == "adam") {
        cfg.optimizer = TrainConfig::Optimizer::adam;
      } else if (name == "sgd") {
        cfg.optimizer = TrainConfig::Optimizer::sgd;
      } else {
        throw ConfigError("train.optimizer must be 'adam' or 'sgd'");
      }
    } else if (key == "train_snr_db") {
      const auto range = value.get<std::vector<double>>();
      if (range.size() != 2) {
        throw ConfigError("train.train_snr_db must be [lo, hi]");
      }
      cfg.train_snr_lo_db = range[0];
      cfg.train_snr_hi_db = range[1];
    } else if (key == "m") {
      cfg.m = value.get<int>();
    } else if (key == "retrain_epochs") {
      *retrain_epochs = value.get<int>();
    } else {
      throw ConfigError("train config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

nlohmann::json train_config_to_json(const TrainConfig& cfg, int retrain_epochs) {
  return {
      {"epochs", cfg.epochs},
      {"batch_size", cfg.batch_size},
      {"learning_rate", cfg.learning_rate},
      {"optimizer",
       cfg.optimizer == TrainConfig::Optimizer::adam ? "adam" : "sgd"},
      {"train_snr_db", {cfg.train_snr_lo_db, cfg.train_snr_hi_db}},
      {"m", cfg.m},
      {"retrain_epochs", retrain_epochs},
  };
}

}  // namespace

void PathsConfig::resolve() {
  const auto fill = [this](std::string& p, const char* name) {
    if (p.empty()) p = joined(out_dir, name);
  };
  fill(train_dataset, "train.ds");
  fill(test_dataset, "test.ds");
  fill(model_prequant, "model_prequant.ckpt");
  fill(model, "model.ckpt");
  fill(pattern_prequant, "pattern_prequant.csv");
  fill(pattern_quantized, "pattern_quantized.csv");
  fill(base_quantized, "base_quantized.json");
  fill(report_csv, "report.csv");
}

void RunConfig::derive_seeds() {
  scenario.seed = derive_seed(global_seed, kStreamScenario);
  train.omega_seed = derive_seed(global_seed, kStreamOmega);
  train.train_seed = derive_seed(global_seed, kStreamTrain);
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "global_seed") {
        cfg.global_seed = value.get<std::uint64_t>();
      } else if (key == "threads") {
        cfg.threads = value.get<int>();
      } else if (key == "scenario") {
        if (value.contains("seed")) {
          throw ConfigError("scenario.seed derives from global_seed; remove it");
        }
        cfg.scenario = scenario_from_json(value);
      } else if (key == "dataset") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "n_train") {
            cfg.n_train = v2.get<int>();
          } else if (k2 == "n_test") {
            cfg.n_test = v2.get<int>();
          } else {
            throw ConfigError("dataset config: unknown key '" + k2 + "'");
          }
        }
      } else if (key == "train") {
        cfg.train = train_config_from_json(value, &cfg.retrain_epochs);
      } else if (key == "quantize_bits") {
        cfg.quantize_bits = value.get<int>();
      } else if (key == "eval") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "snr_grid_db") {
            cfg.eval.snr_grid_db = v2.get<std::vector<double>>();
          } else if (k2 == "m_list") {
            cfg.eval.m_list = v2.get<std::vector<int>>();
          } else if (k2 == "methods") {
            cfg.eval.methods = v2.get<std::vector<std::string>>();
          } else {
            throw ConfigError("eval config: unknown key '" + k2 + "'");
          }
        }
      } else if (key == "paths") {
        for (const auto& [k2, v2] : value.items()) {
          if (k2 == "out_dir") {
            cfg.paths.out_dir = v2.get<std::string>();
          } else if (k2 == "train_dataset") {
            cfg.paths.train_dataset = v2.get<std::string>();
          } else if (k2 == "test_dataset") {
            cfg.paths.test_dataset = v2.get<std::string>();
          } else if (k2 == "model_prequant") {
            cfg.paths.model_prequant = v2.get<std::string>();
          } else if (k2 == "model") {
            cfg.paths.model = v2.get<std::string>();
          } else if (k2 == "pattern_prequant") {
            cfg.paths.pattern_prequant = v2.get<std::string>();
          } else if (k2 == "pattern_quantized") {
            cfg.paths.pattern_quantized = v2.get<std::string>();
          } else if (k2 == "base_quantized") {
            cfg.paths.base_quantized = v2.get<std::string>();
          } else if (k2 == "report_csv") {
            cfg.paths.report_csv = v2.get<std::string>();
          } else {
            throw ConfigError("paths config: unknown key '" + k2 + "'");
          }
        }
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.paths.resolve();
  cfg.derive_seeds();
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  return {
      {"global_seed", cfg.global_seed},
      {"threads", cfg.threads},
      {"scenario", scenario_to_json(cfg.scenario)},
      {"dataset", {{"n_train", cfg.n_train}, {"n_test", cfg.n_test}}},
      {"train", train_config_to_json(cfg.train, cfg.retrain_epochs)},
      {"quantize_bits", cfg.quantize_bits},
      {"eval",
       {{"snr_grid_db", cfg.eval.snr_grid_db},
        {"m_list", cfg.eval.m_list},
        {"methods", cfg.eval.methods}}},
      {"paths",
       {{"out_dir", cfg.paths.out_dir},
        {"train_dataset", cfg.paths.train_dataset},
        {"test_dataset", cfg.paths.test_dataset},
        {"model_prequant", cfg.paths.model_prequant},
        {"model", cfg.paths.model},
        {"pattern_prequant", cfg.paths.pattern_prequant},
        {"pattern_quantized", cfg.paths.pattern_quantized},
        {"base_quantized", cfg.paths.base_quantized},
        {"report_csv", cfg.paths.report_csv}}},
  };
}

void cmd_generate(const RunConfig& cfg) {
  set_num_threads(cfg.threads);
  std::filesystem::create_directories(cfg.paths.out_dir);

  auto [train_ds, test_ds] = generate_dataset(cfg.scenario, cfg.n_train, cfg.n_test);
  const nlohmann::json extra = {{"effective_config", run_config_to_json(cfg)}};
  save_dataset(train_ds, cfg.paths.train_dataset, extra);
  save_dataset(test_ds, cfg.paths.test_dataset, extra);

  const RealMatrix prior = beamspace_prior(train_ds);
  const PriorConcentration pc = prior_concentration(prior);
  std::printf("generated %d train / %d test channels (N=%d)\n", cfg.n_train,
              cfg.n_test, cfg.scenario.n_antennas);
  std::printf("beamspace prior: entropy %.2f bits, support %d bins\n",
              pc.entropy_bits, pc.support);
  std::printf("  80%% of label mass on %.1f%% of bins, 95%% on %.1f%%\n",
              100.0 * pc.frac_bins_80, 100.0 * pc.frac_bins_95);
  std::printf("wrote %s and %s\n", cfg.paths.train_dataset.c_str(),
              cfg.paths.test_dataset.c_str());
}

void cmd_train(const RunConfig& cfg, bool retrain_only) {
  set_num_threads(cfg.threads);
  std::filesystem::create_directories(cfg.paths.out_dir);
  const Dataset train_ds = load_dataset(cfg.paths.train_dataset);
  if (train_ds.config.n_antennas != cfg.scenario.n_antennas) {
    throw ConfigError("train dataset N does not match configured scenario");
  }

  const nlohmann::json effective = run_config_to_json(cfg);
  NetworkParams prequant;
  SubsamplingSet omega;
  if (retrain_only) {
    Checkpoint ck = load_checkpoint(cfg.paths.model_prequant);
    prequant = std::move(ck.params);
    omega = std::move(ck.omega);
    if (prequant.n != train_ds.config.n_antennas) {
      throw ConfigError("checkpoint N does not match train dataset");
    }
    std::printf("loaded pre-quantization checkpoint %s (skipping stage one)\n",
                cfg.paths.model_prequant.c_str());
  } else {
    TrainResult result = train(train_ds, cfg.train, cfg.quantize_bits);
    prequant = std::move(result.params);
    omega = std::move(result.omega);
    std::printf("trained %d epochs, loss %.4f -> %.4f\n", cfg.train.epochs,
                result.epoch_loss.empty() ? 0.0 : result.epoch_loss.front(),
                result.epoch_loss.empty() ? 0.0 : result.epoch_loss.back());
    save_checkpoint(prequant, omega,
                    {{"kind", "prequant"}, {"effective_config", effective}},
                    cfg.paths.model_prequant);
    write_pattern_csv(beam_pattern(prequant.base().p), cfg.paths.pattern_prequant);
  }

  TrainConfig retrain_cfg = cfg.train;
  retrain_cfg.epochs = cfg.retrain_epochs;
  retrain_cfg.train_seed = derive_seed(cfg.global_seed, kStreamRetrain);
  TrainResult retrained = quantize_and_retrain(prequant, train_ds, retrain_cfg,
                                               omega, cfg.quantize_bits);
  std::printf("quantized to %d-bit phases, retrained %d epochs, loss %.4f -> %.4f\n",
              cfg.quantize_bits, retrain_cfg.epochs,
              retrained.epoch_loss.empty() ? 0.0 : retrained.epoch_loss.front(),
              retrained.epoch_loss.empty() ? 0.0 : retrained.epoch_loss.back());

  save_checkpoint(retrained.params, retrained.omega,
                  {{"kind", "quantized"}, {"effective_config", effective}},
                  cfg.paths.model);
  write_pattern_csv(beam_pattern(retrained.params.base().p),
                    cfg.paths.pattern_quantized);
  save_base(retrained.params.base(), cfg.paths.base_quantized);
  std::printf("wrote %s, %s, %s\n", cfg.paths.model.c_str(),
              cfg.paths.pattern_quantized.c_str(),
              cfg.paths.base_quantized.c_str());
}

void cmd_eval(const RunConfig& cfg) {
  set_num_threads(cfg.threads);
  std::filesystem::create_directories(cfg.paths.out_dir);
  const Dataset test_ds = load_dataset(cfg.paths.test_dataset);
  const auto& snr = cfg.eval.snr_grid_db;
  const auto wants = [&](const std::string& name) {
    return std::find(cfg.eval.methods.begin(), cfg.eval.methods.end(), name) !=
           cfg.eval.methods.end();
  };

  std::vector<EvalReport> reports;
  if (wants("learned-ccs")) {
    Checkpoint ck = load_checkpoint(cfg.paths.model);
    if (ck.params.n != test_ds.config.n_antennas) {
      throw ConfigError("checkpoint N does not match test dataset");
    }
    reports.push_back(evaluate(ck.params, test_ds, ck.omega, snr,
                               derive_seed(cfg.global_seed, kStreamEval)));
  }

  const bool needs_train_ds =
      wants("random-ccs") || wants("random-unstructured");
  Dataset train_ds;
  if (needs_train_ds) {
    train_ds = load_dataset(cfg.paths.train_dataset);
    if (train_ds.config.n_antennas != test_ds.config.n_antennas) {
      throw ConfigError("train/test dataset N mismatch");
    }
  }

  for (const int m : cfg.eval.m_list) {
    if (wants("random-ccs")) {
      const std::uint64_t seed = derive_seed(
          derive_seed(cfg.global_seed, kStreamRandomCcs), static_cast<std::uint64_t>(m));
      TrainConfig bcfg = cfg.train;
      bcfg.m = m;
      bcfg.omega_seed = derive_seed(seed, 10);
      bcfg.train_seed = derive_seed(seed, 11);
      reports.push_back(baseline_random_ccs(train_ds, test_ds, bcfg,
                                            cfg.quantize_bits, snr, seed));
      std::printf("random-ccs M=%d done\n", m);
    }
    if (wants("random-unstructured")) {
      const std::uint64_t seed =
          derive_seed(derive_seed(cfg.global_seed, kStreamUnstructured),
                      static_cast<std::uint64_t>(m));
      TrainConfig bcfg = cfg.train;
      bcfg.m = m;
      bcfg.omega_seed = derive_seed(seed, 10);
      bcfg.train_seed = derive_seed(seed, 11);
      reports.push_back(baseline_random_unstructured(
          train_ds, test_ds, bcfg, cfg.quantize_bits, snr, seed));
      std::printf("random-unstructured M=%d done\n", m);
    }
  }

  if (wants("exhaustive")) {
    reports.push_back(exhaustive_report(test_ds, snr));
  }

  export_report(reports, cfg.paths.report_csv);
  // Run manifest with the effective config, next to the data files.
  const std::string manifest_path =
      joined(cfg.paths.out_dir, "report_manifest.json");
  write_text(manifest_path,
             nlohmann::json{{"effective_config", run_config_to_json(cfg)}}
                 .dump(2));

  for (const EvalReport& r : reports) {
    std::printf("%-22s M=%-4d", r.method.c_str(), r.m);
    for (std::size_t s = 0; s < r.snr_grid_db.size(); ++s) {
      std::printf("  %5.1fdB: %.3f b/s/Hz (top1 %.3f)", r.snr_grid_db[s],
                  r.mean_rate[s], r.top1_accuracy[s]);
    }
    std::printf("\n");
  }
  std::printf("wrote %s\n", cfg.paths.report_csv.c_str());
}

namespace {

void inspect_dataset(const std::string& path) {
  const Dataset ds = load_dataset(path);
  const int n = ds.config.n_antennas;
  const double count = static_cast<double>(ds.channels.size());
  double norm_min = 1e300, norm_max = 0.0, norm_sum = 0.0, energy = 0.0;
  for (const Channel& ch : ds.channels) {
    const double f = fro_norm(ch.h);
    norm_min = std::min(norm_min, f);
    norm_max = std::max(norm_max, f);
    norm_sum += f;
    energy += f * f;
  }
  std::printf("dataset: N=%d, %zu channels, split=%s, scaling=%s\n", n,
              ds.channels.size(), split_name(ds.split).c_str(),
              scaling_name(ds.scaling).c_str());
  std::printf("||H||_F: min %.6f, mean %.6f, max %.6f; mean ||H||^2 %.6f\n",
              norm_min, norm_sum / count, norm_max, energy / count);

  bool ok = true;
  if (ds.scaling == Scaling::per_channel) {
    const double dev =
        std::max(std::abs(norm_min - n), std::abs(norm_max - n)) / n;
    std::printf("per-channel scaling: max relative deviation %.3e %s\n", dev,
                dev <= 1e-9 ? "[ok]" : "[VIOLATION]");
    ok = ok && dev <= 1e-9;
  } else {
    const double dev = std::abs(energy / count - n * n) / (n * n);
    std::printf("common scaling: mean-energy relative deviation %.3e %s\n", dev,
                dev <= 1e-6 ? "[ok]" : "[VIOLATION]");
    ok = ok && dev <= 1e-6;
  }

  const int spot = std::min<std::size_t>(100, ds.channels.size());
  int label_bad = 0;
  for (int i = 0; i < spot; ++i) {
    if (exhaustive_best_beam(ds.channels[i].h) != ds.channels[i].label) {
      ++label_bad;
    }
  }
  std::printf("label spot-check (%d channels): %d mismatches %s\n", spot,
              label_bad, label_bad == 0 ? "[ok]" : "[VIOLATION]");
  ok = ok && label_bad == 0;

  const PriorConcentration pc = prior_concentration(beamspace_prior(ds));
  std::printf("prior: entropy %.2f bits, 80%% mass on %.1f%% of bins\n",
              pc.entropy_bits, 100.0 * pc.frac_bins_80);
  if (!ok) throw InvariantError(path + ": dataset invariants violated");
}

void inspect_model(const std::string& path) {
  const Checkpoint ck = load_checkpoint(path);
  const NetworkParams& p = ck.params;
  std::printf("model: N=%d, M=%d, q=%d, conv_frozen=%s\n", p.n, p.m, p.q,
              p.conv_frozen ? "true" : "false");
  const auto dims = NetworkParams::layer_dims(p.n, p.m);
  std::printf("layers: %d -> %d -> %d -> %d -> %d (bias-free)\n", dims[0],
              dims[1], dims[2], dims[3], dims[4]);
  std::printf("omega: %d shifts\n", ck.omega.size());
  if (!p.conv_frozen) return;

  // Check the stored f32 filter against the declared alphabet; the alphabet
  // indices themselves are exact by construction.
  constexpr char kModelMagic[8] = {'B', 'C', 'C', 'S', 'N', 'E', 'T', '1'};
  const FramedFile raw = read_framed(path, kModelMagic);
  ByteReader reader(raw.payload);
  int bad = 0;
  for (int part = 0; part < 2; ++part) {
    for (int r = 0; r < p.n; ++r) {
      for (int c = 0; c < p.n; ++c) {
        const float stored = reader.f32();
        const cplx z = alphabet_entry(
            p.conv_phase_idx[static_cast<std::size_t>(r) * p.n + c], p.q, p.n);
        const float expect =
            static_cast<float>(part == 0 ? z.real() : z.imag());
        if (stored != expect) ++bad;
      }
    }
  }
  std::printf("quantized filter check: %d entries off the Q_%d grid %s\n", bad,
              p.q, bad == 0 ? "[ok]" : "[VIOLATION]");
  if (bad != 0) {
    throw InvariantError(path + ": claimed-quantized filter has non-alphabet entries");
  }
}

void inspect_json(const std::string& path) {
  const auto bytes = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error&) {
    throw IoError(IoError::Kind::bad_magic, path + ": unrecognized file type");
  }
  if (j.is_object() && j.value("format", "") == "beamccs-base") {
    const BaseMatrix base = load_base(path);
    std::printf("base matrix: N=%d, q=%d, quantized=%s\n", base.p.rows(),
                base.q, base.quantized ? "true" : "false");
    return;
  }
  if (j.is_array()) {
    const auto reports = load_reports_json(path);
    std::printf("report: %zu methods\n", reports.size());
    for (const auto& r : reports) {
      std::printf("  %-22s M=%-4d %zu SNR points, %d channels\n",
                  r.method.c_str(), r.m, r.snr_grid_db.size(), r.n_channels);
    }
    return;
  }
  throw IoError(IoError::Kind::bad_magic, path + ": unrecognized file type");
}

}  // namespace

void cmd_inspect(const std::string& path) {
  const std::string magic = peek_magic(path);
  if (magic == std::string("BCCSDS1\0", 8)) {
    inspect_dataset(path);
  } else if (magic == "BCCSNET1") {
    inspect_model(path);
  } else {
    inspect_json(path);
  }
}

namespace {

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  try {
    while (pos < text.size()) {
      std::size_t used = 0;
      out.push_back(std::stoi(text.substr(pos), &used));
      pos += used;
      if (pos < text.size()) {
        if (text[pos] != ',') throw ConfigError("expected ',' in list");
        ++pos;
      }
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer list '" + text + "'");
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  try {
    while (pos < text.size()) {
      std::size_t used = 0;
      out.push_back(std::stod(text.substr(pos), &used));
      pos += used;
      if (pos < text.size()) {
        if (text[pos] != ',') throw ConfigError("expected ',' in list");
        ++pos;
      }
    }
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number list '" + text + "'");
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

RunConfig load_run_config(const std::string& config_path) {
  if (config_path.empty()) {
    RunConfig cfg;
    cfg.paths.resolve();
    cfg.derive_seeds();
    return cfg;
  }
  const auto bytes = read_file(config_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(config_path + ": " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Learned 2D-convolutional compressed sensing for mmWave beam alignment"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir;
  std::string m_list;
  std::string snr_grid;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
  bool retrain_only = false;
  std::string inspect_path;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "override global_seed")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  app.add_option("--threads", threads, "cap worker threads");
  app.add_option("--out", out_dir, "override output directory");

  CLI::App* generate = app.add_subcommand("generate", "create train/test datasets");
  CLI::App* train_cmd = app.add_subcommand("train", "train, quantize and retrain");
  train_cmd->add_flag("--retrain-only", retrain_only,
                      "reuse the pre-quantization checkpoint");
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate trained model and baselines");
  eval_cmd->add_option("--m-list", m_list, "measurement counts, e.g. 10,40");
  eval_cmd->add_option("--snr-grid", snr_grid, "SNR grid in dB, e.g. 0,5,10");
  CLI::App* inspect_cmd = app.add_subcommand("inspect", "print artifact metadata and checks");
  inspect_cmd->add_option("path", inspect_path, "file to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (seed_set) {
      cfg.global_seed = seed;
      cfg.derive_seeds();
    }
    if (threads >= 0) cfg.threads = threads;
    if (!out_dir.empty()) {
      // Re-derive default paths under the new directory.
      PathsConfig paths;
      paths.out_dir = out_dir;
      paths.resolve();
      cfg.paths = paths;
    }
    if (!m_list.empty()) cfg.eval.m_list = parse_int_list(m_list);
    if (!snr_grid.empty()) cfg.eval.snr_grid_db = parse_double_list(snr_grid);

    if (generate->parsed()) {
      cmd_generate(cfg);
    } else if (train_cmd->parsed()) {
      cmd_train(cfg, retrain_only);
    } else if (eval_cmd->parsed()) {
      cmd_eval(cfg);
    } else if (inspect_cmd->parsed()) {
      cmd_inspect(inspect_path);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  }
}

}  // namespace beamccs
