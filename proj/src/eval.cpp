#include "beamccs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "beamccs/io_util.hpp"

namespace beamccs {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void check_testset(const Dataset& testset) {
  require(testset.split == Split::test, "evaluate: dataset must be the test split");
  require(testset.scaling == Scaling::common,
          "evaluate: test split must use common scaling");
  require(!testset.channels.empty(), "evaluate: dataset is empty");
}

/// Class indices of the k largest logits, ties to the smaller index.
std::vector<int> top_classes(std::span<const double> logits, int k) {
  std::vector<int> idx(logits.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                    [&](int a, int b) {
                      if (logits[a] != logits[b]) return logits[a] > logits[b];
                      return a < b;
                    });
  idx.resize(k);
  return idx;
}

std::string json_path_for(const std::string& csv_path) {
  const auto dot = csv_path.rfind('.');
  if (dot == std::string::npos || csv_path.substr(dot) != ".csv") {
    return csv_path + ".json";
  }
  return csv_path.substr(0, dot) + ".json";
}

}  // namespace

BeamIndex exhaustive_best_beam(const ComplexMatrix& h) {
  require(h.rows() == h.cols(), "exhaustive_best_beam: channel must be square");
  bool nonzero = false;
  for (const cplx& z : h.data()) {
    if (z != cplx{}) {
      nonzero = true;
      break;
    }
  }
  require(nonzero, "exhaustive_best_beam: channel is identically zero");
  return argmax_abs(dft2(h));
}

double rate(const ComplexMatrix& x, BeamIndex beam, double sigma2) {
  require(sigma2 > 0.0, "rate: noise variance must be positive");
  require(beam.i >= 0 && beam.i < x.rows() && beam.j >= 0 && beam.j < x.cols(),
          "rate: beam index out of range");
  const double snr_bf = std::norm(x(beam.i, beam.j)) / sigma2;
  return std::log2(1.0 + snr_bf);
}

EvalReport evaluate_with_predictor(const Dataset& testset,
                                   std::span<const double> snr_grid_db,
                                   std::uint64_t seed, const std::string& method,
                                   int m, const RankedPredictor& predict) {
  check_testset(testset);
  require(!snr_grid_db.empty(), "evaluate: SNR grid is empty");
  const int n = testset.config.n_antennas;
  const int count = static_cast<int>(testset.channels.size());

  // Beamspace of every test channel, computed once.
  std::vector<ComplexMatrix> beamspace(count);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    beamspace[i] = dft2(testset.channels[i].h);
  }

  EvalReport report;
  report.method = method;
  report.m = m;
  report.snr_grid_db.assign(snr_grid_db.begin(), snr_grid_db.end());
  report.n_channels = count;
  report.seed = seed;

  for (std::size_t s = 0; s < snr_grid_db.size(); ++s) {
    const double sigma2 = std::pow(10.0, -snr_grid_db[s] / 10.0);
    const std::uint64_t point_seed = derive_seed(seed, s);
    std::vector<double> rates(count);
    std::vector<int> hit1(count), hit5(count);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) {
      Rng rng(derive_seed(point_seed, static_cast<std::uint64_t>(i)));
      const std::vector<int> ranked = predict(i, sigma2, rng);
      const int label = testset.channels[i].label.to_class(n);
      rates[i] = rate(beamspace[i], BeamIndex::from_class(ranked.front(), n),
                      sigma2);
      hit1[i] = ranked.front() == label ? 1 : 0;
      const auto last = ranked.begin() + std::min<std::size_t>(5, ranked.size());
      hit5[i] = std::find(ranked.begin(), last, label) != last ? 1 : 0;
    }
    report.mean_rate.push_back(
        std::accumulate(rates.begin(), rates.end(), 0.0) / count);
    report.top1_accuracy.push_back(
        std::accumulate(hit1.begin(), hit1.end(), 0.0) / count);
    report.top5_accuracy.push_back(
        std::accumulate(hit5.begin(), hit5.end(), 0.0) / count);
  }
  return report;
}

EvalReport evaluate(const NetworkParams& params, const Dataset& testset,
                    const SubsamplingSet& omega,
                    std::span<const double> snr_grid_db, std::uint64_t seed) {
  check_testset(testset);
  require(params.conv_frozen,
          "evaluate: hardware path requires a quantized (frozen) filter");
  require(params.n == testset.config.n_antennas,
          "evaluate: network size does not match dataset");
  require(omega.size() == params.m, "evaluate: omega size mismatch");
  const BaseMatrix base = params.base();
  const int m = params.m;

  const RankedPredictor predict = [&](int idx, double sigma2, Rng& rng) {
    const std::vector<cplx> y = measure_hardware(testset.channels[idx].h, base,
                                                 omega, sigma2, rng);
    std::vector<double> features(2 * m);
    for (int k = 0; k < m; ++k) {
      features[k] = y[k].real();
      features[m + k] = y[k].imag();
    }
    const std::vector<double> logits = fc_logits(params, features);
    return top_classes(logits, std::min<int>(5, logits.size()));
  };
  return evaluate_with_predictor(testset, snr_grid_db, seed, "learned-ccs", m,
                                 predict);
}

EvalReport exhaustive_report(const Dataset& testset,
                             std::span<const double> snr_grid_db) {
  check_testset(testset);
  const int n = testset.config.n_antennas;
  const RankedPredictor predict = [&](int idx, double, Rng&) {
    return std::vector<int>{testset.channels[idx].label.to_class(n)};
  };
  EvalReport report = evaluate_with_predictor(testset, snr_grid_db, 0,
                                              "exhaustive", n * n, predict);
  return report;
}

EvalReport baseline_random_ccs(const Dataset& trainset, const Dataset& testset,
                               const TrainConfig& cfg, int q,
                               std::span<const double> snr_grid_db,
                               std::uint64_t seed) {
  const int n = trainset.config.n_antennas;
  Rng base_rng(derive_seed(seed, 1));
  const BaseMatrix base = random_base(n, q, base_rng);

  NetworkParams params =
      init_params(n, cfg.m, q, derive_seed(cfg.train_seed, 1));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      params.p_r(r, c) = base.p(r, c).real();
      params.p_i(r, c) = base.p(r, c).imag();
    }
  }
  params.conv_frozen = true;
  params.conv_phase_idx = base.phase_idx;

  Rng omega_rng(cfg.omega_seed);
  SubsamplingSet omega = sample_omega(n, cfg.m, omega_rng);
  TrainResult trained = train_from(trainset, cfg, std::move(params), omega);

  EvalReport report = evaluate(trained.params, testset, trained.omega,
                               snr_grid_db, derive_seed(seed, 2));
  report.method = "random-ccs";
  return report;
}

EvalReport baseline_random_unstructured(const Dataset& trainset,
                                        const Dataset& testset,
                                        const TrainConfig& cfg, int q,
                                        std::span<const double> snr_grid_db,
                                        std::uint64_t seed) {
  const int n = trainset.config.n_antennas;
  cfg.validate(n);
  const int m = cfg.m;
  Rng mats_rng(derive_seed(seed, 1));
  std::vector<ComplexMatrix> mats;
  mats.reserve(m);
  for (int k = 0; k < m; ++k) mats.push_back(random_base(n, q, mats_rng).p);

  const auto noiseless = [&](const ComplexMatrix& h) {
    std::vector<cplx> y(m);
    for (int k = 0; k < m; ++k) y[k] = frob_inner(h, mats[k]);
    return y;
  };

  const int train_count = static_cast<int>(trainset.channels.size());
  RealMatrix features(train_count, 2 * m);
  std::vector<BeamIndex> labels(train_count);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < train_count; ++i) {
    const std::vector<cplx> y = noiseless(trainset.channels[i].h);
    for (int k = 0; k < m; ++k) {
      features(i, k) = y[k].real();
      features(i, m + k) = y[k].imag();
    }
    labels[i] = trainset.channels[i].label;
  }

  NetworkParams params =
      init_params(n, m, q, derive_seed(cfg.train_seed, 1));
  FcTrainResult fc =
      train_fc_on_features(features, labels, n, cfg, std::move(params.w));
  params.w = std::move(fc.w);

  const int test_count = static_cast<int>(testset.channels.size());
  std::vector<std::vector<cplx>> test_y(test_count);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < test_count; ++i) {
    test_y[i] = noiseless(testset.channels[i].h);
  }

  const RankedPredictor predict = [&](int idx, double sigma2, Rng& rng) {
    std::vector<double> f(2 * m);
    const double s = std::sqrt(sigma2 / 2.0);
    for (int k = 0; k < m; ++k) {
      const double re = test_y[idx][k].real() + s * rng.gaussian();
      const double im = test_y[idx][k].imag() + s * rng.gaussian();
      f[k] = re;
      f[m + k] = im;
    }
    const std::vector<double> logits = fc_logits(params, f);
    return top_classes(logits, std::min<int>(5, logits.size()));
  };
  EvalReport report =
      evaluate_with_predictor(testset, snr_grid_db, derive_seed(seed, 2),
                              "random-unstructured", m, predict);
  return report;
}

void export_report(std::span<const EvalReport> reports,
                   const std::string& csv_path) {
  std::string csv = "method,M,snr_db,mean_rate,top1,top5,n_channels\n";
  char buf[256];
  for (const EvalReport& r : reports) {
    for (std::size_t s = 0; s < r.snr_grid_db.size(); ++s) {
      std::snprintf(buf, sizeof(buf), "%s,%d,%.12g,%.12g,%.12g,%.12g,%d\n",
                    r.method.c_str(), r.m, r.snr_grid_db[s], r.mean_rate[s],
                    r.top1_accuracy[s], r.top5_accuracy[s], r.n_channels);
      csv += buf;
    }
  }
  write_file(csv_path, std::span<const std::uint8_t>(
                           reinterpret_cast<const std::uint8_t*>(csv.data()),
                           csv.size()));

  nlohmann::json j = nlohmann::json::array();
  for (const EvalReport& r : reports) {
    j.push_back({
        {"method", r.method},
        {"m", r.m},
        {"snr_grid_db", r.snr_grid_db},
        {"mean_rate", r.mean_rate},
        {"top1_accuracy", r.top1_accuracy},
        {"top5_accuracy", r.top5_accuracy},
        {"n_channels", r.n_channels},
        {"seed", r.seed},
    });
  }
  const std::string text = j.dump(2);
  write_file(json_path_for(csv_path),
             std::span<const std::uint8_t>(
                 reinterpret_cast<const std::uint8_t*>(text.data()),
                 text.size()));
}

std::vector<EvalReport> load_reports_json(const std::string& path) {
  const auto bytes = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": not valid JSON: " + e.what());
  }
  std::vector<EvalReport> reports;
  try {
    for (const auto& item : j) {
      EvalReport r;
      r.method = item.at("method").get<std::string>();
      r.m = item.at("m").get<int>();
      r.snr_grid_db = item.at("snr_grid_db").get<std::vector<double>>();
      r.mean_rate = item.at("mean_rate").get<std::vector<double>>();
      r.top1_accuracy = item.at("top1_accuracy").get<std::vector<double>>();
      r.top5_accuracy = item.at("top5_accuracy").get<std::vector<double>>();
      r.n_channels = item.at("n_channels").get<int>();
      r.seed = item.at("seed").get<std::uint64_t>();
      reports.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": report field missing or mistyped: " + e.what());
  }
  return reports;
}

}  // namespace beamccs
