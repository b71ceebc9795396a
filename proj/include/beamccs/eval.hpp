#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "beamccs/channelgen.hpp"
#include "beamccs/net.hpp"
#include "beamccs/numkit.hpp"

namespace beamccs {

/// Per-SNR accuracy and achievable-rate statistics for one method.
struct EvalReport {
  std::string method;
  int m = 0;
  std::vector<double> snr_grid_db;
  std::vector<double> mean_rate;       // bits/s/Hz, predicted beam
  std::vector<double> top1_accuracy;
  std::vector<double> top5_accuracy;
  int n_channels = 0;
  std::uint64_t seed = 0;
};

/// Argmax of |dft2(H)| with lexicographic tie-breaking; the oracle every
/// predictor is measured against. Throws on an all-zero channel.
BeamIndex exhaustive_best_beam(const ComplexMatrix& h);

/// log2(1 + |X(beam)|^2 / sigma2) for beamspace X.
double rate(const ComplexMatrix& x, BeamIndex beam, double sigma2);

/// Ranked class indices (best first, at least one entry) predicted for test
/// channel `idx` under noise variance sigma2.
using RankedPredictor =
    std::function<std::vector<int>(int idx, double sigma2, Rng& rng)>;

/// Shared evaluation loop: per SNR point and channel, runs the predictor,
/// scores the predicted beam's rate against the channel's beamspace and
/// accumulates top-1/top-5 accuracy against the exhaustive label. Channels
/// evaluate in parallel under per-(snr, channel) derived seeds.
EvalReport evaluate_with_predictor(const Dataset& testset,
                                   std::span<const double> snr_grid_db,
                                   std::uint64_t seed, const std::string& method,
                                   int m, const RankedPredictor& predict);

/// Hardware-path evaluation of a trained network: circulant-shift
/// measurements of the frozen quantized filter, then the FC predictor.
/// Throws std::invalid_argument when the filter is not quantized.
EvalReport evaluate(const NetworkParams& params, const Dataset& testset,
                    const SubsamplingSet& omega,
                    std::span<const double> snr_grid_db, std::uint64_t seed);

/// Exhaustive-search upper bound (accuracy 1 by definition).
EvalReport exhaustive_report(const Dataset& testset,
                             std::span<const double> snr_grid_db);

/// Baseline: identical pipeline with the filter frozen from the start at a
/// random q-bit base matrix; only the FC layers train.
EvalReport baseline_random_ccs(const Dataset& trainset, const Dataset& testset,
                               const TrainConfig& cfg, int q,
                               std::span<const double> snr_grid_db,
                               std::uint64_t seed);

/// Baseline: M independent random q-bit matrices (no circulant structure),
/// measurements y[m] = <H, P[m]> + v[m], FC predictor trained on [y_R; y_I].
EvalReport baseline_random_unstructured(const Dataset& trainset,
                                        const Dataset& testset,
                                        const TrainConfig& cfg, int q,
                                        std::span<const double> snr_grid_db,
                                        std::uint64_t seed);

/// Writes one CSV row per method x SNR point plus a JSON mirror next to it
/// (same path with the extension replaced by .json).
void export_report(std::span<const EvalReport> reports,
                   const std::string& csv_path);

std::vector<EvalReport> load_reports_json(const std::string& path);

}  // namespace beamccs
