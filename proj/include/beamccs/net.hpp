#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "beamccs/ccs.hpp"
#include "beamccs/channelgen.hpp"
#include "beamccs/numkit.hpp"
#include "beamccs/rng.hpp"

namespace beamccs {

struct TrainConfig {
  int epochs = 30;
  int batch_size = 128;
  double learning_rate = 1e-3;
  enum class Optimizer { adam, sgd };
  Optimizer optimizer = Optimizer::adam;
  // Per-batch sensing SNR in dB, drawn uniformly from [lo, hi]; SNR = 1/sigma^2.
  double train_snr_lo_db = 0.0;
  double train_snr_hi_db = 20.0;
  int m = 10;  // measurement count
  std::uint64_t omega_seed = 1;
  std::uint64_t train_seed = 2;

  void validate(int n) const;
};

/// All trainable state: the measurement filter (base-matrix real and
/// imaginary parts) feeding four bias-free fully connected layers,
/// 2M -> 80 -> 256 -> 512 -> N^2, ReLU on the hidden layers and softmax at
/// the output. No layer has a bias, which makes the class scores positively
/// homogeneous in the channel.
struct NetworkParams {
  int n = 0;
  int m = 0;
  int q = 0;  // phase bits used when the filter is (or gets) quantized
  RealMatrix p_r, p_i;
  std::array<RealMatrix, 4> w;  // w[k] maps dims[k] -> dims[k+1], row-major
  bool conv_frozen = false;
  std::vector<std::uint16_t> conv_phase_idx;  // alphabet indices when frozen

  static std::array<int, 5> layer_dims(int n, int m);

  /// The measurement filter viewed as a base matrix (quantized iff frozen).
  BaseMatrix base() const;
};

/// Fresh parameters: FC weights uniform in +/- 1/sqrt(fan_in), measurement
/// filter started from a random q-bit base matrix (trainable, magnitudes 1/N).
NetworkParams init_params(int n, int m, int q, std::uint64_t seed);

/// Full pipeline on one restructured channel: subsampled convolution at
/// omega, AWGN of variance sigma2/2 per component, feature vector
/// [y_R; y_I], FC cascade, softmax. Returns the N^2 class probabilities.
std::vector<double> forward(const NetworkParams& params,
                            const RestructuredChannel& x,
                            const SubsamplingSet& omega, double sigma2,
                            Rng& rng);

/// Cross entropy -log p[label], with p floored at 1e-30.
double loss(std::span<const double> probs, BeamIndex label, int n);

struct Sample {
  RestructuredChannel x;
  BeamIndex label;
};

struct Gradients {
  RealMatrix p_r, p_i;
  std::array<RealMatrix, 4> w;
};

/// Mean cross-entropy gradient over the batch. Noise draws are derived from
/// (noise_seed, sample position) so results are bit-identical for any thread
/// count; samples are accumulated chunk-wise in a fixed order. Conv
/// gradients are identically zero when the filter is frozen.
Gradients gradients(const NetworkParams& params, std::span<const Sample> batch,
                    const SubsamplingSet& omega, double sigma2,
                    std::uint64_t noise_seed, double* mean_loss = nullptr);

struct TrainResult {
  NetworkParams params;
  SubsamplingSet omega;
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

/// End-to-end training on a per-channel-scaled train split. Omega is sampled
/// once from cfg.omega_seed and held fixed. Deterministic given the seeds.
/// q seeds the filter's initial phase grid and is recorded for quantization.
TrainResult train(const Dataset& trainset, const TrainConfig& cfg, int q = 3);

/// Same loop from explicit initial parameters and a fixed omega. When
/// init.conv_frozen, only the FC layers are updated (the noiseless
/// measurements are precomputed once per channel).
TrainResult train_from(const Dataset& trainset, const TrainConfig& cfg,
                       NetworkParams init, SubsamplingSet omega);

/// Replaces the filter by its q-bit phase-quantized version, freezes it and
/// retrains the FC layers for cfg.epochs. The filter is not touched by the
/// retraining loop.
TrainResult quantize_and_retrain(const NetworkParams& params,
                                 const Dataset& trainset,
                                 const TrainConfig& cfg,
                                 const SubsamplingSet& omega, int q);

/// Class logits of the FC cascade for a 2M measurement vector.
std::vector<double> fc_logits(const NetworkParams& params,
                              std::span<const double> y);

/// Argmax class decoded to (idx / N, idx mod N); ties take the smallest
/// class index.
BeamIndex predict_beam(const NetworkParams& params, std::span<const double> y);

/// FC-only training on precomputed 2M feature vectors (one row per channel).
/// Shared by the frozen-filter path and the unstructured baseline.
struct FcTrainResult {
  std::array<RealMatrix, 4> w;
  std::vector<double> epoch_loss;
};
FcTrainResult train_fc_on_features(const RealMatrix& features,
                                   std::span<const BeamIndex> labels, int n,
                                   const TrainConfig& cfg,
                                   std::array<RealMatrix, 4> init_w);

/// Checkpoint file: JSON manifest (dims, omega, quantization state, caller
/// extras) + little-endian f32 payload per layer. A frozen filter is stored
/// as alphabet indices and reconstructed exactly on load.
void save_checkpoint(const NetworkParams& params, const SubsamplingSet& omega,
                     const nlohmann::json& extra, const std::string& path);

struct Checkpoint {
  NetworkParams params;
  SubsamplingSet omega;
  nlohmann::json manifest;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace beamccs
