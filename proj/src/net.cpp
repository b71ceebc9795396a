#include "beamccs/net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "beamccs/io_util.hpp"

namespace beamccs {

namespace {

constexpr char kMagic[8] = {'B', 'C', 'C', 'S', 'N', 'E', 'T', '1'};
constexpr double kProbFloor = 1e-30;
// Fixed accumulation chunk: batch gradients are summed per chunk and then
// across chunks in index order, so results do not depend on thread count.
constexpr int kChunk = 16;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void matvec(const RealMatrix& w, std::span<const double> in,
            std::span<double> out) {
  const int rows = w.rows();
  const int cols = w.cols();
  const double* wd = w.data().data();
  for (int i = 0; i < rows; ++i) {
    const double* row = wd + static_cast<std::size_t>(i) * cols;
    double acc = 0.0;
    for (int j = 0; j < cols; ++j) acc += row[j] * in[j];
    out[i] = acc;
  }
}

void matvec_t(const RealMatrix& w, std::span<const double> in,
              std::span<double> out) {
  const int rows = w.rows();
  const int cols = w.cols();
  const double* wd = w.data().data();
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < rows; ++i) {
    const double* row = wd + static_cast<std::size_t>(i) * cols;
    const double d = in[i];
    for (int j = 0; j < cols; ++j) out[j] += row[j] * d;
  }
}

void outer_acc(RealMatrix& dw, std::span<const double> d,
               std::span<const double> a) {
  const int rows = dw.rows();
  const int cols = dw.cols();
  double* gd = dw.data().data();
  for (int i = 0; i < rows; ++i) {
    double* row = gd + static_cast<std::size_t>(i) * cols;
    const double di = d[i];
    for (int j = 0; j < cols; ++j) row[j] += di * a[j];
  }
}

struct FcWs {
  std::vector<double> a0, z1, a1, z2, a2, z3, a3, logits, probs;
  std::vector<double> d1, d2, d3, dlog, d0;

  explicit FcWs(const std::array<int, 5>& dims)
      : a0(dims[0]),
        z1(dims[1]),
        a1(dims[1]),
        z2(dims[2]),
        a2(dims[2]),
        z3(dims[3]),
        a3(dims[3]),
        logits(dims[4]),
        probs(dims[4]),
        d1(dims[1]),
        d2(dims[2]),
        d3(dims[3]),
        dlog(dims[4]),
        d0(dims[0]) {}
};

void relu(std::span<const double> z, std::span<double> a) {
  for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > 0.0 ? z[i] : 0.0;
}

void relu_mask(std::span<const double> z, std::span<double> d) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] <= 0.0) d[i] = 0.0;
  }
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - top);
    sum += probs[i];
  }
  for (double& p : probs) p /= sum;
}

/// Runs the cascade on ws.a0 and returns the cross-entropy loss.
double fc_forward(const std::array<RealMatrix, 4>& w, FcWs& ws, int label) {
  matvec(w[0], ws.a0, ws.z1);
  relu(ws.z1, ws.a1);
  matvec(w[1], ws.a1, ws.z2);
  relu(ws.z2, ws.a2);
  matvec(w[2], ws.a2, ws.z3);
  relu(ws.z3, ws.a3);
  matvec(w[3], ws.a3, ws.logits);
  softmax(ws.logits, ws.probs);
  return -std::log(std::max(ws.probs[label], kProbFloor));
}

/// Accumulates dL/dw into dw; fills ws.d0 with dL/d(input) when wanted.
void fc_backward(const std::array<RealMatrix, 4>& w, FcWs& ws, int label,
                 std::array<RealMatrix, 4>& dw, bool want_d0) {
  std::copy(ws.probs.begin(), ws.probs.end(), ws.dlog.begin());
  ws.dlog[label] -= 1.0;
  outer_acc(dw[3], ws.dlog, ws.a3);
  matvec_t(w[3], ws.dlog, ws.d3);
  relu_mask(ws.z3, ws.d3);
  outer_acc(dw[2], ws.d3, ws.a2);
  matvec_t(w[2], ws.d3, ws.d2);
  relu_mask(ws.z2, ws.d2);
  outer_acc(dw[1], ws.d2, ws.a1);
  matvec_t(w[1], ws.d2, ws.d1);
  relu_mask(ws.z1, ws.d1);
  outer_acc(dw[0], ws.d1, ws.a0);
  if (want_d0) matvec_t(w[0], ws.d1, ws.d0);
}

/// dL/dP via the measurement's linearity in the filter:
/// y_R[m] = sum_{s,a,b} x(s, r+a, c+b) P_s(a,b), y_I[m] likewise at column
/// offset 2N, so each filter tap accumulates the tensor entry it touched.
void conv_grad_acc(const RestructuredChannel& x, const SubsamplingSet& omega,
                   std::span<const double> d0, RealMatrix& g_pr,
                   RealMatrix& g_pi) {
  const int n = x.n;
  const int m = omega.size();
  const std::size_t row_stride = static_cast<std::size_t>(4) * n;
  const std::size_t slice_stride = static_cast<std::size_t>(2) * n * row_stride;
  for (int k = 0; k < m; ++k) {
    const auto [r, c] = omega.coords[k];
    const double dyr = d0[k];
    const double dyi = d0[m + k];
    for (int a = 0; a < n; ++a) {
      const double* row_r = x.data.data() + (r + a) * row_stride + c;
      const double* row_i = row_r + 2 * n;
      double* gr = &g_pr(a, 0);
      double* gi = &g_pi(a, 0);
      for (int b = 0; b < n; ++b) {
        gr[b] += dyr * row_r[b] + dyi * row_i[b];
        gi[b] += dyr * row_r[b + slice_stride] + dyi * row_i[b + slice_stride];
      }
    }
  }
}

Gradients zero_gradients(const NetworkParams& params) {
  Gradients g;
  g.p_r = RealMatrix(params.n, params.n);
  g.p_i = RealMatrix(params.n, params.n);
  const auto dims = NetworkParams::layer_dims(params.n, params.m);
  for (int k = 0; k < 4; ++k) g.w[k] = RealMatrix(dims[k + 1], dims[k]);
  return g;
}

void add_scaled(RealMatrix& acc, const RealMatrix& src, double s) {
  double* a = acc.data().data();
  const double* b = src.data().data();
  for (std::size_t k = 0; k < acc.size(); ++k) a[k] += s * b[k];
}

/// Gathers measurements for one restructured channel and adds per-component
/// noise; draw order (re, im) per measurement matches add_awgn.
void measure_with_noise(const NetworkParams& params,
                        const RestructuredChannel& x,
                        const SubsamplingSet& omega, double sigma2, Rng& rng,
                        std::span<double> a0) {
  const int m = omega.size();
  conv_measure_at(x, params.p_r, params.p_i, omega, a0.subspan(0, m),
                  a0.subspan(m, m));
  if (sigma2 > 0.0) {
    const double s = std::sqrt(sigma2 / 2.0);
    for (int k = 0; k < m; ++k) {
      a0[k] += s * rng.gaussian();
      a0[m + k] += s * rng.gaussian();
    }
  }
}

struct AdamState {
  std::vector<std::vector<double>> m, v;
  int t = 0;
};

void optimizer_step(std::vector<std::span<double>>& weights,
                    std::vector<std::span<const double>>& grads,
                    AdamState& state, const TrainConfig& cfg) {
  if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
    for (std::size_t k = 0; k < weights.size(); ++k) {
      for (std::size_t i = 0; i < weights[k].size(); ++i) {
        weights[k][i] -= cfg.learning_rate * grads[k][i];
      }
    }
    return;
  }
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++state.t;
  const double corr =
      std::sqrt(1.0 - std::pow(b2, state.t)) / (1.0 - std::pow(b1, state.t));
  const double lr = cfg.learning_rate * corr;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < weights[k].size(); ++i) {
      const double g = grads[k][i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      weights[k][i] -= lr * m[i] / (std::sqrt(v[i]) + eps);
    }
  }
}

AdamState make_adam(const std::vector<std::span<double>>& weights) {
  AdamState s;
  for (const auto& w : weights) {
    s.m.emplace_back(w.size(), 0.0);
    s.v.emplace_back(w.size(), 0.0);
  }
  return s;
}

void fisher_yates(std::vector<int>& idx, Rng& rng) {
  for (std::size_t k = 0; k + 1 < idx.size(); ++k) {
    const std::size_t pick = k + rng.uniform_below(idx.size() - k);
    std::swap(idx[k], idx[pick]);
  }
}

double sigma2_from_snr_db(double snr_db) {
  return std::pow(10.0, -snr_db / 10.0);
}

// Seed streams hung off TrainConfig::train_seed.
constexpr std::uint64_t kStreamInit = 1;
constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamSnr = 3;
constexpr std::uint64_t kStreamNoise = 4;

}  // namespace

void TrainConfig::validate(int n) const {
  require(epochs >= 0, "TrainConfig: epochs must be nonnegative");
  require(batch_size >= 1, "TrainConfig: batch_size must be positive");
  require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
  require(train_snr_lo_db <= train_snr_hi_db,
          "TrainConfig: SNR range must satisfy lo <= hi");
  require(m >= 1 && m <= n * n, "TrainConfig: M out of range");
}

std::array<int, 5> NetworkParams::layer_dims(int n, int m) {
  return {2 * m, 80, 256, 512, n * n};
}

BaseMatrix NetworkParams::base() const {
  BaseMatrix b;
  b.p = ComplexMatrix(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) b.p(r, c) = cplx(p_r(r, c), p_i(r, c));
  }
  b.quantized = conv_frozen;
  b.q = q;
  b.phase_idx = conv_phase_idx;
  return b;
}

NetworkParams init_params(int n, int m, int q, std::uint64_t seed) {
  require(n >= 1 && m >= 1 && m <= n * n, "init_params: bad dimensions");
  require(q >= 1, "init_params: q must be at least 1");
  NetworkParams params;
  params.n = n;
  params.m = m;
  params.q = q;
  Rng conv_rng(derive_seed(seed, 0));
  const BaseMatrix start = random_base(n, q, conv_rng);
  params.p_r = RealMatrix(n, n);
  params.p_i = RealMatrix(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      params.p_r(r, c) = start.p(r, c).real();
      params.p_i(r, c) = start.p(r, c).imag();
    }
  }
  const auto dims = NetworkParams::layer_dims(n, m);
  for (int k = 0; k < 4; ++k) {
    params.w[k] = RealMatrix(dims[k + 1], dims[k]);
    Rng rng(derive_seed(seed, 1 + k));
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[k]));
    for (double& x : params.w[k].data()) x = rng.uniform(-bound, bound);
  }
  return params;
}

std::vector<double> forward(const NetworkParams& params,
                            const RestructuredChannel& x,
                            const SubsamplingSet& omega, double sigma2,
                            Rng& rng) {
  require(x.n == params.n, "forward: channel size does not match network");
  require(omega.size() == params.m,
          "forward: omega size does not match measurement count");
  require(sigma2 >= 0.0, "forward: noise variance must be nonnegative");
  FcWs ws(NetworkParams::layer_dims(params.n, params.m));
  measure_with_noise(params, x, omega, sigma2, rng, ws.a0);
  fc_forward(params.w, ws, 0);
  return ws.probs;
}

double loss(std::span<const double> probs, BeamIndex label, int n) {
  require(label.i >= 0 && label.i < n && label.j >= 0 && label.j < n,
          "loss: label out of range");
  require(probs.size() == static_cast<std::size_t>(n) * n,
          "loss: probability vector has wrong length");
  return -std::log(std::max(probs[label.to_class(n)], kProbFloor));
}

Gradients gradients(const NetworkParams& params, std::span<const Sample> batch,
                    const SubsamplingSet& omega, double sigma2,
                    std::uint64_t noise_seed, double* mean_loss) {
  require(!batch.empty(), "gradients: batch is empty");
  require(omega.size() == params.m, "gradients: omega size mismatch");
  const int count = static_cast<int>(batch.size());
  const int nchunks = (count + kChunk - 1) / kChunk;
  std::vector<Gradients> partial(nchunks, zero_gradients(params));
  std::vector<double> chunk_loss(nchunks, 0.0);
  const auto dims = NetworkParams::layer_dims(params.n, params.m);
  const bool train_conv = !params.conv_frozen;

#pragma omp parallel for schedule(static)
  for (int ch = 0; ch < nchunks; ++ch) {
    FcWs ws(dims);
    Gradients& g = partial[ch];
    const int lo = ch * kChunk;
    const int hi = std::min(count, lo + kChunk);
    for (int i = lo; i < hi; ++i) {
      const Sample& s = batch[i];
      Rng rng(derive_seed(noise_seed, static_cast<std::uint64_t>(i)));
      measure_with_noise(params, s.x, omega, sigma2, rng, ws.a0);
      chunk_loss[ch] += fc_forward(params.w, ws, s.label.to_class(params.n));
      fc_backward(params.w, ws, s.label.to_class(params.n), g.w, train_conv);
      if (train_conv) conv_grad_acc(s.x, omega, ws.d0, g.p_r, g.p_i);
    }
  }

  Gradients total = std::move(partial[0]);
  double loss_sum = chunk_loss[0];
  for (int ch = 1; ch < nchunks; ++ch) {
    add_scaled(total.p_r, partial[ch].p_r, 1.0);
    add_scaled(total.p_i, partial[ch].p_i, 1.0);
    for (int k = 0; k < 4; ++k) add_scaled(total.w[k], partial[ch].w[k], 1.0);
    loss_sum += chunk_loss[ch];
  }
  const double inv = 1.0 / count;
  for (double& x : total.p_r.data()) x *= inv;
  for (double& x : total.p_i.data()) x *= inv;
  for (int k = 0; k < 4; ++k) {
    for (double& x : total.w[k].data()) x *= inv;
  }
  if (mean_loss != nullptr) *mean_loss = loss_sum * inv;
  return total;
}

namespace {

void restructure_into(const ComplexMatrix& h, RestructuredChannel& x) {
  const int n = h.rows();
  x.n = n;
  x.data.assign(static_cast<std::size_t>(2) * (2 * n) * (4 * n), 0.0);
  const std::size_t row_stride = static_cast<std::size_t>(4) * n;
  const std::size_t slice_stride = static_cast<std::size_t>(2) * n * row_stride;
  for (int r = 0; r < 2 * n; ++r) {
    for (int c = 0; c < 2 * n; ++c) {
      const cplx z = h(r % n, c % n);
      double* s0 = x.data.data() + r * row_stride + c;
      s0[0] = z.real();
      s0[2 * n] = z.imag();
      double* s1 = s0 + slice_stride;
      s1[0] = -z.imag();
      s1[2 * n] = z.real();
    }
  }
}

/// Core FC-only loop over precomputed noiseless features.
FcTrainResult train_fc_core(const RealMatrix& features,
                            std::span<const BeamIndex> labels, int n,
                            const TrainConfig& cfg,
                            std::array<RealMatrix, 4> w) {
  const int count = features.rows();
  const auto dims = NetworkParams::layer_dims(n, cfg.m);
  require(features.cols() == dims[0],
          "train_fc_on_features: feature width must be 2M");
  require(static_cast<int>(labels.size()) == count,
          "train_fc_on_features: label count mismatch");

  std::vector<std::span<double>> tensors;
  for (auto& wk : w) tensors.push_back(wk.data());
  AdamState adam = make_adam(tensors);

  Rng shuffle_rng(derive_seed(cfg.train_seed, kStreamShuffle));
  Rng snr_rng(derive_seed(cfg.train_seed, kStreamSnr));
  const std::uint64_t noise_master = derive_seed(cfg.train_seed, kStreamNoise);

  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_loss;
  std::uint64_t step_counter = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    fisher_yates(order, shuffle_rng);
    double loss_sum = 0.0;
    for (int b0 = 0; b0 < count; b0 += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, count - b0);
      const double sigma2 = sigma2_from_snr_db(
          snr_rng.uniform(cfg.train_snr_lo_db, cfg.train_snr_hi_db));
      const std::uint64_t step_seed = derive_seed(noise_master, step_counter++);

      const int nchunks = (bs + kChunk - 1) / kChunk;
      std::vector<std::array<RealMatrix, 4>> partial(nchunks);
      for (auto& p : partial) {
        for (int k = 0; k < 4; ++k) p[k] = RealMatrix(dims[k + 1], dims[k]);
      }
      std::vector<double> chunk_loss(nchunks, 0.0);

#pragma omp parallel for schedule(static)
      for (int ch = 0; ch < nchunks; ++ch) {
        FcWs ws(dims);
        const int lo = ch * kChunk;
        const int hi = std::min(bs, lo + kChunk);
        for (int i = lo; i < hi; ++i) {
          const int idx = order[b0 + i];
          Rng rng(derive_seed(step_seed, static_cast<std::uint64_t>(i)));
          const double* row =
              features.data().data() + static_cast<std::size_t>(idx) * dims[0];
          std::copy(row, row + dims[0], ws.a0.begin());
          if (sigma2 > 0.0) {
            const double s = std::sqrt(sigma2 / 2.0);
            for (int k = 0; k < cfg.m; ++k) {
              ws.a0[k] += s * rng.gaussian();
              ws.a0[cfg.m + k] += s * rng.gaussian();
            }
          }
          const int label = labels[idx].to_class(n);
          chunk_loss[ch] += fc_forward(w, ws, label);
          fc_backward(w, ws, label, partial[ch], false);
        }
      }

      std::array<RealMatrix, 4> grad = std::move(partial[0]);
      double batch_loss = chunk_loss[0];
      for (int ch = 1; ch < nchunks; ++ch) {
        for (int k = 0; k < 4; ++k) add_scaled(grad[k], partial[ch][k], 1.0);
        batch_loss += chunk_loss[ch];
      }
      const double inv = 1.0 / bs;
      std::vector<std::span<const double>> gspans;
      for (int k = 0; k < 4; ++k) {
        for (double& x : grad[k].data()) x *= inv;
        gspans.push_back(grad[k].data());
      }
      optimizer_step(tensors, gspans, adam, cfg);
      loss_sum += batch_loss;
    }
    epoch_loss.push_back(loss_sum / count);
  }
  return {std::move(w), std::move(epoch_loss)};
}

/// Noiseless hardware measurements for every channel, row i = [y_R; y_I].
RealMatrix frozen_features(const Dataset& ds, const BaseMatrix& base,
                           const SubsamplingSet& omega) {
  const int count = static_cast<int>(ds.channels.size());
  const int m = omega.size();
  RealMatrix features(count, 2 * m);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    Rng unused(0);
    const std::vector<cplx> y =
        measure_hardware(ds.channels[i].h, base, omega, 0.0, unused);
    for (int k = 0; k < m; ++k) {
      features(i, k) = y[k].real();
      features(i, m + k) = y[k].imag();
    }
  }
  return features;
}

void check_train_inputs(const Dataset& ds, const TrainConfig& cfg) {
  require(ds.split == Split::train,
          "train: dataset must be the train split");
  require(ds.scaling == Scaling::per_channel,
          "train: train split must use per-channel scaling");
  require(!ds.channels.empty(), "train: dataset is empty");
  cfg.validate(ds.config.n_antennas);
}

}  // namespace

FcTrainResult train_fc_on_features(const RealMatrix& features,
                                   std::span<const BeamIndex> labels, int n,
                                   const TrainConfig& cfg,
                                   std::array<RealMatrix, 4> init_w) {
  cfg.validate(n);
  return train_fc_core(features, labels, n, cfg, std::move(init_w));
}

TrainResult train(const Dataset& trainset, const TrainConfig& cfg, int q) {
  check_train_inputs(trainset, cfg);
  const int n = trainset.config.n_antennas;
  Rng omega_rng(cfg.omega_seed);
  SubsamplingSet omega = sample_omega(n, cfg.m, omega_rng);
  NetworkParams params =
      init_params(n, cfg.m, q, derive_seed(cfg.train_seed, kStreamInit));
  return train_from(trainset, cfg, std::move(params), std::move(omega));
}

TrainResult train_from(const Dataset& trainset, const TrainConfig& cfg,
                       NetworkParams init, SubsamplingSet omega) {
  check_train_inputs(trainset, cfg);
  const int n = trainset.config.n_antennas;
  require(init.n == n, "train: network size does not match dataset");
  require(init.m == cfg.m && omega.size() == cfg.m,
          "train: measurement count mismatch between config, params and omega");
  omega.validate(n);

  const int count = static_cast<int>(trainset.channels.size());
  std::vector<BeamIndex> labels(count);
  for (int i = 0; i < count; ++i) labels[i] = trainset.channels[i].label;

  if (init.conv_frozen) {
    const RealMatrix features = frozen_features(trainset, init.base(), omega);
    FcTrainResult fc =
        train_fc_core(features, labels, n, cfg, std::move(init.w));
    init.w = std::move(fc.w);
    return {std::move(init), std::move(omega), std::move(fc.epoch_loss)};
  }

  NetworkParams params = std::move(init);
  std::vector<std::span<double>> tensors = {params.p_r.data(),
                                            params.p_i.data()};
  for (auto& wk : params.w) tensors.push_back(wk.data());
  AdamState adam = make_adam(tensors);

  Rng shuffle_rng(derive_seed(cfg.train_seed, kStreamShuffle));
  Rng snr_rng(derive_seed(cfg.train_seed, kStreamSnr));
  const std::uint64_t noise_master = derive_seed(cfg.train_seed, kStreamNoise);

  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> epoch_loss;
  std::uint64_t step_counter = 0;
  std::vector<Sample> batch(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    fisher_yates(order, shuffle_rng);
    double loss_sum = 0.0;
    for (int b0 = 0; b0 < count; b0 += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, count - b0);
      for (int i = 0; i < bs; ++i) {
        const Channel& ch = trainset.channels[order[b0 + i]];
        restructure_into(ch.h, batch[i].x);
        batch[i].label = ch.label;
      }
      const double sigma2 = sigma2_from_snr_db(
          snr_rng.uniform(cfg.train_snr_lo_db, cfg.train_snr_hi_db));
      const std::uint64_t step_seed = derive_seed(noise_master, step_counter++);
      double batch_loss = 0.0;
      const Gradients grad =
          gradients(params, std::span<const Sample>(batch.data(), bs), omega,
                    sigma2, step_seed, &batch_loss);
      std::vector<std::span<const double>> gspans = {grad.p_r.data(),
                                                     grad.p_i.data()};
      for (const auto& gw : grad.w) gspans.push_back(gw.data());
      optimizer_step(tensors, gspans, adam, cfg);
      loss_sum += batch_loss * bs;
    }
    epoch_loss.push_back(loss_sum / count);
  }
  return {std::move(params), std::move(omega), std::move(epoch_loss)};
}

TrainResult quantize_and_retrain(const NetworkParams& params,
                                 const Dataset& trainset,
                                 const TrainConfig& cfg,
                                 const SubsamplingSet& omega, int q) {
  NetworkParams frozen = params;
  const BaseMatrix quant = quantize_base(frozen.base().p, q);
  for (int r = 0; r < frozen.n; ++r) {
    for (int c = 0; c < frozen.n; ++c) {
      frozen.p_r(r, c) = quant.p(r, c).real();
      frozen.p_i(r, c) = quant.p(r, c).imag();
    }
  }
  frozen.q = q;
  frozen.conv_frozen = true;
  frozen.conv_phase_idx = quant.phase_idx;
  return train_from(trainset, cfg, std::move(frozen), omega);
}

std::vector<double> fc_logits(const NetworkParams& params,
                              std::span<const double> y) {
  const auto dims = NetworkParams::layer_dims(params.n, params.m);
  require(y.size() == static_cast<std::size_t>(dims[0]),
          "fc_logits: measurement vector must have length 2M");
  FcWs ws(dims);
  std::copy(y.begin(), y.end(), ws.a0.begin());
  matvec(params.w[0], ws.a0, ws.z1);
  relu(ws.z1, ws.a1);
  matvec(params.w[1], ws.a1, ws.z2);
  relu(ws.z2, ws.a2);
  matvec(params.w[2], ws.a2, ws.z3);
  relu(ws.z3, ws.a3);
  matvec(params.w[3], ws.a3, ws.logits);
  return ws.logits;
}

BeamIndex predict_beam(const NetworkParams& params, std::span<const double> y) {
  const std::vector<double> logits = fc_logits(params, y);
  int best = 0;
  for (int k = 1; k < static_cast<int>(logits.size()); ++k) {
    if (logits[k] > logits[best]) best = k;
  }
  return BeamIndex::from_class(best, params.n);
}

void save_checkpoint(const NetworkParams& params, const SubsamplingSet& omega,
                     const nlohmann::json& extra, const std::string& path) {
  std::vector<std::uint8_t> payload;
  const auto dims = NetworkParams::layer_dims(params.n, params.m);
  std::size_t total = 2 * params.p_r.size();
  for (int k = 0; k < 4; ++k) total += params.w[k].size();
  payload.reserve(total * 4);
  const auto put_tensor = [&payload](const RealMatrix& t) {
    for (double x : t.data()) put_f32(payload, static_cast<float>(x));
  };
  put_tensor(params.p_r);
  put_tensor(params.p_i);
  for (const auto& wk : params.w) put_tensor(wk);

  nlohmann::json manifest = extra;
  manifest["format"] = "beamccs-model";
  manifest["version"] = 1;
  manifest["n"] = params.n;
  manifest["m"] = params.m;
  manifest["q"] = params.q;
  manifest["layer_dims"] = dims;
  manifest["conv_frozen"] = params.conv_frozen;
  nlohmann::json omega_j = nlohmann::json::array();
  for (const auto& [r, c] : omega.coords) omega_j.push_back({r, c});
  manifest["omega"] = omega_j;
  if (params.conv_frozen) manifest["conv_phase_idx"] = params.conv_phase_idx;
  manifest["payload_checksum"] = to_hex64(fnv1a64(payload));
  write_framed(path, kMagic, manifest, payload);
}

Checkpoint load_checkpoint(const std::string& path) {
  const FramedFile file = read_framed(path, kMagic);
  const nlohmann::json& m = file.manifest;
  Checkpoint out;
  out.manifest = m;
  NetworkParams& params = out.params;
  try {
    if (m.at("format") != "beamccs-model" || m.at("version") != 1) {
      throw IoError(IoError::Kind::bad_manifest,
                    path + ": unsupported model format/version");
    }
    params.n = m.at("n").get<int>();
    params.m = m.at("m").get<int>();
    params.q = m.at("q").get<int>();
    params.conv_frozen = m.at("conv_frozen").get<bool>();
    for (const auto& coord : m.at("omega")) {
      out.omega.coords.emplace_back(coord.at(0).get<int>(),
                                    coord.at(1).get<int>());
    }
    if (params.conv_frozen) {
      params.conv_phase_idx =
          m.at("conv_phase_idx").get<std::vector<std::uint16_t>>();
    }
    if (to_hex64(fnv1a64(file.payload)) !=
        m.at("payload_checksum").get<std::string>()) {
      throw IoError(IoError::Kind::checksum_mismatch,
                    path + ": payload checksum mismatch");
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": manifest field missing or mistyped: " + e.what());
  }
  if (params.n < 1 || params.m < 1 || params.m > params.n * params.n) {
    throw IoError(IoError::Kind::structural, path + ": bad dimensions");
  }
  const auto dims = NetworkParams::layer_dims(params.n, params.m);
  if (m.at("layer_dims").get<std::vector<int>>() !=
      std::vector<int>(dims.begin(), dims.end())) {
    throw IoError(IoError::Kind::structural,
                  path + ": layer dims do not match N and M");
  }
  if (static_cast<int>(out.omega.coords.size()) != params.m) {
    throw IoError(IoError::Kind::structural,
                  path + ": omega size does not match M");
  }
  out.omega.validate(params.n);

  std::size_t total = 2 * static_cast<std::size_t>(params.n) * params.n;
  for (int k = 0; k < 4; ++k) {
    total += static_cast<std::size_t>(dims[k + 1]) * dims[k];
  }
  if (file.payload.size() < total * 4) {
    throw IoError(IoError::Kind::truncated, path + ": payload ends unexpectedly");
  }
  if (file.payload.size() > total * 4) {
    throw IoError(IoError::Kind::structural,
                  path + ": payload size does not match layer dims");
  }
  ByteReader reader(file.payload);
  const auto read_tensor = [&reader](RealMatrix& t) {
    for (double& x : t.data()) x = static_cast<double>(reader.f32());
  };
  params.p_r = RealMatrix(params.n, params.n);
  params.p_i = RealMatrix(params.n, params.n);
  read_tensor(params.p_r);
  read_tensor(params.p_i);
  for (int k = 0; k < 4; ++k) {
    params.w[k] = RealMatrix(dims[k + 1], dims[k]);
    read_tensor(params.w[k]);
  }
  if (params.conv_frozen) {
    if (params.conv_phase_idx.size() !=
        static_cast<std::size_t>(params.n) * params.n) {
      throw IoError(IoError::Kind::structural,
                    path + ": phase index count does not match N");
    }
    // The alphabet indices are authoritative; reconstruct the filter exactly.
    for (int r = 0; r < params.n; ++r) {
      for (int c = 0; c < params.n; ++c) {
        const int b =
            params.conv_phase_idx[static_cast<std::size_t>(r) * params.n + c];
        if (b < 1 || b > (1 << params.q)) {
          throw IoError(IoError::Kind::structural,
                        path + ": phase index outside {1..2^q}");
        }
        const cplx z = alphabet_entry(b, params.q, params.n);
        params.p_r(r, c) = z.real();
        params.p_i(r, c) = z.imag();
      }
    }
  }
  return out;
}

}  // namespace beamccs
