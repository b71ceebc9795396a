// Timings for the parallel kernels against their serial references:
// correlation fast paths vs the direct quadruple loop, and the batch-level
// OpenMP loops (generation, gradients, evaluation) at 1 vs all threads.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "beamccs/ccs.hpp"
#include "beamccs/channelgen.hpp"
#include "beamccs/eval.hpp"
#include "beamccs/net.hpp"
#include "beamccs/parallel.hpp"

using namespace beamccs;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  fn();  // warm-up
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < reps; ++k) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void row(const std::string& name, double serial_ms, double fast_ms) {
  std::printf("%-38s %10.3f ms %10.3f ms %8.2fx\n", name.c_str(), serial_ms,
              fast_ms, serial_ms / fast_ms);
}

}  // namespace

int main() {
  const int threads = max_threads();
  std::printf("%-38s %13s %13s %9s\n", "kernel", "serial", "fast/parallel",
              "speedup");

  {
    Rng rng(7);
    const int n = 16;
    ComplexMatrix h(n, n), p(n, n);
    for (cplx& z : h.data()) z = rng.cgaussian(1.0);
    for (cplx& z : p.data()) z = rng.cgaussian(1.0);
    const double direct = time_ms([&] { circ_xcorr_direct(h, p); }, 50);
    const double fft = time_ms([&] { circ_xcorr_fft(h, p); }, 50);
    row("circ_xcorr N=16 (direct vs fft)", direct, fft);

    const RestructuredChannel x = restructure_channel(h);
    RealMatrix pr(n, n), pi(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        pr(r, c) = p(r, c).real();
        pi(r, c) = p(r, c).imag();
      }
    }
    Rng orng(3);
    const SubsamplingSet omega = sample_omega(n, 10, orng);
    std::vector<double> yr(10), yi(10);
    const double full = time_ms([&] { conv_measure(x, pr, pi); }, 50);
    const double gather =
        time_ms([&] { conv_measure_at(x, pr, pi, omega, yr, yi); }, 50);
    row("conv_measure (full map vs gather M=10)", full, gather);
  }

  ScenarioConfig scenario;
  scenario.seed = 11;
  {
    const auto gen = [&] { generate_dataset(scenario, 2000, 1); };
    set_num_threads(1);
    const double serial = time_ms(gen, 3);
    set_num_threads(0);
    const double parallel = time_ms(gen, 3);
    char name[64];
    std::snprintf(name, sizeof(name), "generate 2000 channels (1 vs %d thr)",
                  threads);
    row(name, serial, parallel);
  }

  {
    auto [train_ds, test_ds] = generate_dataset(scenario, 256, 64);
    TrainConfig cfg;
    cfg.m = 10;
    NetworkParams params = init_params(16, 10, 3, 5);
    Rng orng(cfg.omega_seed);
    const SubsamplingSet omega = sample_omega(16, 10, orng);
    std::vector<Sample> batch(128);
    for (int i = 0; i < 128; ++i) {
      batch[i].x = restructure_channel(train_ds.channels[i].h);
      batch[i].label = train_ds.channels[i].label;
    }
    const auto grad = [&] { gradients(params, batch, omega, 0.01, 42); };
    set_num_threads(1);
    const double serial = time_ms(grad, 5);
    set_num_threads(0);
    const double parallel = time_ms(grad, 5);
    char name[64];
    std::snprintf(name, sizeof(name), "batch gradient 128 (1 vs %d thr)",
                  threads);
    row(name, serial, parallel);

    NetworkParams frozen = quantize_and_retrain(params, train_ds, [] {
                             TrainConfig c;
                             c.epochs = 0;
                             c.m = 10;
                             return c;
                           }(), omega, 3)
                               .params;
    const double snr[] = {0.0, 10.0};
    const auto ev = [&] { evaluate(frozen, test_ds, omega, snr, 9); };
    set_num_threads(1);
    const double eserial = time_ms(ev, 3);
    set_num_threads(0);
    const double eparallel = time_ms(ev, 3);
    std::snprintf(name, sizeof(name), "evaluate 64 channels (1 vs %d thr)",
                  threads);
    row(name, eserial, eparallel);
  }

  return 0;
}
