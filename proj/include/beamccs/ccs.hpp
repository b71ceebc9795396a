#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "beamccs/numkit.hpp"
#include "beamccs/rng.hpp"

namespace beamccs {

/// Ordered set of M distinct 2D circulant shifts on an N x N grid.
/// Measurement m reads G at coords[m]; the order is part of the contract.
struct SubsamplingSet {
  std::vector<std::pair<int, int>> coords;

  int size() const { return static_cast<int>(coords.size()); }

  /// Throws std::invalid_argument unless all coordinates are distinct and
  /// inside the n x n grid, with 1 <= M <= n^2.
  void validate(int n) const;
};

/// Base matrix of the circulant measurement scheme. When `quantized`, every
/// entry lies in the q-bit phase-shifter alphabet: magnitude 1/N, phase an
/// integer multiple of 2 pi / 2^q. `phase_idx` then stores the multiples
/// b(k,l) in {1..2^q}, row-major; the complex entries are derived from it.
struct BaseMatrix {
  ComplexMatrix p;
  bool quantized = false;
  int q = 0;
  std::vector<std::uint16_t> phase_idx;
};

/// Real 2N x 4N x 2 tensor feeding the convolutional measurement layer.
/// Slice 0 is [H_R,pad, H_I,pad], slice 1 is [-H_I,pad, H_R,pad], where each
/// pad block is the 2x2 circular tiling [A, A; A, A] of the N x N part.
struct RestructuredChannel {
  int n = 0;
  std::vector<double> data;  // [slice][row][col], 2 x 2n x 4n

  double at(int s, int r, int c) const {
    return data[(static_cast<std::size_t>(s) * 2 * n + r) * 4 * n + c];
  }
};

/// Circular cross-correlation G(r,c) = sum_{k,l} H(k,l) P((k-r) mod N,
/// (l-c) mod N), computed by the literal quadruple loop. This is the serial
/// reference implementation the fast paths are tested against.
ComplexMatrix circ_xcorr_direct(const ComplexMatrix& h, const ComplexMatrix& p);

/// Same correlation through the frequency domain (pointwise product of 2D
/// transforms). Matches circ_xcorr_direct to within floating-point error.
ComplexMatrix circ_xcorr_fft(const ComplexMatrix& h, const ComplexMatrix& p);

RestructuredChannel restructure_channel(const ComplexMatrix& h);

/// Correlates the two-slice filter (P_R, P_I) over the restructured tensor
/// in valid mode with stride 1, producing the (N+1) x (3N+1) map, and
/// extracts G_R (block at column 0) and G_I (block at column 2N).
/// G_R + j G_I equals circ_xcorr_direct(H, P_R + j P_I).
std::pair<RealMatrix, RealMatrix> conv_measure(const RestructuredChannel& x,
                                               const RealMatrix& p_r,
                                               const RealMatrix& p_i);

/// Evaluates the same valid-mode correlation only at the M anchors named by
/// omega, writing the gathered G_R / G_I entries into y_r / y_i.
void conv_measure_at(const RestructuredChannel& x, const RealMatrix& p_r,
                     const RealMatrix& p_i, const SubsamplingSet& omega,
                     std::span<double> y_r, std::span<double> y_i);

/// M distinct coordinates drawn uniformly without replacement from the
/// n x n grid; order is recorded and deterministic under the seed.
SubsamplingSet sample_omega(int n, int m, Rng& rng);

/// Gathers G at omega's coordinates, in order.
std::vector<cplx> subsample(const ComplexMatrix& g, const SubsamplingSet& omega);

/// Adds independent zero-mean Gaussian noise of variance sigma2 / 2 to the
/// real and imaginary part of every element (total complex variance sigma2).
std::vector<cplx> add_awgn(std::span<const cplx> y, double sigma2, Rng& rng);

/// Complex entry exp(j 2 pi b / 2^q) / n of the q-bit alphabet. Multiples of
/// a quarter turn are exact.
cplx alphabet_entry(int b, int q, int n);

/// Rounds every entry's phase to the nearest multiple of 2 pi / 2^q (ties
/// toward the larger multiple) and fixes the magnitude to 1/N. Zero entries
/// have undefined phase; they map to phase index 2^q (phase 0) and are
/// counted in *zero_entries when provided.
BaseMatrix quantize_base(const ComplexMatrix& p, int q, int* zero_entries = nullptr);

/// Base matrix with entries i.i.d. uniform over the q-bit alphabet.
BaseMatrix random_base(int n, int q, Rng& rng);

/// Hardware acquisition path: y[m] = <H, circ_shift(P, omega[m])> + v[m]
/// with v complex Gaussian of variance sigma2. Requires a quantized base;
/// noise draw order matches add_awgn so the two paths agree exactly under
/// the same generator state.
std::vector<cplx> measure_hardware(const ComplexMatrix& h, const BaseMatrix& base,
                                   const SubsamplingSet& omega, double sigma2,
                                   Rng& rng);

/// JSON round-trip for base matrices: phase indices when quantized,
/// interleaved real/imaginary doubles otherwise.
void save_base(const BaseMatrix& base, const std::string& path);
BaseMatrix load_base(const std::string& path);

}  // namespace beamccs
