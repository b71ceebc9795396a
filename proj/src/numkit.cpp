#include "beamccs/numkit.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamccs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// In-place radix-2 Cooley-Tukey, unscaled. sign = -1 forward, +1 inverse
/// kernel. n must be a power of two.
void fft_pow2(std::span<cplx> x, int sign) {
  const std::size_t n = x.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * kTwoPi / static_cast<double>(len);
    const cplx wl = std::polar(1.0, ang);
    for (std::size_t i = 0; i < n; i += len) {
      cplx w{1.0, 0.0};
      for (std::size_t k = 0; k < len / 2; ++k) {
        const cplx u = x[i + k];
        const cplx v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

/// Unscaled DFT of arbitrary length, O(n^2). Fallback for non power-of-two.
void dft_naive(std::span<cplx> x, int sign) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{};
    for (std::size_t l = 0; l < n; ++l) {
      acc += x[l] * std::polar(1.0, sign * kTwoPi * static_cast<double>(k * l) /
                                        static_cast<double>(n));
    }
    out[k] = acc;
  }
  std::copy(out.begin(), out.end(), x.begin());
}

void transform_1d(std::span<cplx> x, int sign) {
  if (std::has_single_bit(x.size())) {
    fft_pow2(x, sign);
  } else {
    dft_naive(x, sign);
  }
}

/// Applies the unscaled length-N transform to every row and every column,
/// then multiplies by `scale`. Equivalent to scale * F A F with
/// F(k,l) = exp(sign * j 2 pi k l / N).
ComplexMatrix transform_2d(const ComplexMatrix& a, int sign, double scale) {
  const int n = a.rows();
  ComplexMatrix out = a;
  for (int r = 0; r < n; ++r) {
    transform_1d(out.data().subspan(static_cast<std::size_t>(r) * n, n), sign);
  }
  std::vector<cplx> col(n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) col[r] = out(r, c);
    transform_1d(col, sign);
    for (int r = 0; r < n; ++r) out(r, c) = col[r] * scale;
  }
  return out;
}

}  // namespace

RealMatrix::RealMatrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols) {
  require(rows >= 1 && cols >= 1, "RealMatrix: dimensions must be positive");
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

ComplexMatrix::ComplexMatrix(int rows, int cols, cplx fill)
    : rows_(rows), cols_(cols) {
  require(rows >= 1 && cols >= 1, "ComplexMatrix: dimensions must be positive");
  data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

ComplexMatrix::ComplexMatrix(int rows, int cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  require(rows >= 1 && cols >= 1, "ComplexMatrix: dimensions must be positive");
  require(data_.size() == static_cast<std::size_t>(rows) * cols,
          "ComplexMatrix: entry count does not match dimensions");
}

bool ComplexMatrix::all_finite() const {
  for (const cplx& z : data_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

cplx frob_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "frob_inner: dimension mismatch");
  cplx acc{};
  const auto av = a.data();
  const auto bv = b.data();
  for (std::size_t k = 0; k < av.size(); ++k) acc += av[k] * bv[k];
  return acc;
}

double fro_norm(const ComplexMatrix& a) {
  double acc = 0.0;
  for (const cplx& z : a.data()) acc += std::norm(z);
  return std::sqrt(acc);
}

ComplexMatrix dft2(const ComplexMatrix& h) {
  require(h.rows() == h.cols(), "dft2: input must be square");
  return transform_2d(h, -1, 1.0 / h.rows());
}

ComplexMatrix idft2(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), "idft2: input must be square");
  return transform_2d(a, +1, 1.0 / a.rows());
}

ComplexMatrix circ_shift(const ComplexMatrix& p, int r, int c) {
  const int rows = p.rows();
  const int cols = p.cols();
  const int rs = ((r % rows) + rows) % rows;
  const int cs = ((c % cols) + cols) % cols;
  ComplexMatrix out(rows, cols);
  for (int k = 0; k < rows; ++k) {
    const int src_r = (k - rs + rows) % rows;
    for (int l = 0; l < cols; ++l) {
      out(k, l) = p(src_r, (l - cs + cols) % cols);
    }
  }
  return out;
}

RealMatrix beam_pattern(const ComplexMatrix& p) {
  const ComplexMatrix z = idft2(p);
  RealMatrix out(z.rows(), z.cols());
  for (int r = 0; r < z.rows(); ++r) {
    for (int c = 0; c < z.cols(); ++c) out(r, c) = std::abs(z(r, c));
  }
  return out;
}

BeamIndex argmax_abs(const ComplexMatrix& a) {
  BeamIndex best{0, 0};
  double best_mag = -1.0;
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      const double mag = std::abs(a(i, j));
      if (mag > best_mag) {
        best_mag = mag;
        best = {i, j};
      }
    }
  }
  return best;
}

}  // namespace beamccs
