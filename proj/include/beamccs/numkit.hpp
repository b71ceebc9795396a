#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace beamccs {

using cplx = std::complex<double>;

/// Dense row-major real matrix.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(int r, int c) { return data_[idx(r, c)]; }
  double operator()(int r, int c) const { return data_[idx(r, c)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool operator==(const RealMatrix&) const = default;

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// Dense row-major complex matrix. Carrier for channels H, base matrices P,
/// correlations G and beamspace representations X.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(int rows, int cols, cplx fill = {});
  ComplexMatrix(int rows, int cols, std::vector<cplx> entries);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  cplx& operator()(int r, int c) { return data_[idx(r, c)]; }
  cplx operator()(int r, int c) const { return data_[idx(r, c)]; }

  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  bool all_finite() const;

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t idx(int r, int c) const {
    return static_cast<std::size_t>(r) * cols_ + c;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<cplx> data_;
};

/// One direction of the N x N 2D-DFT codebook.
struct BeamIndex {
  int i = 0;
  int j = 0;

  int to_class(int n) const { return i * n + j; }
  static BeamIndex from_class(int idx, int n) { return {idx / n, idx % n}; }

  bool operator==(const BeamIndex&) const = default;
};

/// Unconjugated Frobenius inner product: sum of elementwise products
/// A(k,l)*B(k,l). Note there is no conjugate on either factor.
cplx frob_inner(const ComplexMatrix& a, const ComplexMatrix& b);

double fro_norm(const ComplexMatrix& a);

/// Forward beamspace transform X = U H U with the symmetric unitary DFT
/// matrix U(k,l) = exp(-j 2 pi k l / N) / sqrt(N). X(i,j) equals the
/// codebook measurement <H, U(:,i) U(:,j)^T>.
ComplexMatrix dft2(const ComplexMatrix& h);

/// Dual transform Z = U* A U*. Inverse of dft2, and the pairing partner in
/// the Parseval identity <H, P> = <dft2(H), idft2(P)>.
ComplexMatrix idft2(const ComplexMatrix& a);

/// Output Q with Q(k,l) = P((k - r) mod N, (l - c) mod N). Shifts may be any
/// integers; they are reduced mod N.
ComplexMatrix circ_shift(const ComplexMatrix& p, int r, int c);

/// Elementwise magnitude of idft2(P): the power pattern the array radiates
/// when P is applied as a phase-shift matrix. Invariant under circ_shift.
RealMatrix beam_pattern(const ComplexMatrix& p);

/// Row-major argmax of |A|; exact-magnitude ties resolve to the
/// lexicographically smallest (i, j).
BeamIndex argmax_abs(const ComplexMatrix& a);

}  // namespace beamccs
