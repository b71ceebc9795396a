#include "beamccs/ccs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include "beamccs/io_util.hpp"

namespace beamccs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void require_square_pair(const ComplexMatrix& h, const ComplexMatrix& p,
                         const char* who) {
  if (h.rows() != h.cols() || p.rows() != p.cols() || h.rows() != p.rows()) {
    throw std::invalid_argument(std::string(who) +
                                ": operands must be square and equal-sized");
  }
}

/// Unscaled 2D transform with kernel exp(sign * j 2 pi (kp + lq) / N),
/// applied row-wise then column-wise via dft2/idft2 scaling removal.
ComplexMatrix spectrum(const ComplexMatrix& a, int sign) {
  // dft2/idft2 carry a 1/N factor; undo it to get the raw transform.
  ComplexMatrix t = (sign < 0) ? dft2(a) : idft2(a);
  const double n = static_cast<double>(a.rows());
  for (cplx& z : t.data()) z *= n;
  return t;
}

}  // namespace

void SubsamplingSet::validate(int n) const {
  const std::size_t m = coords.size();
  require(m >= 1 && m <= static_cast<std::size_t>(n) * n,
          "SubsamplingSet: M out of range");
  std::set<std::pair<int, int>> seen;
  for (const auto& [r, c] : coords) {
    require(r >= 0 && r < n && c >= 0 && c < n,
            "SubsamplingSet: coordinate out of bounds");
    require(seen.insert({r, c}).second, "SubsamplingSet: duplicate coordinate");
  }
}

ComplexMatrix circ_xcorr_direct(const ComplexMatrix& h, const ComplexMatrix& p) {
  require_square_pair(h, p, "circ_xcorr_direct");
  const int n = h.rows();
  ComplexMatrix g(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      cplx acc{};
      for (int k = 0; k < n; ++k) {
        const int pr = ((k - r) % n + n) % n;
        for (int l = 0; l < n; ++l) {
          acc += h(k, l) * p(pr, ((l - c) % n + n) % n);
        }
      }
      g(r, c) = acc;
    }
  }
  return g;
}

ComplexMatrix circ_xcorr_fft(const ComplexMatrix& h, const ComplexMatrix& p) {
  require_square_pair(h, p, "circ_xcorr_fft");
  const int n = h.rows();
  // Correlation theorem for the unconjugated product: the forward spectrum
  // of G is the forward spectrum of H times the backward spectrum of P.
  ComplexMatrix fh = spectrum(h, -1);
  const ComplexMatrix bp = spectrum(p, +1);
  for (std::size_t k = 0; k < fh.size(); ++k) fh.data()[k] *= bp.data()[k];
  ComplexMatrix g = spectrum(fh, +1);
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (cplx& z : g.data()) z *= scale;
  return g;
}

RestructuredChannel restructure_channel(const ComplexMatrix& h) {
  require(h.rows() == h.cols(), "restructure_channel: input must be square");
  const int n = h.rows();
  RestructuredChannel x;
  x.n = n;
  x.data.assign(static_cast<std::size_t>(2) * (2 * n) * (4 * n), 0.0);
  const auto put = [&](int s, int r, int c, double v) {
    x.data[(static_cast<std::size_t>(s) * 2 * n + r) * 4 * n + c] = v;
  };
  for (int r = 0; r < 2 * n; ++r) {
    for (int c = 0; c < 2 * n; ++c) {
      const cplx z = h(r % n, c % n);
      put(0, r, c, z.real());          // [H_R,pad, .]
      put(0, r, c + 2 * n, z.imag());  // [., H_I,pad]
      put(1, r, c, -z.imag());         // [-H_I,pad, .]
      put(1, r, c + 2 * n, z.real());  // [., H_R,pad]
    }
  }
  return x;
}

namespace {

/// Valid-mode correlation sum of the two-slice filter at anchor (r, c).
double conv_at(const RestructuredChannel& x, const RealMatrix& p_r,
               const RealMatrix& p_i, int r, int c) {
  const int n = x.n;
  const std::size_t row_stride = static_cast<std::size_t>(4) * n;
  const std::size_t slice_stride = static_cast<std::size_t>(2) * n * row_stride;
  double acc = 0.0;
  for (int fy = 0; fy < n; ++fy) {
    const double* in0 = x.data.data() + (r + fy) * row_stride + c;
    const double* in1 = in0 + slice_stride;
    const double* w0 = &p_r.data()[static_cast<std::size_t>(fy) * n];
    const double* w1 = &p_i.data()[static_cast<std::size_t>(fy) * n];
    for (int fx = 0; fx < n; ++fx) {
      acc += in0[fx] * w0[fx] + in1[fx] * w1[fx];
    }
  }
  return acc;
}

void check_filter(const RestructuredChannel& x, const RealMatrix& p_r,
                  const RealMatrix& p_i) {
  require(x.n >= 1 && x.data.size() ==
                          static_cast<std::size_t>(2) * (2 * x.n) * (4 * x.n),
          "conv_measure: malformed restructured channel");
  require(p_r.rows() == x.n && p_r.cols() == x.n && p_i.rows() == x.n &&
              p_i.cols() == x.n,
          "conv_measure: filter shape must be N x N x 2");
}

}  // namespace

std::pair<RealMatrix, RealMatrix> conv_measure(const RestructuredChannel& x,
                                               const RealMatrix& p_r,
                                               const RealMatrix& p_i) {
  check_filter(x, p_r, p_i);
  const int n = x.n;
  // Full valid map is (N+1) x (3N+1); G_R and G_I are the N x N blocks
  // anchored at columns 0 and 2N of its top rows.
  RealMatrix g_r(n, n);
  RealMatrix g_i(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      g_r(r, c) = conv_at(x, p_r, p_i, r, c);
      g_i(r, c) = conv_at(x, p_r, p_i, r, c + 2 * n);
    }
  }
  return {std::move(g_r), std::move(g_i)};
}

void conv_measure_at(const RestructuredChannel& x, const RealMatrix& p_r,
                     const RealMatrix& p_i, const SubsamplingSet& omega,
                     std::span<double> y_r, std::span<double> y_i) {
  check_filter(x, p_r, p_i);
  require(y_r.size() == omega.coords.size() && y_i.size() == omega.coords.size(),
          "conv_measure_at: output size must equal M");
  for (std::size_t m = 0; m < omega.coords.size(); ++m) {
    const auto [r, c] = omega.coords[m];
    y_r[m] = conv_at(x, p_r, p_i, r, c);
    y_i[m] = conv_at(x, p_r, p_i, r, c + 2 * x.n);
  }
}

SubsamplingSet sample_omega(int n, int m, Rng& rng) {
  require(n >= 1, "sample_omega: grid size must be positive");
  require(m >= 1 && m <= n * n, "sample_omega: M out of range");
  // Partial Fisher-Yates over the flattened grid.
  std::vector<int> cells(static_cast<std::size_t>(n) * n);
  std::iota(cells.begin(), cells.end(), 0);
  SubsamplingSet omega;
  omega.coords.reserve(m);
  for (int k = 0; k < m; ++k) {
    const auto pick =
        k + static_cast<int>(rng.uniform_below(cells.size() - k));
    std::swap(cells[k], cells[pick]);
    omega.coords.emplace_back(cells[k] / n, cells[k] % n);
  }
  return omega;
}

std::vector<cplx> subsample(const ComplexMatrix& g, const SubsamplingSet& omega) {
  require(g.rows() == g.cols(), "subsample: G must be square");
  omega.validate(g.rows());
  std::vector<cplx> y;
  y.reserve(omega.coords.size());
  for (const auto& [r, c] : omega.coords) y.push_back(g(r, c));
  return y;
}

std::vector<cplx> add_awgn(std::span<const cplx> y, double sigma2, Rng& rng) {
  require(sigma2 >= 0.0, "add_awgn: noise variance must be nonnegative");
  std::vector<cplx> out(y.begin(), y.end());
  if (sigma2 == 0.0) return out;
  for (cplx& z : out) z += rng.cgaussian(sigma2);
  return out;
}

cplx alphabet_entry(int b, int q, int n) {
  const int levels = 1 << q;
  const int quarter_num = 4 * b;
  if (quarter_num % levels == 0) {
    switch ((quarter_num / levels) % 4) {
      case 0: return cplx(1.0 / n, 0.0);
      case 1: return cplx(0.0, 1.0 / n);
      case 2: return cplx(-1.0 / n, 0.0);
      default: return cplx(0.0, -1.0 / n);
    }
  }
  const double theta = kTwoPi * b / levels;
  return cplx(std::cos(theta) / n, std::sin(theta) / n);
}

BaseMatrix quantize_base(const ComplexMatrix& p, int q, int* zero_entries) {
  require(p.rows() == p.cols(), "quantize_base: base matrix must be square");
  require(q >= 1, "quantize_base: q must be at least 1");
  const int n = p.rows();
  const int levels = 1 << q;
  const double step = kTwoPi / levels;
  BaseMatrix base;
  base.p = ComplexMatrix(n, n);
  base.quantized = true;
  base.q = q;
  base.phase_idx.reserve(p.size());
  int zeros = 0;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const cplx z = p(r, c);
      int k = 0;
      if (z == cplx{}) {
        ++zeros;  // undefined phase; pin to phase 0
      } else {
        // Half-way phases round toward the larger multiple.
        const double phase = std::atan2(z.imag(), z.real());
        k = static_cast<int>(std::floor(phase / step + 0.5));
        k = ((k % levels) + levels) % levels;
      }
      const int b = (k == 0) ? levels : k;
      base.phase_idx.push_back(static_cast<std::uint16_t>(b));
      base.p(r, c) = alphabet_entry(b, q, n);
    }
  }
  if (zero_entries != nullptr) *zero_entries = zeros;
  return base;
}

BaseMatrix random_base(int n, int q, Rng& rng) {
  require(n >= 1, "random_base: N must be positive");
  require(q >= 1, "random_base: q must be at least 1");
  const int levels = 1 << q;
  BaseMatrix base;
  base.p = ComplexMatrix(n, n);
  base.quantized = true;
  base.q = q;
  base.phase_idx.reserve(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int b = 1 + static_cast<int>(rng.uniform_below(levels));
      base.phase_idx.push_back(static_cast<std::uint16_t>(b));
      base.p(r, c) = alphabet_entry(b, q, n);
    }
  }
  return base;
}

std::vector<cplx> measure_hardware(const ComplexMatrix& h, const BaseMatrix& base,
                                   const SubsamplingSet& omega, double sigma2,
                                   Rng& rng) {
  require(base.quantized,
          "measure_hardware: base matrix must be quantized for the hardware path");
  require(h.rows() == h.cols() && h.rows() == base.p.rows(),
          "measure_hardware: channel and base dimensions must match");
  require(sigma2 >= 0.0, "measure_hardware: noise variance must be nonnegative");
  const int n = h.rows();
  omega.validate(n);
  std::vector<cplx> y;
  y.reserve(omega.coords.size());
  for (const auto& [r, c] : omega.coords) {
    // <H, circ_shift(P, r, c)> = sum_{a,b} P(a,b) H((a+r) mod N, (b+c) mod N)
    cplx acc{};
    for (int a = 0; a < n; ++a) {
      const int hr = (a + r) % n;
      for (int b = 0; b < n; ++b) {
        acc += base.p(a, b) * h(hr, (b + c) % n);
      }
    }
    y.push_back(acc);
  }
  if (sigma2 > 0.0) {
    for (cplx& z : y) z += rng.cgaussian(sigma2);
  }
  return y;
}

void save_base(const BaseMatrix& base, const std::string& path) {
  nlohmann::json j;
  j["format"] = "beamccs-base";
  j["version"] = 1;
  j["n"] = base.p.rows();
  j["q"] = base.q;
  j["quantized"] = base.quantized;
  if (base.quantized) {
    j["phase_idx"] = base.phase_idx;
  } else {
    std::vector<double> entries;
    entries.reserve(base.p.size() * 2);
    for (const cplx& z : base.p.data()) {
      entries.push_back(z.real());
      entries.push_back(z.imag());
    }
    j["entries"] = entries;
  }
  const std::string text = j.dump(2);
  write_file(path, std::span<const std::uint8_t>(
                       reinterpret_cast<const std::uint8_t*>(text.data()),
                       text.size()));
}

BaseMatrix load_base(const std::string& path) {
  const auto bytes = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": not valid JSON: " + e.what());
  }
  try {
    if (j.at("format") != "beamccs-base") {
      throw IoError(IoError::Kind::bad_magic, path + ": not a base-matrix file");
    }
    const int n = j.at("n").get<int>();
    BaseMatrix base;
    base.q = j.at("q").get<int>();
    base.quantized = j.at("quantized").get<bool>();
    base.p = ComplexMatrix(n, n);
    if (base.quantized) {
      base.phase_idx = j.at("phase_idx").get<std::vector<std::uint16_t>>();
      if (base.phase_idx.size() != static_cast<std::size_t>(n) * n) {
        throw IoError(IoError::Kind::structural,
                      path + ": phase index count does not match N");
      }
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
          const int b = base.phase_idx[static_cast<std::size_t>(r) * n + c];
          if (b < 1 || b > (1 << base.q)) {
            throw IoError(IoError::Kind::structural,
                          path + ": phase index outside {1..2^q}");
          }
          base.p(r, c) = alphabet_entry(b, base.q, n);
        }
      }
    } else {
      const auto entries = j.at("entries").get<std::vector<double>>();
      if (entries.size() != static_cast<std::size_t>(n) * n * 2) {
        throw IoError(IoError::Kind::structural,
                      path + ": entry count does not match N");
      }
      for (std::size_t k = 0; k < entries.size() / 2; ++k) {
        base.p.data()[k] = cplx(entries[2 * k], entries[2 * k + 1]);
      }
    }
    return base;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": manifest field missing or mistyped: " + e.what());
  }
}

}  // namespace beamccs
