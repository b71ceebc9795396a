#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "beamccs/ccs.hpp"
#include "beamccs/io_util.hpp"
#include "oracles.hpp"

using namespace beamccs;
using namespace beamccs::testing;

namespace {

std::pair<RealMatrix, RealMatrix> split_parts(const ComplexMatrix& p) {
  RealMatrix re(p.rows(), p.cols()), im(p.rows(), p.cols());
  for (int r = 0; r < p.rows(); ++r) {
    for (int c = 0; c < p.cols(); ++c) {
      re(r, c) = p(r, c).real();
      im(r, c) = p(r, c).imag();
    }
  }
  return {re, im};
}

ComplexMatrix join_parts(const RealMatrix& re, const RealMatrix& im) {
  ComplexMatrix out(re.rows(), re.cols());
  for (int r = 0; r < re.rows(); ++r) {
    for (int c = 0; c < re.cols(); ++c) out(r, c) = cplx(re(r, c), im(r, c));
  }
  return out;
}

}  // namespace

TEST_CASE("circ_xcorr_direct basics") {
  SUBCASE("delta filter is the identity") {
    Rng rng(1);
    const ComplexMatrix h = random_matrix(4, rng);
    ComplexMatrix delta(4, 4);
    delta(0, 0) = 1.0;
    CHECK(max_abs_diff(circ_xcorr_direct(h, delta), h) == 0.0);
  }
  SUBCASE("hand-evaluated 2x2 case") {
    ComplexMatrix h(2, 2);
    h(0, 0) = 1.0;
    h(0, 1) = 2.0;
    h(1, 0) = 3.0;
    h(1, 1) = 4.0;
    ComplexMatrix p(2, 2);
    p(0, 1) = 1.0;
    const ComplexMatrix g = circ_xcorr_direct(h, p);
    CHECK(g(0, 0) == cplx{2.0, 0.0});
    CHECK(g(0, 1) == cplx{1.0, 0.0});
    CHECK(g(1, 0) == cplx{4.0, 0.0});
    CHECK(g(1, 1) == cplx{3.0, 0.0});
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(circ_xcorr_direct(ComplexMatrix(2, 2), ComplexMatrix(4, 4)),
                    std::invalid_argument);
  }
}

TEST_CASE("shift identity: G(r,c) = <H, circ_shift(P, r, c)> exhaustively") {
  Rng rng(5);
  for (const int n : {2, 4, 8}) {
    const ComplexMatrix h = random_matrix(n, rng);
    const ComplexMatrix p = random_matrix(n, rng);
    const ComplexMatrix g = circ_xcorr_direct(h, p);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        const cplx via_shift = frob_inner(h, circ_shift(p, r, c));
        CHECK(std::abs(g(r, c) - via_shift) <=
              1e-12 * fro_norm(h) * fro_norm(p));
      }
    }
  }
}

TEST_CASE("circ_xcorr_fft matches the direct oracle") {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix h = random_matrix(16, rng);
    const ComplexMatrix p = random_matrix(16, rng);
    const double scale = fro_norm(h) * fro_norm(p);
    worst = std::max(
        worst,
        max_abs_diff(circ_xcorr_fft(h, p), circ_xcorr_direct(h, p)) / scale);
  }
  CHECK(worst <= 1e-9);

  SUBCASE("delta filter") {
    Rng rng2(2);
    const ComplexMatrix h = random_matrix(8, rng2);
    ComplexMatrix delta(8, 8);
    delta(0, 0) = 1.0;
    CHECK(max_abs_diff(circ_xcorr_fft(h, delta), h) < 1e-12);
  }
  SUBCASE("bilinearity in the channel") {
    Rng rng2(3);
    const ComplexMatrix h1 = random_matrix(8, rng2);
    const ComplexMatrix h2 = random_matrix(8, rng2);
    const ComplexMatrix p = random_matrix(8, rng2);
    ComplexMatrix sum(8, 8);
    for (std::size_t k = 0; k < sum.size(); ++k) {
      sum.data()[k] = h1.data()[k] + h2.data()[k];
    }
    const ComplexMatrix lhs = circ_xcorr_fft(sum, p);
    const ComplexMatrix g1 = circ_xcorr_fft(h1, p);
    const ComplexMatrix g2 = circ_xcorr_fft(h2, p);
    double worst2 = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k) {
      worst2 = std::max(worst2,
                        std::abs(lhs.data()[k] - g1.data()[k] - g2.data()[k]));
    }
    CHECK(worst2 < 1e-10);
  }
}

TEST_CASE("restructure_channel layout") {
  const int n = 4;
  Rng rng(9);
  const ComplexMatrix h = random_matrix(n, rng);
  const RestructuredChannel x = restructure_channel(h);
  REQUIRE(x.n == n);
  REQUIRE(x.data.size() == std::size_t(2 * 2 * n * 4 * n));

  // Every entry appears in both slices through the 2x2 tiling: 8 padded
  // positions for the real part and 8 for the imaginary part.
  for (int k = 0; k < n; ++k) {
    for (int l = 0; l < n; ++l) {
      const cplx z = h(k, l);
      for (int dr : {0, n}) {
        for (int dc : {0, n}) {
          CHECK(x.at(0, k + dr, l + dc) == z.real());
          CHECK(x.at(0, k + dr, l + dc + 2 * n) == z.imag());
          CHECK(x.at(1, k + dr, l + dc) == -z.imag());
          CHECK(x.at(1, k + dr, l + dc + 2 * n) == z.real());
        }
      }
    }
  }

  SUBCASE("real channel zeroes the imaginary blocks") {
    ComplexMatrix hr(n, n);
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) hr(k, l) = cplx(k + l + 1.0, 0.0);
    }
    const RestructuredChannel xr = restructure_channel(hr);
    for (int r = 0; r < 2 * n; ++r) {
      for (int c = 0; c < 2 * n; ++c) {
        CHECK(xr.at(0, r, c + 2 * n) == 0.0);  // H_I pad
        CHECK(xr.at(1, r, c) == 0.0);          // -H_I pad
      }
    }
  }
}

TEST_CASE("conv_measure reproduces the complex circular cross-correlation") {
  Rng rng(21);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix h = random_matrix(16, rng);
    const ComplexMatrix p = random_matrix(16, rng);
    const auto [pr, pi] = split_parts(p);
    const auto [gr, gi] = conv_measure(restructure_channel(h), pr, pi);
    const ComplexMatrix want = circ_xcorr_direct(h, p);
    const double scale = fro_norm(h) * fro_norm(p);
    worst = std::max(worst, max_abs_diff(join_parts(gr, gi), want) / scale);
  }
  CHECK(worst <= 1e-9);

  SUBCASE("real channel and filter give zero imaginary part") {
    ComplexMatrix h(8, 8), p(8, 8);
    Rng rng2(4);
    for (cplx& z : h.data()) z = cplx(rng2.gaussian(), 0.0);
    for (cplx& z : p.data()) z = cplx(rng2.gaussian(), 0.0);
    const auto [pr, pi] = split_parts(p);
    const auto [gr, gi] = conv_measure(restructure_channel(h), pr, pi);
    for (double v : gi.data()) CHECK(v == 0.0);
    CHECK(max_abs_diff(join_parts(gr, gi), circ_xcorr_direct(h, p)) < 1e-12);
  }
  SUBCASE("delta filter returns (H_R, H_I)") {
    Rng rng2(6);
    const ComplexMatrix h = random_matrix(8, rng2);
    RealMatrix pr(8, 8), pi(8, 8);
    pr(0, 0) = 1.0;
    const auto [gr, gi] = conv_measure(restructure_channel(h), pr, pi);
    CHECK(max_abs_diff(join_parts(gr, gi), h) == 0.0);
  }
  SUBCASE("shape mismatch rejected") {
    const RestructuredChannel x = restructure_channel(ComplexMatrix(8, 8));
    CHECK_THROWS_AS(conv_measure(x, RealMatrix(4, 4), RealMatrix(4, 4)),
                    std::invalid_argument);
  }
}

TEST_CASE("conv_measure_at equals conv_measure + gather") {
  Rng rng(31);
  const ComplexMatrix h = random_matrix(16, rng);
  const ComplexMatrix p = random_matrix(16, rng);
  const auto [pr, pi] = split_parts(p);
  const RestructuredChannel x = restructure_channel(h);
  const auto [gr, gi] = conv_measure(x, pr, pi);
  Rng orng(13);
  const SubsamplingSet omega = sample_omega(16, 10, orng);
  std::vector<double> yr(10), yi(10);
  conv_measure_at(x, pr, pi, omega, yr, yi);
  for (int m = 0; m < 10; ++m) {
    const auto [r, c] = omega.coords[m];
    CHECK(yr[m] == gr(r, c));
    CHECK(yi[m] == gi(r, c));
  }
}

TEST_CASE("sample_omega draws distinct ordered coordinates") {
  Rng rng(17);
  const SubsamplingSet omega = sample_omega(16, 10, rng);
  omega.validate(16);
  CHECK(omega.size() == 10);

  Rng rng2(17);
  const SubsamplingSet again = sample_omega(16, 10, rng2);
  CHECK(omega.coords == again.coords);

  SUBCASE("full grid is a permutation") {
    Rng rng3(23);
    const SubsamplingSet full = sample_omega(4, 16, rng3);
    std::set<std::pair<int, int>> seen(full.coords.begin(), full.coords.end());
    CHECK(seen.size() == 16);
  }
  SUBCASE("M out of range rejected") {
    Rng rng4(1);
    CHECK_THROWS_AS(sample_omega(4, 0, rng4), std::invalid_argument);
    CHECK_THROWS_AS(sample_omega(4, 17, rng4), std::invalid_argument);
  }
}

TEST_CASE("subsample gathers in order") {
  Rng rng(41);
  const ComplexMatrix h = random_matrix(4, rng);
  const ComplexMatrix p = random_matrix(4, rng);
  const ComplexMatrix g = circ_xcorr_direct(h, p);

  SubsamplingSet omega;
  omega.coords = {{0, 1}, {1, 2}, {2, 1}};
  const std::vector<cplx> y = subsample(g, omega);
  CHECK(y[0] == g(0, 1));
  CHECK(y[1] == g(1, 2));
  CHECK(y[2] == g(2, 1));

  SUBCASE("full grid row-major flattens G") {
    SubsamplingSet full;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) full.coords.emplace_back(r, c);
    }
    const std::vector<cplx> flat = subsample(g, full);
    for (std::size_t k = 0; k < flat.size(); ++k) {
      CHECK(flat[k] == g.data()[k]);
    }
  }
  SUBCASE("zero shift measurement is the plain inner product") {
    SubsamplingSet zero;
    zero.coords = {{0, 0}};
    const std::vector<cplx> y0 = subsample(g, zero);
    CHECK(std::abs(y0[0] - frob_inner(h, p)) <
          1e-12 * fro_norm(h) * fro_norm(p));
  }
  SUBCASE("out-of-bounds coordinate rejected") {
    SubsamplingSet bad;
    bad.coords = {{0, 4}};
    CHECK_THROWS_AS(subsample(g, bad), std::invalid_argument);
  }
}

TEST_CASE("add_awgn moments" * doctest::timeout(120)) {
  std::vector<cplx> y(1000, cplx{1.0, -2.0});

  SUBCASE("zero variance is the identity") {
    Rng rng(1);
    CHECK(add_awgn(y, 0.0, rng) == y);
  }
  SUBCASE("negative variance rejected") {
    Rng rng(1);
    CHECK_THROWS_AS(add_awgn(y, -1.0, rng), std::invalid_argument);
  }
  SUBCASE("empirical variance and component correlation") {
    const double sigma2 = 0.37;
    Rng rng(123);
    const int draws = 1'000'000;
    std::vector<cplx> zero(draws, cplx{});
    const std::vector<cplx> noisy = add_awgn(zero, sigma2, rng);
    double var = 0.0, corr = 0.0;
    for (const cplx& z : noisy) {
      var += std::norm(z);
      corr += z.real() * z.imag();
    }
    var /= draws;
    corr /= draws * (sigma2 / 2.0);
    CHECK(std::abs(var - sigma2) < 0.01 * sigma2);
    CHECK(std::abs(corr) < 0.01);
  }
}

TEST_CASE("quantize_base rounds phases onto the alphabet grid") {
  const int n = 4;
  const double step = std::numbers::pi / 4.0;  // q = 3

  SUBCASE("on-grid phase is preserved, magnitude forced to 1/N") {
    ComplexMatrix p(n, n, std::polar(3.7, step));
    const BaseMatrix base = quantize_base(p, 3);
    for (const cplx& z : base.p.data()) {
      CHECK(std::arg(z) == doctest::Approx(step).epsilon(1e-14));
      CHECK(std::abs(z) == doctest::Approx(1.0 / n).epsilon(1e-14));
    }
    CHECK(base.phase_idx.front() == 1);
  }
  SUBCASE("phase 0.3 rad rounds down to 0") {
    ComplexMatrix p(n, n, std::polar(1.0, 0.3));
    const BaseMatrix base = quantize_base(p, 3);
    for (const cplx& z : base.p.data()) {
      CHECK(z == cplx{1.0 / n, 0.0});
    }
    CHECK(base.phase_idx.front() == 8);  // phase 0 stored as b = 2^q
  }
  SUBCASE("half-way phase rounds toward the larger multiple") {
    ComplexMatrix p(n, n, std::polar(1.0, step / 2.0));
    const BaseMatrix base = quantize_base(p, 3);
    CHECK(std::arg(base.p(0, 0)) == doctest::Approx(step).epsilon(1e-12));
  }
  SUBCASE("idempotent") {
    Rng rng(8);
    const BaseMatrix once = quantize_base(random_matrix(n, rng), 3);
    const BaseMatrix twice = quantize_base(once.p, 3);
    CHECK(once.phase_idx == twice.phase_idx);
    CHECK(max_abs_diff(once.p, twice.p) == 0.0);
  }
  SUBCASE("zero entries are counted and pinned to phase 0") {
    ComplexMatrix p(2, 2);
    p(0, 0) = cplx{0.0, 1.0};
    int zeros = 0;
    const BaseMatrix base = quantize_base(p, 3, &zeros);
    CHECK(zeros == 3);
    CHECK(base.p(0, 1) == cplx{0.5, 0.0});
  }
}

TEST_CASE("random_base draws uniformly from the alphabet") {
  SUBCASE("magnitudes are 1/N within a few ulp") {
    Rng rng(3);
    const BaseMatrix base = random_base(16, 3, rng);
    for (const cplx& z : base.p.data()) {
      CHECK(std::abs(std::abs(z) * 16.0 - 1.0) <= 1e-12);
    }
  }
  SUBCASE("q=1 alphabet is {+1/N, -1/N}") {
    Rng rng(5);
    const BaseMatrix base = random_base(8, 1, rng);
    for (const cplx& z : base.p.data()) {
      CHECK(z.imag() == 0.0);
      CHECK(std::abs(z.real()) == 1.0 / 8);
    }
  }
  SUBCASE("phase histogram is uniform (chi-squared at 1%)") {
    Rng rng(71);
    std::array<int, 8> counts{};
    const int draws = 100'000 / 64;
    for (int t = 0; t < draws; ++t) {
      const BaseMatrix base = random_base(8, 3, rng);
      for (std::uint16_t b : base.phase_idx) counts[b - 1]++;
    }
    const double expect = draws * 64 / 8.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(chi2 < 18.475);  // df = 7, 1% critical value
  }
}

TEST_CASE("measure_hardware equals subsample(circ_xcorr) + add_awgn") {
  Rng rng(51);
  const ComplexMatrix h = random_matrix(16, rng);
  Rng brng(52);
  const BaseMatrix base = random_base(16, 3, brng);
  Rng orng(53);
  const SubsamplingSet omega = sample_omega(16, 10, orng);

  SUBCASE("noiseless path matches up to fp reassociation") {
    Rng nrng(0);
    const std::vector<cplx> y = measure_hardware(h, base, omega, 0.0, nrng);
    const std::vector<cplx> want =
        subsample(circ_xcorr_direct(h, base.p), omega);
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(y[i] - want[i]) <= 1e-12 * fro_norm(h));
    }
  }
  SUBCASE("same noise draws give identical outputs") {
    const double sigma2 = 0.5;
    Rng n1(777);
    const std::vector<cplx> y = measure_hardware(h, base, omega, sigma2, n1);
    Rng n2(777);
    const std::vector<cplx> want =
        add_awgn(subsample(circ_xcorr_direct(h, base.p), omega), sigma2, n2);
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(y[i] - want[i]) <= 1e-12 * fro_norm(h));
    }
  }
  SUBCASE("single zero shift is <H, P> plus noise") {
    SubsamplingSet zero;
    zero.coords = {{0, 0}};
    Rng nrng(0);
    const std::vector<cplx> y = measure_hardware(h, base, zero, 0.0, nrng);
    CHECK(std::abs(y[0] - frob_inner(h, base.p)) <= 1e-13 * fro_norm(h));
  }
  SUBCASE("linear in the channel") {
    ComplexMatrix h2 = h;
    for (cplx& z : h2.data()) z *= 3.0;
    Rng n1(0), n2(0);
    const std::vector<cplx> y1 = measure_hardware(h, base, omega, 0.0, n1);
    const std::vector<cplx> y2 = measure_hardware(h2, base, omega, 0.0, n2);
    for (int i = 0; i < 10; ++i) {
      CHECK(std::abs(y2[i] - 3.0 * y1[i]) <= 1e-12 * fro_norm(h));
    }
  }
  SUBCASE("unquantized base rejected") {
    BaseMatrix raw;
    raw.p = h;
    raw.quantized = false;
    Rng nrng(0);
    CHECK_THROWS_AS(measure_hardware(h, raw, omega, 0.0, nrng),
                    std::invalid_argument);
  }
}

TEST_CASE("base matrix JSON round trip") {
  const auto tmp = std::filesystem::temp_directory_path() / "beamccs_base_test";
  std::filesystem::create_directories(tmp);

  SUBCASE("quantized base") {
    Rng rng(61);
    const BaseMatrix base = random_base(8, 3, rng);
    const std::string path = (tmp / "quant.json").string();
    save_base(base, path);
    const BaseMatrix loaded = load_base(path);
    CHECK(loaded.quantized);
    CHECK(loaded.q == 3);
    CHECK(loaded.phase_idx == base.phase_idx);
    CHECK(max_abs_diff(loaded.p, base.p) == 0.0);
  }
  SUBCASE("unquantized base round-trips bit-exactly") {
    Rng rng(62);
    BaseMatrix base;
    base.p = random_matrix(8, rng);
    base.quantized = false;
    base.q = 0;
    const std::string path = (tmp / "raw.json").string();
    save_base(base, path);
    const BaseMatrix loaded = load_base(path);
    CHECK(max_abs_diff(loaded.p, base.p) == 0.0);
  }
  std::filesystem::remove_all(tmp);
}
