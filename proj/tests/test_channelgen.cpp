#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "beamccs/channelgen.hpp"
#include "beamccs/io_util.hpp"
#include "beamccs/parallel.hpp"
#include "oracles.hpp"

using namespace beamccs;
using namespace beamccs::testing;

namespace {

bool same_channels(const Dataset& a, const Dataset& b) {
  if (a.channels.size() != b.channels.size()) return false;
  for (std::size_t i = 0; i < a.channels.size(); ++i) {
    const Channel& x = a.channels[i];
    const Channel& y = b.channels[i];
    if (!(x.h == y.h) || x.label != y.label || x.los != y.los ||
        x.lane != y.lane || x.position != y.position) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("steering_matrix basics") {
  SUBCASE("broadside is the all-ones matrix") {
    const ComplexMatrix a = steering_matrix(8, 0.0, 0.0);
    for (const cplx& z : a.data()) CHECK(z == cplx{1.0, 0.0});
  }
  SUBCASE("entries are unit modulus") {
    const ComplexMatrix a = steering_matrix(8, 0.37, -0.81);
    for (const cplx& z : a.data()) {
      CHECK(std::abs(z) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
  SUBCASE("on-grid steering concentrates on a single beam") {
    const int n = 16;
    for (const auto [i, j] : {std::pair{3, 7}, {0, 15}, {12, 1}}) {
      const ComplexMatrix a = steering_matrix(n, 2.0 * i / n, 2.0 * j / n);
      const ComplexMatrix x = dft2(a);
      const double total = fro_norm(x) * fro_norm(x);
      CHECK(std::norm(x(i, j)) / total >= 0.99);
      CHECK(argmax_abs(x) == BeamIndex{i, j});
    }
  }
}

TEST_CASE("sample_channel honors the blockage flag") {
  ScenarioConfig cfg;
  cfg.n_antennas = 8;
  cfg.seed = 5;

  SUBCASE("blockage_prob = 0 always has line of sight") {
    cfg.blockage_prob = 0.0;
    Rng rng(1);
    for (int t = 0; t < 50; ++t) {
      CHECK(sample_channel(cfg, rng).los);
    }
  }
  SUBCASE("blockage_prob = 1 never has line of sight, channel stays nonzero") {
    cfg.blockage_prob = 1.0;
    Rng rng(2);
    for (int t = 0; t < 50; ++t) {
      const Channel ch = sample_channel(cfg, rng);
      CHECK(!ch.los);
      CHECK(fro_norm(ch.h) > 0.0);
    }
  }
  SUBCASE("labels match the exhaustive argmax of the direct transform") {
    Rng rng(3);
    for (int t = 0; t < 10; ++t) {
      const Channel ch = sample_channel(cfg, rng);
      CHECK(ch.label == argmax_abs(dft2_direct(ch.h)));
    }
  }
  SUBCASE("config validation") {
    ScenarioConfig bad = cfg;
    bad.n_antennas = 12;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.lane_offsets = {4.0, 4.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = cfg;
    bad.blockage_prob = 0.5;
    bad.n_nlos_paths = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  }
}

TEST_CASE("generate_dataset applies the two scaling conventions") {
  ScenarioConfig cfg;
  cfg.seed = 17;
  const auto [train, test] = generate_dataset(cfg, 64, 48);
  const double n = cfg.n_antennas;

  for (const Channel& ch : train.channels) {
    CHECK(std::abs(fro_norm(ch.h) - n) <= 1e-9 * n);
  }
  double energy = 0.0;
  for (const Channel& ch : test.channels) {
    const double f = fro_norm(ch.h);
    energy += f * f;
  }
  CHECK(std::abs(energy / 48 - n * n) <= 1e-6 * n * n);

  SUBCASE("labels are invariant under the scaling step") {
    for (const Channel& ch : train.channels) {
      CHECK(ch.label == argmax_abs(dft2(ch.h)));
    }
    for (const Channel& ch : test.channels) {
      CHECK(ch.label == argmax_abs(dft2(ch.h)));
    }
  }
  SUBCASE("single-channel train set is scaled exactly") {
    const auto [t1, t2] = generate_dataset(cfg, 1, 1);
    CHECK(std::abs(fro_norm(t1.channels[0].h) - n) <= 1e-9 * n);
  }
}

TEST_CASE("generation is deterministic and thread-count independent") {
  ScenarioConfig cfg;
  cfg.seed = 99;
  const auto [a_train, a_test] = generate_dataset(cfg, 40, 20);
  const auto [b_train, b_test] = generate_dataset(cfg, 40, 20);
  CHECK(same_channels(a_train, b_train));
  CHECK(same_channels(a_test, b_test));

  set_num_threads(1);
  const auto [s_train, s_test] = generate_dataset(cfg, 40, 20);
  set_num_threads(0);
  CHECK(same_channels(a_train, s_train));
  CHECK(same_channels(a_test, s_test));
}

TEST_CASE("beamspace_prior normalization and concentration" *
          doctest::timeout(300)) {
  ScenarioConfig cfg;
  cfg.seed = 31;

  SUBCASE("single channel gives a one-hot prior") {
    const auto [train, test] = generate_dataset(cfg, 1, 1);
    const RealMatrix prior = beamspace_prior(train);
    double sum = 0.0;
    for (double v : prior.data()) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prior(train.channels[0].label.i, train.channels[0].label.j) == 1.0);
  }
  SUBCASE("empty dataset rejected") {
    Dataset empty;
    empty.config = cfg;
    CHECK_THROWS_AS(beamspace_prior(empty), std::invalid_argument);
  }
  SUBCASE("default scenario concentrates on two strips") {
    const auto [train, test] = generate_dataset(cfg, 20000, 1);
    const RealMatrix prior = beamspace_prior(train);
    double sum = 0.0;
    for (double v : prior.data()) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    const PriorConcentration pc = prior_concentration(prior);
    CHECK(pc.entropy_bits < 6.0);    // log2(256) - 2
    CHECK(pc.frac_bins_80 <= 0.15);  // 80% of mass on <= 15% of bins
    CHECK(pc.frac_bins_95 <= 0.25);
  }
}

TEST_CASE("dataset save/load round trip and failure modes") {
  const auto tmp = std::filesystem::temp_directory_path() / "beamccs_ds_test";
  std::filesystem::create_directories(tmp);
  const std::string path = (tmp / "small.ds").string();

  ScenarioConfig cfg;
  cfg.n_antennas = 8;
  cfg.seed = 7;
  const auto [train, test] = generate_dataset(cfg, 10, 4);
  save_dataset(train, path);

  SUBCASE("round trip is bit-exact") {
    const Dataset loaded = load_dataset(path);
    CHECK(loaded.config == train.config);
    CHECK(loaded.split == Split::train);
    CHECK(loaded.scaling == Scaling::per_channel);
    CHECK(same_channels(loaded, train));
  }
  SUBCASE("truncated payload reports truncation") {
    const auto bytes = read_file(path);
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 64);
    const std::string cut_path = (tmp / "cut.ds").string();
    write_file(cut_path, cut);
    try {
      load_dataset(cut_path);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.kind == IoError::Kind::truncated);
    }
  }
  SUBCASE("corrupted payload reports checksum mismatch") {
    auto bytes = read_file(path);
    bytes[bytes.size() - 100] ^= 0xFF;
    const std::string bad_path = (tmp / "bad.ds").string();
    write_file(bad_path, bytes);
    try {
      load_dataset(bad_path);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.kind == IoError::Kind::checksum_mismatch);
    }
  }
  SUBCASE("wrong magic reports a malformed header") {
    auto bytes = read_file(path);
    bytes[0] = 'X';
    const std::string bad_path = (tmp / "magic.ds").string();
    write_file(bad_path, bytes);
    try {
      load_dataset(bad_path);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      CHECK(e.kind == IoError::Kind::bad_magic);
    }
  }
  SUBCASE("header/payload size mismatch reports a structural error") {
    // Rewrite the manifest with a larger N; the payload no longer matches.
    const FramedFile f = read_framed(path, "BCCSDS1\0");
    nlohmann::json m = f.manifest;
    m["n"] = 16;
    const std::string bad_path = (tmp / "structural.ds").string();
    write_framed(bad_path, "BCCSDS1\0", m, f.payload);
    try {
      load_dataset(bad_path);
      FAIL("expected IoError");
    } catch (const IoError& e) {
      const bool structural_or_truncated =
          e.kind == IoError::Kind::structural ||
          e.kind == IoError::Kind::truncated;
      CHECK(structural_or_truncated);
    }
  }
  std::filesystem::remove_all(tmp);
}
