#include "beamccs/channelgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "beamccs/io_util.hpp"

namespace beamccs {

namespace {

constexpr char kMagic[8] = {'B', 'C', 'C', 'S', 'D', 'S', '1', '\0'};

// Scatterer placement around the vehicle (meters). Stand-in for blocking
// trucks and street furniture near the lanes.
constexpr double kScatterStdX = 10.0;
constexpr double kScatterStdY = 1.5;
constexpr double kScatterMinY = 0.25;
constexpr double kScatterZLo = 0.5;
constexpr double kScatterZHi = 4.0;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

/// Spatial frequencies of the unit direction from the array (at the origin,
/// height zt) toward point p: the array's axes lie along x and z.
std::pair<double, double> direction_uv(const std::array<double, 3>& p,
                                       double zt) {
  const double dx = p[0];
  const double dy = p[1];
  const double dz = p[2] - zt;
  const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
  return {dx / dist, dz / dist};
}

void accumulate_path(ComplexMatrix& h, const cplx& gain, int n, double u,
                     double v) {
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      h(r, c) += gain * std::polar(1.0, std::numbers::pi * (r * u + c * v));
    }
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  require(n_antennas >= 4 && std::has_single_bit(static_cast<unsigned>(n_antennas)),
          "ScenarioConfig: n_antennas must be a power of two >= 4");
  require(rsu_height > 0.0, "ScenarioConfig: rsu_height must be positive");
  require(!lane_offsets.empty(), "ScenarioConfig: at least one lane required");
  std::set<double> distinct;
  for (double d : lane_offsets) {
    require(d > 0.0, "ScenarioConfig: lane offsets must be positive");
    require(distinct.insert(d).second, "ScenarioConfig: lane offsets must be distinct");
  }
  require(road_span > 0.0, "ScenarioConfig: road_span must be positive");
  require(rx_height >= 0.0, "ScenarioConfig: rx_height must be nonnegative");
  require(n_nlos_paths >= 0, "ScenarioConfig: n_nlos_paths must be nonnegative");
  require(blockage_prob >= 0.0 && blockage_prob <= 1.0,
          "ScenarioConfig: blockage_prob must be in [0, 1]");
  require(blockage_prob == 0.0 || n_nlos_paths >= 1,
          "ScenarioConfig: blockage requires at least one NLoS path");
}

nlohmann::json scenario_to_json(const ScenarioConfig& cfg) {
  return {
      {"n_antennas", cfg.n_antennas},
      {"rsu_height", cfg.rsu_height},
      {"lane_offsets", cfg.lane_offsets},
      {"road_span", cfg.road_span},
      {"rx_height", cfg.rx_height},
      {"n_nlos_paths", cfg.n_nlos_paths},
      {"blockage_prob", cfg.blockage_prob},
      {"nlos_gain_db", cfg.nlos_gain_db},
      {"seed", cfg.seed},
  };
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "n_antennas") {
      cfg.n_antennas = value.get<int>();
    } else if (key == "rsu_height") {
      cfg.rsu_height = value.get<double>();
    } else if (key == "lane_offsets") {
      cfg.lane_offsets = value.get<std::vector<double>>();
    } else if (key == "road_span") {
      cfg.road_span = value.get<double>();
    } else if (key == "rx_height") {
      cfg.rx_height = value.get<double>();
    } else if (key == "n_nlos_paths") {
      cfg.n_nlos_paths = value.get<int>();
    } else if (key == "blockage_prob") {
      cfg.blockage_prob = value.get<double>();
    } else if (key == "nlos_gain_db") {
      cfg.nlos_gain_db = value.get<double>();
    } else if (key == "seed") {
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw std::invalid_argument("scenario config: unknown key '" + key + "'");
    }
  }
  return cfg;
}

ComplexMatrix steering_matrix(int n, double u, double v) {
  require(n >= 1, "steering_matrix: N must be positive");
  ComplexMatrix a(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      a(r, c) = std::polar(1.0, std::numbers::pi * (r * u + c * v));
    }
  }
  return a;
}

Channel sample_channel(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  const int n = cfg.n_antennas;

  Channel ch;
  ch.lane = static_cast<int>(rng.uniform_below(cfg.lane_offsets.size()));
  const double lane_y = cfg.lane_offsets[ch.lane];
  double x = rng.uniform(-cfg.road_span, cfg.road_span);
  // Degenerate geometry (receiver at the array origin) cannot occur with
  // positive lane offsets, but resample defensively on a near-zero range.
  while (x * x + lane_y * lane_y +
             (cfg.rx_height - cfg.rsu_height) * (cfg.rx_height - cfg.rsu_height) <
         1e-18) {
    x = rng.uniform(-cfg.road_span, cfg.road_span);
  }
  ch.position = {x, lane_y, cfg.rx_height};

  const bool blocked = rng.uniform() < cfg.blockage_prob;
  ch.los = !blocked;

  ch.h = ComplexMatrix(n, n);
  const double phi0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (!blocked) {
    const auto [u0, v0] = direction_uv(ch.position, cfg.rsu_height);
    accumulate_path(ch.h, std::polar(1.0, phi0), n, u0, v0);
  }

  const double nlos_power = std::pow(10.0, cfg.nlos_gain_db / 10.0);
  for (int l = 0; l < cfg.n_nlos_paths; ++l) {
    std::array<double, 3> scatterer = {
        ch.position[0] + kScatterStdX * rng.gaussian(),
        std::max(kScatterMinY, ch.position[1] + kScatterStdY * rng.gaussian()),
        rng.uniform(kScatterZLo, kScatterZHi)};
    const cplx gain = rng.cgaussian(nlos_power / cfg.n_nlos_paths);
    const auto [ul, vl] = direction_uv(scatterer, cfg.rsu_height);
    accumulate_path(ch.h, gain, n, ul, vl);
  }

  ch.label = argmax_abs(dft2(ch.h));
  return ch;
}

namespace {

std::vector<Channel> generate_split(const ScenarioConfig& cfg, int count,
                                    std::uint64_t split_stream) {
  std::vector<Channel> channels(count);
  const std::uint64_t split_seed = derive_seed(cfg.seed, split_stream);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(split_seed, static_cast<std::uint64_t>(i)));
    channels[i] = sample_channel(cfg, rng);
  }
  return channels;
}

}  // namespace

std::pair<Dataset, Dataset> generate_dataset(const ScenarioConfig& cfg,
                                             int n_train, int n_test) {
  cfg.validate();
  require(n_train >= 1 && n_test >= 1, "generate_dataset: counts must be >= 1");
  const double n = cfg.n_antennas;

  Dataset train{cfg, generate_split(cfg, n_train, 1), Split::train,
                Scaling::per_channel};
  for (Channel& ch : train.channels) {
    const double s = n / fro_norm(ch.h);
    for (cplx& z : ch.h.data()) z *= s;
  }

  Dataset test{cfg, generate_split(cfg, n_test, 2), Split::test,
               Scaling::common};
  double energy = 0.0;
  for (const Channel& ch : test.channels) {
    const double f = fro_norm(ch.h);
    energy += f * f;
  }
  const double s = n / std::sqrt(energy / n_test);
  for (Channel& ch : test.channels) {
    for (cplx& z : ch.h.data()) z *= s;
  }

  return {std::move(train), std::move(test)};
}

RealMatrix beamspace_prior(const Dataset& dataset) {
  require(!dataset.channels.empty(), "beamspace_prior: dataset is empty");
  const int n = dataset.config.n_antennas;
  RealMatrix prior(n, n);
  const double w = 1.0 / static_cast<double>(dataset.channels.size());
  for (const Channel& ch : dataset.channels) {
    prior(ch.label.i, ch.label.j) += w;
  }
  return prior;
}

PriorConcentration prior_concentration(const RealMatrix& prior) {
  std::vector<double> mass(prior.data().begin(), prior.data().end());
  std::sort(mass.begin(), mass.end(), std::greater<>());
  PriorConcentration out;
  double cum = 0.0;
  int bins80 = 0;
  int bins95 = 0;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] > 0.0) {
      ++out.support;
      out.entropy_bits -= mass[k] * std::log2(mass[k]);
    }
    cum += mass[k];
    if (bins80 == 0 && cum >= 0.80) bins80 = static_cast<int>(k) + 1;
    if (bins95 == 0 && cum >= 0.95) bins95 = static_cast<int>(k) + 1;
  }
  const double total = static_cast<double>(mass.size());
  out.frac_bins_80 = bins80 / total;
  out.frac_bins_95 = bins95 / total;
  return out;
}

std::string split_name(Split s) { return s == Split::train ? "train" : "test"; }

std::string scaling_name(Scaling s) {
  return s == Scaling::per_channel ? "per-channel" : "common";
}

namespace {

Split split_from_name(const std::string& s, const std::string& path) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw IoError(IoError::Kind::structural, path + ": unknown split tag " + s);
}

Scaling scaling_from_name(const std::string& s, const std::string& path) {
  if (s == "per-channel") return Scaling::per_channel;
  if (s == "common") return Scaling::common;
  throw IoError(IoError::Kind::structural, path + ": unknown scaling tag " + s);
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path,
                  const nlohmann::json& extra) {
  const int n = dataset.config.n_antennas;
  const std::size_t count = dataset.channels.size();

  std::vector<std::uint8_t> payload;
  payload.reserve(count * (static_cast<std::size_t>(n) * n * 16 + 2));
  for (const Channel& ch : dataset.channels) {
    for (const cplx& z : ch.h.data()) {
      put_f64(payload, z.real());
      put_f64(payload, z.imag());
    }
  }
  for (const Channel& ch : dataset.channels) {
    put_u16(payload, static_cast<std::uint16_t>(ch.label.to_class(n)));
  }

  nlohmann::json meta;
  {
    std::vector<int> los, lane;
    std::vector<std::array<double, 3>> position;
    los.reserve(count);
    lane.reserve(count);
    position.reserve(count);
    for (const Channel& ch : dataset.channels) {
      los.push_back(ch.los ? 1 : 0);
      lane.push_back(ch.lane);
      position.push_back(ch.position);
    }
    meta = {{"los", los}, {"lane", lane}, {"position", position}};
  }

  nlohmann::json manifest = extra;
  manifest["format"] = "beamccs-dataset";
  manifest["version"] = 1;
  manifest["n"] = n;
  manifest["n_channels"] = count;
  manifest["split"] = split_name(dataset.split);
  manifest["scaling"] = scaling_name(dataset.scaling);
  manifest["config"] = scenario_to_json(dataset.config);
  manifest["channels"] = meta;
  manifest["payload_checksum"] = to_hex64(fnv1a64(payload));
  write_framed(path, kMagic, manifest, payload);
}

Dataset load_dataset(const std::string& path) {
  const FramedFile file = read_framed(path, kMagic);
  const nlohmann::json& m = file.manifest;

  Dataset ds;
  std::size_t count = 0;
  int n = 0;
  std::vector<int> los, lane;
  std::vector<std::array<double, 3>> position;
  std::string checksum;
  try {
    if (m.at("format") != "beamccs-dataset" || m.at("version") != 1) {
      throw IoError(IoError::Kind::bad_manifest,
                    path + ": unsupported dataset format/version");
    }
    n = m.at("n").get<int>();
    count = m.at("n_channels").get<std::size_t>();
    ds.split = split_from_name(m.at("split").get<std::string>(), path);
    ds.scaling = scaling_from_name(m.at("scaling").get<std::string>(), path);
    ds.config = scenario_from_json(m.at("config"));
    los = m.at("channels").at("los").get<std::vector<int>>();
    lane = m.at("channels").at("lane").get<std::vector<int>>();
    position = m.at("channels").at("position").get<std::vector<std::array<double, 3>>>();
    checksum = m.at("payload_checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(IoError::Kind::bad_manifest,
                  path + ": manifest field missing or mistyped: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(IoError::Kind::bad_manifest, path + ": " + e.what());
  }

  if (n < 1 || count < 1) {
    throw IoError(IoError::Kind::structural, path + ": empty dataset");
  }
  if (los.size() != count || lane.size() != count || position.size() != count) {
    throw IoError(IoError::Kind::structural,
                  path + ": per-channel metadata count does not match n_channels");
  }
  const std::size_t entries = static_cast<std::size_t>(n) * n;
  const std::size_t expect = count * (entries * 16 + 2);
  if (file.payload.size() < expect) {
    throw IoError(IoError::Kind::truncated, path + ": payload ends unexpectedly");
  }
  if (file.payload.size() > expect) {
    throw IoError(IoError::Kind::structural,
                  path + ": payload size does not match header counts");
  }
  if (to_hex64(fnv1a64(file.payload)) != checksum) {
    throw IoError(IoError::Kind::checksum_mismatch, path + ": payload checksum mismatch");
  }

  ByteReader reader(file.payload);
  ds.channels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    Channel& ch = ds.channels[i];
    ch.h = ComplexMatrix(n, n);
    for (cplx& z : ch.h.data()) {
      const double re = reader.f64();
      const double im = reader.f64();
      z = cplx(re, im);
    }
    ch.los = los[i] != 0;
    ch.lane = lane[i];
    ch.position = position[i];
  }
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint16_t idx = reader.u16();
    if (idx >= entries) {
      throw IoError(IoError::Kind::structural, path + ": beam label out of range");
    }
    ds.channels[i].label = BeamIndex::from_class(idx, n);
  }
  return ds;
}

}  // namespace beamccs
