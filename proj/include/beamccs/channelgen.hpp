#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "beamccs/numkit.hpp"
#include "beamccs/rng.hpp"

namespace beamccs {

/// Roadside geometry and propagation knobs for the synthetic vehicular
/// scenario: an RSU-mounted N x N array serving vehicles on parallel lanes.
struct ScenarioConfig {
  int n_antennas = 16;
  double rsu_height = 5.0;                   // meters
  std::vector<double> lane_offsets = {4.0, 7.0};  // lane distance from RSU foot
  double road_span = 50.0;                   // vehicle x in [-road_span, road_span]
  double rx_height = 1.5;
  int n_nlos_paths = 3;
  double blockage_prob = 0.2;                // probability the LoS path is removed
  double nlos_gain_db = -10.0;               // mean NLoS-to-LoS power offset
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on out-of-domain values (N must be a
  /// power of two >= 4, lane offsets positive and distinct, ...).
  void validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
/// Strict parse: unknown keys are rejected, missing keys keep defaults.
ScenarioConfig scenario_from_json(const nlohmann::json& j);

/// One channel realization with its exhaustive-search beam label.
struct Channel {
  ComplexMatrix h;
  BeamIndex label;
  bool los = true;
  std::array<double, 3> position{};  // vehicle (x, y, z) in meters
  int lane = 0;
};

enum class Split { train, test };
enum class Scaling { per_channel, common };

struct Dataset {
  ScenarioConfig config;
  std::vector<Channel> channels;
  Split split = Split::train;
  Scaling scaling = Scaling::per_channel;
};

/// Half-wavelength UPA response A(r,c) = exp(j pi (r u + c v)) for spatial
/// frequencies u, v in [-1, 1).
ComplexMatrix steering_matrix(int n, double u, double v);

/// Draws a vehicle position on a random lane, builds the LoS + perturbed
/// NLoS channel, and labels it with the argmax of |dft2(H)|. The LoS term is
/// removed with probability blockage_prob.
Channel sample_channel(const ScenarioConfig& cfg, Rng& rng);

/// Train/test pair: the train split is scaled per channel to ||H||_F = N,
/// the test split by one common factor so mean ||H||_F^2 = N^2. Labels are
/// assigned before scaling. Channel i is generated from a sub-seed derived
/// from (config.seed, split, i), so parallel and serial generation agree
/// bit-exactly.
std::pair<Dataset, Dataset> generate_dataset(const ScenarioConfig& cfg,
                                             int n_train, int n_test);

/// Entry (i,j) = fraction of channels labeled (i,j); sums to one.
RealMatrix beamspace_prior(const Dataset& dataset);

struct PriorConcentration {
  double entropy_bits = 0.0;
  double frac_bins_80 = 0.0;  // fraction of bins holding 80% of the mass
  double frac_bins_95 = 0.0;
  int support = 0;            // bins with nonzero mass
};

PriorConcentration prior_concentration(const RealMatrix& prior);

/// `extra` is merged into the manifest (reserved keys win); callers use it to
/// embed the effective run configuration.
void save_dataset(const Dataset& dataset, const std::string& path,
                  const nlohmann::json& extra = nlohmann::json::object());
Dataset load_dataset(const std::string& path);

std::string split_name(Split s);
std::string scaling_name(Scaling s);

}  // namespace beamccs
