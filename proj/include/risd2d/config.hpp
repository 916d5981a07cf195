#pragma once

// Experiment configuration and its flat `key = value` file format.

#include "risd2d/netmodel.hpp"
#include "risd2d/system.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace risd2d {

struct ExperimentConfig {
  int links = 4;
  Area area;
  DistanceRange distance;
  std::vector<Point> ris_positions;  // empty: four surfaces at (+-50, +-50) from the center

  std::vector<int> n_elements{8, 16, 24, 32, 48, 64};
  int n_elements_fixed = 16;  // used by the P_max and R_min sweeps
  std::vector<double> pmax_dbm{-10, -5, 0, 5, 10, 15, 20};
  double pmax_dbm_fixed = 20;
  std::vector<double> rmin{0, 1, 2};
  double rmin_fixed = 0;  // used by the element sweep
  std::vector<int> bits{3, 6};

  double noise_dbm = -117;
  double circuit_dbm = 15;
  double eta = 0.8;
  FadingParams fading;

  int trials = 100;
  std::uint64_t seed = 1;
  double outer_tol = 1e-3;
  int outer_max_iter = 10;
  int randomization_samples = 200;
  int threads = 0;  // 0: hardware concurrency
  std::string output_dir = "results";

  void validate() const;
  std::vector<Point> surfaces() const;
  SystemParams system_params(int bits, double pmax_dbm, double rmin) const;
  /// Round-trips through parse_config.
  std::string to_text() const;
};

/// `source` names the input in error messages.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

}  // namespace risd2d
