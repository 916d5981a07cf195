#pragma once

// Joint phase/power alternation, Monte Carlo trials and sweep orchestration.

#include "risd2d/config.hpp"
#include "risd2d/fp_beamforming.hpp"
#include "risd2d/netmodel.hpp"
#include "risd2d/power_control.hpp"
#include "risd2d/system.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace risd2d {

struct JointOptions {
  double outer_tol = 1e-3;  // relative EE gain
  int outer_max_iter = 10;
  PhaseOptions phase;
};

struct JointResult {
  PhaseConfig phase;
  PowerAlloc p;
  double energy_efficiency = 0.0;  // 0 on failure
  double sum_rate = 0.0;
  double total_power = 0.0;
  bool failure = false;
  std::vector<double> trace;  // EE after each accepted outer step
  int iterations = 0;
  /// Power control at the initial phases alone (the random-phase baseline when the
  /// initial phases are random).
  DinkelbachResult initial;
};

/// Power control at `init` from p = P_max, then alternates phase and power updates.
/// An outer step is kept only if it does not lower the EE.
JointResult optimize_joint(const ChannelRealization& chan, const SystemParams& params,
                           const PhaseConfig& init, const JointOptions& options = {});
/// Draws the initial phases (and the randomization seed) from `seed`.
JointResult optimize_joint(const ChannelRealization& chan, const SystemParams& params,
                           std::uint64_t seed, double eta = 0.8, const JointOptions& options = {});

struct AlgorithmOutcome {
  double energy_efficiency = 0.0;
  double sum_rate = 0.0;
  double total_power = 0.0;
  bool failure = false;
};

struct TrialResult {
  std::uint64_t seed = 0;
  double sweep_value = 0.0;
  int bits = 0;
  double rmin = 0.0;
  AlgorithmOutcome main;
  AlgorithmOutcome no_ris;
  AlgorithmOutcome random_phase;
  int outer_iterations = 0;
  double wall_seconds = 0.0;
};

struct TrialSpec {
  int elements = 0;
  int bits = 3;
  double pmax_dbm = 20.0;
  double rmin = 0.0;
};

/// One realization: topology, channels, initial phases and the randomization seed are
/// drawn in that order from a generator seeded with `seed`.
TrialResult run_trial(const ExperimentConfig& config, const TrialSpec& spec, std::uint64_t seed);

enum class SweepKind { n_elements, pmax, rmin };

SweepKind parse_sweep_kind(const std::string& name);
std::string to_string(SweepKind kind);

struct SweepRow {
  std::string sweep_var;
  double value = 0.0;
  int bits = 0;
  double mean_ee = 0.0;          // failures count as 0
  double failure_rate = 0.0;
  double mean_sum_rate = 0.0;    // over successful trials
  double mean_total_power = 0.0; // over successful trials
  int trials = 0;
};

struct SweepTable {
  std::string file_name;
  std::vector<SweepRow> rows;
};

struct SweepResult {
  std::vector<SweepTable> tables;
  std::vector<TrialResult> trials;
};

extern const char* const kCsvHeader;
std::string to_csv(const SweepTable& table);

/// Fails with an exception naming the directory if it cannot be created or written.
void ensure_writable_dir(const std::filesystem::path& dir);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (point, b, trial) of the sweep on `config.threads` workers. Trial t uses
/// seed config.seed ^ t. Results do not depend on the thread count.
SweepResult run_sweep(const ExperimentConfig& config, SweepKind kind, const ProgressFn& progress = {});

/// Writes each table to config.output_dir; returns the written paths.
std::vector<std::filesystem::path> write_sweep(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace risd2d
