#include "risd2d/harness.hpp"

#include "risd2d/oracle.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace risd2d {

namespace {

AlgorithmOutcome outcome(const ChannelRealization& chan, const PhaseConfig& phase,
                         const SystemParams& params, const DinkelbachResult& d) {
  AlgorithmOutcome out;
  out.failure = d.status == PowerStatus::failure;
  if (!out.failure) {
    out.energy_efficiency = d.energy_efficiency;
    out.sum_rate = sum_rate(chan, phase, d.p, params);
    out.total_power = total_power(d.p, params, chan.elements());
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

JointResult optimize_joint(const ChannelRealization& chan, const SystemParams& params,
                           const PhaseConfig& init, const JointOptions& options) {
  const int L = chan.links();
  params.validate(L);
  const PowerAlloc full = PowerAlloc::uniform(L, params.p_max);

  JointResult res;
  res.phase = init;
  res.initial = dinkelbach(chan, init, params, full);
  DinkelbachResult current = res.initial;
  if (current.status == PowerStatus::failure && chan.elements() > 0) {
    // The rate floors may only be reachable with better phases.
    const PhaseResult pr = optimize_phases(chan, full, params, init, options.phase);
    if (pr.feasible) {
      res.phase = pr.phase;
      current = dinkelbach(chan, res.phase, params, full);
    }
  }
  res.p = current.p;
  if (current.status == PowerStatus::failure) {
    res.failure = true;
    return res;
  }

  double ee = current.energy_efficiency;
  res.trace.push_back(ee);
  if (chan.elements() > 0) {
    PhaseOptions popt = options.phase;
    for (int it = 1; it <= options.outer_max_iter; ++it) {
      res.iterations = it;
      popt.seed = options.phase.seed + static_cast<std::uint64_t>(it);
      const PhaseResult pr = optimize_phases(chan, res.p, params, res.phase, popt);
      if (!pr.feasible) break;
      const DinkelbachResult d = dinkelbach(chan, pr.phase, params, res.p);
      PowerAlloc next_p = res.p;
      double next_ee = energy_efficiency(chan, pr.phase, res.p, params);
      if (d.status != PowerStatus::failure && d.energy_efficiency > next_ee) {
        next_p = d.p;
        next_ee = d.energy_efficiency;
      }
      if (next_ee < ee) break;
      const double gain = (next_ee - ee) / ee;
      res.phase = pr.phase;
      res.p = next_p;
      ee = next_ee;
      res.trace.push_back(ee);
      if (gain < options.outer_tol) break;
    }
  }
  res.energy_efficiency = ee;
  res.sum_rate = sum_rate(chan, res.phase, res.p, params);
  res.total_power = total_power(res.p, params, chan.elements());
  return res;
}

JointResult optimize_joint(const ChannelRealization& chan, const SystemParams& params,
                           std::uint64_t seed, double eta, const JointOptions& options) {
  Rng rng(seed);
  const PhaseConfig init = PhaseConfig::random(chan.elements(), eta, rng);
  JointOptions opts = options;
  opts.phase.seed = rng();
  return optimize_joint(chan, params, init, opts);
}

TrialResult run_trial(const ExperimentConfig& config, const TrialSpec& spec, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Point> surfaces = config.surfaces();
  Rng rng(seed);
  const Topology topo =
      sample_topology(config.area, config.links, surfaces,
                      split_elements(spec.elements, static_cast<int>(surfaces.size())),
                      config.distance, rng);
  const ChannelRealization chan = realize_channels(topo, config.fading, rng);
  const PhaseConfig init = PhaseConfig::random(spec.elements, config.eta, rng);
  const std::uint64_t randomization_seed = rng();
  const SystemParams params = config.system_params(spec.bits, spec.pmax_dbm, spec.rmin);

  JointOptions opts;
  opts.outer_tol = config.outer_tol;
  opts.outer_max_iter = config.outer_max_iter;
  opts.phase.samples = config.randomization_samples;
  opts.phase.seed = randomization_seed;
  const JointResult joint = optimize_joint(chan, params, init, opts);
  const BaselineResult base = baselines(chan, params, init);

  TrialResult tr;
  tr.seed = seed;
  tr.bits = spec.bits;
  tr.rmin = spec.rmin;
  tr.main.failure = joint.failure;
  if (!joint.failure) {
    tr.main.energy_efficiency = joint.energy_efficiency;
    tr.main.sum_rate = joint.sum_rate;
    tr.main.total_power = joint.total_power;
  }
  tr.no_ris = outcome(chan.without_ris(), PhaseConfig::zeros(0, config.eta), params, base.no_ris);
  tr.random_phase = outcome(chan, init, params, base.random_phase);
  tr.outer_iterations = joint.iterations;
  tr.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return tr;
}

SweepKind parse_sweep_kind(const std::string& name) {
  if (name == "n-elements") return SweepKind::n_elements;
  if (name == "pmax") return SweepKind::pmax;
  if (name == "rmin") return SweepKind::rmin;
  throw std::invalid_argument("unknown sweep '" + name + "' (expected n-elements, pmax or rmin)");
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::n_elements: return "n-elements";
    case SweepKind::pmax: return "pmax";
    case SweepKind::rmin: return "rmin";
  }
  return "unknown";
}

const char* const kCsvHeader =
    "sweep_var,value,b,mean_ee_bits_per_hz_per_joule,failure_rate,mean_sum_rate,"
    "mean_total_power_w,trials\n";

std::string to_csv(const SweepTable& table) {
  std::string out = kCsvHeader;
  for (const SweepRow& r : table.rows) {
    out += r.sweep_var + "," + format_number(r.value) + "," + std::to_string(r.bits) + "," +
           format_number(r.mean_ee) + "," + format_number(r.failure_rate) + "," +
           format_number(r.mean_sum_rate) + "," + format_number(r.mean_total_power) + "," +
           std::to_string(r.trials) + "\n";
  }
  return out;
}

void ensure_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw std::runtime_error("output directory is not usable: " + dir.string());
  }
  const std::filesystem::path probe = dir / ".risd2d_write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "probe")) {
      throw std::runtime_error("output directory is not writable: " + dir.string());
    }
  }
  std::filesystem::remove(probe, ec);
}

namespace {

struct SweepPoint {
  std::size_t table;
  double value;
  TrialSpec spec;
};

}  // namespace

SweepResult run_sweep(const ExperimentConfig& config, SweepKind kind, const ProgressFn& progress) {
  config.validate();

  // Sweep points grouped into output tables; each table gets the main algorithm file
  // plus one file per baseline.
  std::vector<std::string> stems;
  std::string sweep_var;
  std::vector<SweepPoint> points;
  switch (kind) {
    case SweepKind::n_elements:
      stems.push_back("fig2_n_elements");
      sweep_var = "n_elements";
      for (int n : config.n_elements) {
        for (int b : config.bits) points.push_back({0, double(n), {n, b, config.pmax_dbm_fixed, config.rmin_fixed}});
      }
      break;
    case SweepKind::pmax:
      sweep_var = "pmax_dbm";
      for (std::size_t r = 0; r < config.rmin.size(); ++r) {
        char stem[64];
        std::snprintf(stem, sizeof stem, "fig3_pmax_rmin_%g", config.rmin[r]);
        stems.push_back(stem);
        for (double pm : config.pmax_dbm) {
          for (int b : config.bits) points.push_back({r, pm, {config.n_elements_fixed, b, pm, config.rmin[r]}});
        }
      }
      break;
    case SweepKind::rmin:
      stems.push_back("rmin_sweep");
      sweep_var = "rmin";
      for (double r : config.rmin) {
        for (int b : config.bits) points.push_back({0, r, {config.n_elements_fixed, b, config.pmax_dbm_fixed, r}});
      }
      break;
  }

  const std::size_t trials = static_cast<std::size_t>(config.trials);
  const std::size_t total = points.size() * trials;
  SweepResult result;
  result.trials.resize(total);

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t done = 0;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= total) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (error) return;
      }
      const SweepPoint& pt = points[k / trials];
      const std::uint64_t seed = config.seed ^ static_cast<std::uint64_t>(k % trials);
      try {
        TrialResult tr = run_trial(config, pt.spec, seed);
        tr.sweep_value = pt.value;
        result.trials[k] = tr;
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        return;
      }
      std::lock_guard<std::mutex> lock(mu);
      ++done;
      if (progress) progress(done, total);
    }
  };
  unsigned n_threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, std::max<std::size_t>(total, 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  const char* suffixes[] = {"", "_no_ris", "_random_phase"};
  for (std::size_t s = 0; s < stems.size(); ++s) {
    for (int algo = 0; algo < 3; ++algo) {
      SweepTable table;
      table.file_name = stems[s] + suffixes[algo] + ".csv";
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (points[p].table != s) continue;
        SweepRow row;
        row.sweep_var = sweep_var;
        row.value = points[p].value;
        row.bits = points[p].spec.bits;
        row.trials = config.trials;
        int failures = 0;
        double ee = 0.0, rate = 0.0, power = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
          const TrialResult& tr = result.trials[p * trials + t];
          const AlgorithmOutcome& o = algo == 0 ? tr.main : algo == 1 ? tr.no_ris : tr.random_phase;
          if (o.failure) {
            ++failures;
            continue;
          }
          ee += o.energy_efficiency;
          rate += o.sum_rate;
          power += o.total_power;
        }
        const int ok = config.trials - failures;
        row.mean_ee = ee / config.trials;
        row.failure_rate = static_cast<double>(failures) / config.trials;
        row.mean_sum_rate = ok > 0 ? rate / ok : 0.0;
        row.mean_total_power = ok > 0 ? power / ok : 0.0;
        table.rows.push_back(row);
      }
      result.tables.push_back(std::move(table));
    }
  }
  return result;
}

std::vector<std::filesystem::path> write_sweep(const SweepResult& result,
                                               const std::filesystem::path& dir) {
  ensure_writable_dir(dir);
  std::vector<std::filesystem::path> written;
  for (const SweepTable& table : result.tables) {
    const std::filesystem::path path = dir / table.file_name;
    std::ofstream out(path, std::ios::binary);
    out << to_csv(table);
    if (!out) throw std::runtime_error("failed to write " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace risd2d
