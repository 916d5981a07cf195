#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "risd2d/config.hpp"
#include "risd2d/fp_beamforming.hpp"
#include "risd2d/harness.hpp"
#include "risd2d/netmodel.hpp"
#include "risd2d/oracle.hpp"
#include "risd2d/power_control.hpp"
#include "risd2d/sdp.hpp"
#include "risd2d/system.hpp"

#include <sstream>

namespace py = pybind11;
using namespace risd2d;

namespace {

ChannelRealization draw_channels(int links, int elements, std::uint64_t seed) {
  Area area;
  Rng rng(seed);
  const std::vector<Point> ris = default_ris_positions(area);
  const Topology topo = sample_topology(area, links, ris,
                                        split_elements(elements, static_cast<int>(ris.size())),
                                        DistanceRange{}, rng);
  return realize_channels(topo, FadingParams{}, rng);
}

py::dict dinkelbach_dict(const DinkelbachResult& r) {
  py::dict d;
  d["p"] = r.p.watts;
  d["lambda"] = r.lambda;
  d["energy_efficiency"] = r.energy_efficiency;
  d["status"] = to_string(r.status);
  std::vector<double> lambdas;
  for (const DinkelbachState& s : r.states) lambdas.push_back(s.lambda);
  d["lambdas"] = lambdas;
  return d;
}

}  // namespace

PYBIND11_MODULE(risd2d, m) {
  m.doc() = "Energy-efficient phase and power optimization for RIS-aided D2D links";

  py::class_<Point>(m, "Point")
      .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
      .def_readwrite("x", &Point::x)
      .def_readwrite("y", &Point::y);

  py::class_<ChannelRealization>(m, "ChannelRealization")
      .def(py::init<>())
      .def_readwrite("direct", &ChannelRealization::direct)
      .def_readwrite("tx_to_ris", &ChannelRealization::tx_to_ris)
      .def_readwrite("ris_to_rx", &ChannelRealization::ris_to_rx)
      .def_property_readonly("links", &ChannelRealization::links)
      .def_property_readonly("elements", &ChannelRealization::elements)
      .def("without_ris", &ChannelRealization::without_ris);

  m.def("draw_channels", &draw_channels, py::arg("links"), py::arg("elements"), py::arg("seed"),
        "Topology and Rician channels with the default geometry.");

  py::class_<PhaseConfig>(m, "PhaseConfig")
      .def(py::init<>())
      .def_readwrite("phases", &PhaseConfig::phases)
      .def_readwrite("eta", &PhaseConfig::eta)
      .def_property_readonly("elements", &PhaseConfig::elements)
      .def("theta", &PhaseConfig::theta)
      .def_static("zeros", &PhaseConfig::zeros, py::arg("elements"), py::arg("eta") = 0.8)
      .def_static("random", [](int n, double eta, std::uint64_t seed) {
        Rng rng(seed);
        return PhaseConfig::random(n, eta, rng);
      }, py::arg("elements"), py::arg("eta") = 0.8, py::arg("seed") = 0);

  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init<>())
      .def_static("defaults", &SystemParams::defaults, py::arg("links"))
      .def_readwrite("noise_power", &SystemParams::noise_power)
      .def_readwrite("circuit_power", &SystemParams::circuit_power)
      .def_readwrite("element_power", &SystemParams::element_power)
      .def_readwrite("resolution_bits", &SystemParams::resolution_bits)
      .def_readwrite("p_max", &SystemParams::p_max)
      .def_readwrite("r_min", &SystemParams::r_min);

  m.def("element_power_for_bits", &element_power_for_bits, py::arg("bits"));
  m.def("dbm_to_watts", &dbm_to_watts);

  m.def("sinrs", [](const ChannelRealization& c, const PhaseConfig& ph, const RVector& p,
                    const SystemParams& sp) { return sinrs(c, ph, PowerAlloc{p}, sp); });
  m.def("sum_rate", [](const ChannelRealization& c, const PhaseConfig& ph, const RVector& p,
                       const SystemParams& sp) { return sum_rate(c, ph, PowerAlloc{p}, sp); });
  m.def("energy_efficiency", [](const ChannelRealization& c, const PhaseConfig& ph, const RVector& p,
                                const SystemParams& sp) { return energy_efficiency(c, ph, PowerAlloc{p}, sp); });

  m.def("optimize_phases", [](const ChannelRealization& c, const RVector& p, const SystemParams& sp,
                              const PhaseConfig& init, std::uint64_t seed) {
    PhaseOptions opt;
    opt.seed = seed;
    const PhaseResult r = optimize_phases(c, PowerAlloc{p}, sp, init, opt);
    py::dict d;
    d["phase"] = r.phase;
    d["trace"] = r.trace;
    d["status"] = to_string(r.status);
    d["feasible"] = r.feasible;
    return d;
  }, py::arg("chan"), py::arg("p"), py::arg("params"), py::arg("init"), py::arg("seed") = 0);

  m.def("dinkelbach", [](const ChannelRealization& c, const PhaseConfig& ph, const SystemParams& sp,
                         std::optional<RVector> p_init) {
    const PowerAlloc start = p_init ? PowerAlloc{*p_init} : PowerAlloc::uniform(c.links(), sp.p_max);
    return dinkelbach_dict(dinkelbach(c, ph, sp, start));
  }, py::arg("chan"), py::arg("phase"), py::arg("params"), py::arg("p_init") = py::none());

  m.def("grid_power_search", [](const ChannelRealization& c, const PhaseConfig& ph,
                                const SystemParams& sp, int points) {
    const GridSearchResult r = grid_power_search(c, ph, sp, GridSpec{points});
    py::dict d;
    d["feasible"] = r.feasible;
    d["p"] = r.p.watts;
    d["energy_efficiency"] = r.energy_efficiency;
    return d;
  }, py::arg("chan"), py::arg("phase"), py::arg("params"), py::arg("points_per_dim") = 200);

  m.def("exhaustive_phase_search", [](const ChannelRealization& c, const RVector& p,
                                      const SystemParams& sp, int bits) {
    const PhaseSearchResult r = exhaustive_phase_search(c, PowerAlloc{p}, sp, bits);
    return py::make_tuple(r.phase, r.sum_rate);
  }, py::arg("chan"), py::arg("p"), py::arg("params"), py::arg("bits"));

  m.def("optimize_joint", [](const ChannelRealization& c, const SystemParams& sp, std::uint64_t seed) {
    const JointResult r = optimize_joint(c, sp, seed);
    py::dict d;
    d["phase"] = r.phase;
    d["p"] = r.p.watts;
    d["energy_efficiency"] = r.energy_efficiency;
    d["failure"] = r.failure;
    d["trace"] = r.trace;
    d["random_phase_energy_efficiency"] = r.initial.energy_efficiency;
    return d;
  }, py::arg("chan"), py::arg("params"), py::arg("seed"));

  m.def("solve_sdp", [](const CMatrix& objective, std::vector<std::tuple<CMatrix, std::string, double>> rows) {
    sdp::Problem prob;
    prob.objective = objective;
    for (auto& [mat, sense, rhs] : rows) {
      if (sense != "<=" && sense != ">=") throw std::invalid_argument("sense must be '<=' or '>='");
      prob.inequalities.push_back({mat, sense == "<=" ? sdp::Sense::less_equal : sdp::Sense::greater_equal, rhs});
    }
    const sdp::Solution sol = sdp::solve(prob);
    const sdp::Residuals res = sdp::verify(prob, sol);
    py::dict d;
    d["q"] = sol.q;
    d["value"] = sol.value;
    d["status"] = sdp::to_string(sol.status);
    d["certified"] = res.certified();
    d["duality_gap"] = res.duality_gap;
    return d;
  }, py::arg("objective"), py::arg("inequalities") = std::vector<std::tuple<CMatrix, std::string, double>>{},
     "Maximize Re Tr(C Q) over Hermitian Q >= 0 with unit diagonal.");

  m.def("parse_config", [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in).to_text();
  }, py::arg("text"), "Parses and re-serializes a config file body.");

  m.def("run_sweep", [](const std::string& config_text, const std::string& sweep, int trials,
                        std::uint64_t seed, const std::string& out_dir) {
    std::istringstream in(config_text);
    ExperimentConfig cfg = parse_config(in);
    cfg.trials = trials;
    cfg.seed = seed;
    cfg.output_dir = out_dir;
    ensure_writable_dir(cfg.output_dir);
    SweepResult res;
    {
      py::gil_scoped_release release;
      res = run_sweep(cfg, parse_sweep_kind(sweep));
    }
    return write_sweep(res, cfg.output_dir);
  }, py::arg("config_text"), py::arg("sweep"), py::arg("trials"), py::arg("seed"), py::arg("out_dir"));
}
