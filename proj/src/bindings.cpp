#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fgc/bp.hpp"
#include "fgc/delay.hpp"
#include "fgc/errors.hpp"
#include "fgc/experiment.hpp"
#include "fgc/greedy.hpp"
#include "fgc/model.hpp"
#include "fgc/oracle.hpp"
#include "fgc/rates.hpp"

namespace py = pybind11;
using namespace fgc;

PYBIND11_MODULE(fograncache, m) {
    m.doc() = "Fog-RAN cache placement: delay model, greedy and message-passing solvers";
    m.attr("__version__") = FGC_VERSION;

    py::enum_<Geometry>(m, "Geometry")
        .value("LINE", Geometry::Line)
        .value("GRID", Geometry::Grid);
    py::enum_<Scheme>(m, "Scheme")
        .value("NON_COOPERATIVE", Scheme::NonCooperative)
        .value("COOPERATIVE_BEAMFORMING", Scheme::CooperativeBeamforming);
    py::enum_<EtaRule>(m, "EtaRule")
        .value("EXACT_MAX", EtaRule::ExactMax)
        .value("POSITIVE_ONLY", EtaRule::PositiveOnly);

    py::class_<NetworkInstance>(m, "NetworkInstance")
        .def_readonly("num_bs", &NetworkInstance::num_bs)
        .def_readonly("num_users", &NetworkInstance::num_users)
        .def_readonly("cell_radius", &NetworkInstance::cell_radius)
        .def_readonly("connectivity", &NetworkInstance::connectivity)
        .def_readonly("coverage_sets", &NetworkInstance::coverage_sets)
        .def_readonly("serving_sets", &NetworkInstance::serving_sets)
        .def_readonly("seed", &NetworkInstance::seed);

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<>())
        .def_readwrite("bandwidth_hz", &ChannelParams::bandwidth_hz)
        .def_readwrite("slot_seconds", &ChannelParams::slot_seconds)
        .def_readwrite("pathloss_exponent", &ChannelParams::pathloss_exponent)
        .def_readwrite("edge_snr_linear", &ChannelParams::edge_snr_linear)
        .def_readwrite("mc_samples", &ChannelParams::mc_samples)
        .def_readwrite("mc_seed", &ChannelParams::mc_seed);

    py::class_<DemandModel>(m, "DemandModel")
        .def_readonly("num_files", &DemandModel::num_files)
        .def_readwrite("file_bits", &DemandModel::file_bits)
        .def_readwrite("backhaul_delay_s", &DemandModel::backhaul_delay_s)
        .def_readonly("preferences", &DemandModel::preferences)
        .def_readonly("support_sets", &DemandModel::support_sets);

    py::class_<LinkGainTable>(m, "LinkGainTable").def_readonly("gain", &LinkGainTable::gain);

    py::class_<ExpectedRateTable>(m, "ExpectedRateTable")
        .def_readonly("mc_samples", &ExpectedRateTable::mc_samples)
        .def("rate", &ExpectedRateTable::rate)
        .def("uncached", &ExpectedRateTable::uncached)
        .def("degree", &ExpectedRateTable::degree);

    py::class_<Placement>(m, "Placement")
        .def(py::init<int, int, std::vector<int>>(), py::arg("num_files"), py::arg("num_bs"),
             py::arg("capacities"))
        .def_readonly("num_files", &Placement::num_files)
        .def_readonly("num_bs", &Placement::num_bs)
        .def_readonly("load", &Placement::load)
        .def("get", &Placement::get)
        .def("set", &Placement::set)
        .def("sets", &Placement::sets)
        .def("feasible", &Placement::feasible);

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("average_delay_s", &EvalReport::average_delay_s)
        .def_readonly("hit_probability", &EvalReport::hit_probability)
        .def_readonly("per_user_delay", &EvalReport::per_user_delay);

    py::class_<DelayContext>(m, "DelayContext")
        .def(py::init<const NetworkInstance&, const DemandModel&, const ExpectedRateTable&,
                      Scheme>(),
             py::keep_alive<1, 2>(), py::keep_alive<1, 3>(), py::keep_alive<1, 4>())
        .def("request_delay", &DelayContext::request_delay)
        .def("miss_delay", &DelayContext::miss_delay);

    py::class_<SolveTrace>(m, "SolveTrace")
        .def_readonly("calculations", &SolveTrace::calculations)
        .def("csv", &SolveTrace::csv);
    py::class_<GreedyResult>(m, "GreedyResult")
        .def_readonly("placement", &GreedyResult::placement)
        .def_readonly("trace", &GreedyResult::trace);

    py::class_<BPOptions>(m, "BPOptions")
        .def(py::init<>())
        .def_readwrite("t_max", &BPOptions::t_max)
        .def_readwrite("epsilon", &BPOptions::epsilon)
        .def_readwrite("damping", &BPOptions::damping)
        .def_readwrite("eta_rule", &BPOptions::eta_rule);
    py::class_<BPTrace>(m, "BPTrace")
        .def_readonly("converged", &BPTrace::converged)
        .def_readonly("rounds_run", &BPTrace::rounds_run)
        .def_readonly("repaired", &BPTrace::repaired)
        .def_readonly("messages_computed", &BPTrace::messages_computed)
        .def_readonly("messages_exchanged", &BPTrace::messages_exchanged)
        .def("csv", &BPTrace::csv);
    py::class_<FactorGraph>(m, "FactorGraph")
        .def_readonly("num_vars", &FactorGraph::num_vars)
        .def("num_eta_edges", &FactorGraph::num_eta_edges);
    py::class_<BPResult>(m, "BPResult")
        .def_readonly("placement", &BPResult::placement)
        .def_readonly("trace", &BPResult::trace);

    py::class_<PopularityAggregates>(m, "PopularityAggregates")
        .def_readonly("global_popularity", &PopularityAggregates::global)
        .def_readonly("local_popularity", &PopularityAggregates::local);

    m.def("build_grid_topology", &build_grid_topology, py::arg("num_bs"), py::arg("num_users"),
          py::arg("cell_radius"), py::arg("bs_spacing"), py::arg("seed"),
          py::arg("geometry") = Geometry::Line);
    m.def("zipf_preferences", &zipf_preferences, py::arg("num_files"), py::arg("gammas"),
          py::arg("seed"));
    m.def("aggregate_popularity", &aggregate_popularity);
    m.def("build_link_gains", &build_link_gains);
    m.def("expected_rate_closed", &expected_rate_closed);
    m.def("expected_rate_mc", &expected_rate_mc);
    m.def("build_rate_table", &build_rate_table, py::arg("net"), py::arg("gains"),
          py::arg("channel"), py::arg("scheme"));
    m.def("objective", &objective);
    m.def("hit_probability", &hit_probability);
    m.def("greedy_place", &greedy_place);
    m.def("greedy_place_lazy", &greedy_place_lazy);
    m.def("gpc_place", &gpc_place);
    m.def("lpc_place", &lpc_place);
    m.def("build_factor_graph", &build_factor_graph, py::keep_alive<0, 1>(),
          py::keep_alive<0, 2>());
    m.def("bp_solve", &bp_solve, py::arg("graph"), py::arg("ctx"), py::arg("capacities"),
          py::arg("options") = BPOptions{});
    m.def("save_instance", &save_instance);
    m.def("load_instance", &load_instance);

    m.def(
        "run_sweep",
        [](const std::string& config_text) {
            SweepResult r = run_sweep(parse_config(config_text));
            py::list rows;
            for (const auto& row : r.rows) {
                py::dict d;
                d["sweep_value"] = row.sweep_value;
                d["strategy"] = strategy_name(row.strategy);
                d["avg_delay_s"] = row.avg_delay_s;
                d["hit_prob"] = row.hit_prob;
                d["calc_count"] = row.calc_count;
                d["bp_rounds"] = row.bp_rounds;
                d["messages_exchanged"] = row.messages_exchanged;
                rows.append(d);
            }
            py::dict out;
            out["rows"] = rows;
            out["csv"] = r.csv;
            out["manifest"] = r.manifest;
            return out;
        },
        py::arg("config_text"), "run a sweep from configuration text, returning rows and CSV");

    py::register_exception<ConfigError>(m, "FgcConfigError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "FgcSolverError", PyExc_RuntimeError);
}
