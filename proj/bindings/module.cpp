#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "d2dsgd/aircomp.hpp"
#include "d2dsgd/channel.hpp"
#include "d2dsgd/compression.hpp"
#include "d2dsgd/harness.hpp"
#include "d2dsgd/scheduler.hpp"
#include "d2dsgd/topology.hpp"

namespace py = pybind11;
using namespace d2dsgd;

namespace {

py::dict stats_dict(const RunStats& s) {
    py::dict d;
    d["blocks"] = s.blocks;
    d["local_steps"] = s.local_steps;
    d["consensus_rounds"] = s.consensus_rounds;
    d["fading_draws"] = s.fading_draws;
    d["schedule_builds"] = s.schedule_builds;
    d["mixing_builds"] = s.mixing_builds;
    d["digital_transmissions"] = s.digital_transmissions;
    d["digital_zero_budget"] = s.digital_zero_budget;
    d["error_updates"] = s.error_updates;
    d["aircomp_receptions"] = s.aircomp_receptions;
    d["broadcast_receptions"] = s.broadcast_receptions;
    d["broadcast_erasures"] = s.broadcast_erasures;
    d["deep_fade_exclusions"] = s.deep_fade_exclusions;
    d["recoveries"] = s.recoveries;
    d["exact_payload_blocks"] = s.exact_payload_blocks;
    d["power_violations"] = s.power_violations;
    d["max_power_ratio"] = s.max_power_ratio;
    return d;
}

py::list rows_list(const std::vector<MetricsRow>& rows) {
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["episode_seed"] = r.episode_seed;
        d["block_index"] = r.block_index;
        d["iteration"] = r.iteration;
        d["mode"] = r.mode;
        d["avg_test_accuracy"] = r.avg_test_accuracy;
        d["per_device"] = r.per_device;
        out.append(d);
    }
    return out;
}

ExperimentConfig config_from_options(const py::dict& options, ExperimentConfig cfg) {
    for (auto item : options) {
        set_config_key(cfg, py::cast<std::string>(py::str(item.first)),
                       py::cast<std::string>(py::str(item.second)));
    }
    return cfg;
}

py::dict run_result(const RunResult& res) {
    py::dict out;
    out["rows"] = rows_list(res.rows);
    out["stats"] = stats_dict(res.stats);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decentralized SGD over a simulated device-to-device wireless network";

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<>())
        .def_readwrite("a0", &ChannelParams::a0)
        .def_readwrite("d0", &ChannelParams::d0)
        .def_readwrite("pathloss_exp", &ChannelParams::pathloss_exp)
        .def_readwrite("n0", &ChannelParams::n0)
        .def_readwrite("pbar", &ChannelParams::pbar)
        .def_readwrite("n_uses", &ChannelParams::n_uses);

    m.def(
        "run",
        [](const py::dict& options) {
            ExperimentConfig cfg = config_from_options(options, ExperimentConfig{});
            return run_result(run_experiment(cfg));
        },
        py::arg("options") = py::dict(),
        "Run a learning session. Keys and values are the config-file entries as strings,\n"
        "e.g. {'mode': 'analog', 'blocks': '50', 'seeds': '1,2,3'}. Returns a dict with\n"
        "'rows' (per-block metrics) and 'stats' (event counters).");

    m.def(
        "run_config",
        [](const std::string& path, const py::dict& overrides) {
            ExperimentConfig cfg = config_from_options(overrides, load_config_file(path));
            return run_result(run_experiment(cfg));
        },
        py::arg("path"), py::arg("overrides") = py::dict(),
        "Run the session described by a config file, with optional key overrides.");

    m.def(
        "star_extended_graph",
        [](std::uint64_t seed, int devices, double edge_prob) {
            ConnectivityGraph g = generate_star_extended(seed, devices, edge_prob);
            py::dict d;
            d["edges"] = g.edges;
            d["distances"] = g.edge_dist;
            d["positions"] = g.positions;
            return d;
        },
        py::arg("seed"), py::arg("devices"), py::arg("edge_prob"),
        "Sample the connectivity graph used by the simulator (star plus random extra edges).");

    m.def(
        "mixing_matrix",
        [](int devices, const std::vector<std::pair<int, int>>& edges) {
            MixingMatrix mix = build_mixing_matrix(make_graph(devices, edges));
            std::vector<std::vector<double>> w(devices, std::vector<double>(devices));
            for (int i = 0; i < devices; ++i)
                for (int j = 0; j < devices; ++j) w[i][j] = mix.w(i, j);
            py::dict d;
            d["alpha"] = mix.alpha;
            d["w"] = w;
            return d;
        },
        py::arg("devices"), py::arg("edges"),
        "Laplacian-based consensus weights for a connected graph.");

    m.def(
        "digital_schedule",
        [](int devices, const std::vector<std::pair<int, int>>& edges) {
            DigitalSchedule s = make_digital_schedule(make_graph(devices, edges));
            py::dict d;
            d["num_slots"] = s.num_slots;
            d["slot_of_node"] = s.slot_of_node;
            d["slots"] = s.slots;
            return d;
        },
        py::arg("devices"), py::arg("edges"),
        "Interference-free broadcast slots (conflict-graph coloring).");

    m.def(
        "analog_schedule",
        [](int devices, const std::vector<std::pair<int, int>>& edges) {
            AnalogSchedule s = make_analog_schedule(make_graph(devices, edges));
            py::list rounds;
            for (const auto& r : s.rounds) {
                py::dict rd;
                rd["centers"] = r.centers;
                rd["edges"] = r.active_edges;
                rounds.append(rd);
            }
            py::dict d;
            d["num_slots"] = s.num_slots;
            d["rounds"] = rounds;
            return d;
        },
        py::arg("devices"), py::arg("edges"),
        "Star-selection rounds covering every edge exactly once; two slots per round.");

    m.def("default_sparsity", &default_sparsity, py::arg("dim"), py::arg("devices"),
          "Per-device sparsity level floor(d*(1-0.4^(1/K))).");

    m.def("max_sparsity_level", &max_sparsity_level, py::arg("budget_bits"), py::arg("dim"),
          py::arg("bits_per_value"),
          "Largest support size whose position and value bits fit the budget.");

    m.def(
        "compress_top_l",
        [](const Vec& values, double budget_bits, int bits, bool charge_header) {
            QuantConfig q;
            q.bits = bits;
            q.charge_header = charge_header;
            CompressedVector cv = compress(values, budget_bits, q);
            py::dict d;
            d["support"] = cv.support;
            d["values"] = cv.values;
            d["lo"] = cv.lo;
            d["hi"] = cv.hi;
            d["dense"] = cv.dense();
            d["position_bits"] = cv.position_bits();
            d["payload_bits"] = cv.payload_bits(charge_header);
            return d;
        },
        py::arg("values"), py::arg("budget_bits"), py::arg("bits") = 16,
        py::arg("charge_header") = false,
        "Top-l + uniform quantization under a bit budget, as sent on the digital path.");

    m.def(
        "project_sparse",
        [](std::uint64_t seed, int m, int dim, const std::vector<int>& idx, const Vec& val) {
            CompressionMatrix a = build_compression_matrix(seed, m, dim);
            SparseVec s;
            s.dim = dim;
            s.idx = idx;
            s.val = val;
            return project(a, s);
        },
        py::arg("seed"), py::arg("m"), py::arg("dim"), py::arg("idx"), py::arg("val"),
        "Apply the seeded m-by-dim compression matrix to a sparse vector.");

    m.def(
        "sparse_recover",
        [](std::uint64_t seed, int m, int dim, const Vec& y, double lam, int iters) {
            CompressionMatrix a = build_compression_matrix(seed, m, dim);
            return sparse_recover(y, a, lam, iters);
        },
        py::arg("seed"), py::arg("m"), py::arg("dim"), py::arg("y"), py::arg("lam") = 0.0,
        py::arg("iters") = 200,
        "L1 recovery with least-squares debiasing against the seeded matrix.");

    m.def("bottleneck_snr_db", &measure_bottleneck_snr_db, py::arg("seed"),
          py::arg("num_topologies"), py::arg("blocks_per_topology"), py::arg("devices"),
          py::arg("edge_prob"), py::arg("d_min"), py::arg("d_max"),
          py::arg("params") = ChannelParams{},
          "Average worst-link receive SNR over random topologies and fading blocks.");
}
