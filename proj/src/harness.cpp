#include "d2dsgd/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "d2dsgd/aircomp.hpp"
#include "d2dsgd/data.hpp"
#include "d2dsgd/errors.hpp"
#include "d2dsgd/scheduler.hpp"

namespace d2dsgd {

Mode parse_mode(const std::string& name) {
    if (name == "ideal") return Mode::ideal;
    if (name == "digital") return Mode::digital;
    if (name == "analog") return Mode::analog;
    if (name == "tdma_digital") return Mode::tdma_digital;
    if (name == "tdma_analog") return Mode::tdma_analog;
    if (name == "none") return Mode::none;
    throw ConfigError("unknown mode '" + name +
                      "' (expected ideal|digital|analog|tdma_digital|tdma_analog|none)");
}

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::ideal: return "ideal";
        case Mode::digital: return "digital";
        case Mode::analog: return "analog";
        case Mode::tdma_digital: return "tdma_digital";
        case Mode::tdma_analog: return "tdma_analog";
        case Mode::none: return "none";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    if (seeds.empty()) throw ConfigError("need at least one episode seed");
    if (devices < 2) throw ConfigError("need at least two devices");
    if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge_prob must lie in [0, 1]");
    if (!(d_min > 0.0) || !(d_max > d_min)) throw ConfigError("need 0 < d_min_m < d_max_m");
    channel.validate();
    learn.validate();
    if (blocks < 1) throw ConfigError("need at least one block");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be non-negative");
    if (quant.bits < 1 || quant.bits > 32) throw ConfigError("quant_bits must lie in [1, 32]");
    if (sparsity_k < 0) throw ConfigError("sparsity_k must be non-negative");
    if (!(lasso_lambda_scale >= 0.0)) throw ConfigError("lasso_lambda_scale must be non-negative");
    if (lasso_iters < 1) throw ConfigError("lasso_iters must be at least 1");
    if (!(deep_fade_threshold >= 0.0)) throw ConfigError("deep_fade_threshold must be non-negative");
    if (dataset != "synth" && dataset != "idx")
        throw ConfigError("dataset must be 'synth' or 'idx'");
    if (dataset == "synth") {
        if (synth_classes < 5) throw ConfigError("synth_classes must be at least 5");
        if (synth_dim < 1) throw ConfigError("synth_dim must be positive");
        if (synth_train_per_class < 1 || synth_test_per_class < 1)
            throw ConfigError("synthetic per-class counts must be positive");
        if (!(synth_spread > 0.0)) throw ConfigError("synth_spread must be positive");
    } else {
        if (idx_train_images.empty() || idx_train_labels.empty() || idx_test_images.empty() ||
            idx_test_labels.empty())
            throw ConfigError("idx dataset needs all four file paths");
    }
    if (samples_per_device < 1) throw ConfigError("samples_per_device must be positive");
    if (out.empty()) throw ConfigError("output path must not be empty");
}

namespace {

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok.erase(0, tok.find_first_not_of(" \t"));
        tok.erase(tok.find_last_not_of(" \t") + 1);
        if (tok.empty()) continue;
        try {
            std::size_t used = 0;
            seeds.push_back(std::stoull(tok, &used));
            if (used != tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': bad seed '" + tok + "'");
        }
    }
    if (seeds.empty()) throw ConfigError("key '" + key + "': empty seed list");
    return seeds;
}

}  // namespace

void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "mode") cfg.mode = parse_mode(value);
    else if (key == "seeds") cfg.seeds = parse_seed_list(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "emit_plot_script") cfg.emit_plot_script = parse_bool(key, value);
    else if (key == "devices") cfg.devices = static_cast<int>(parse_int(key, value));
    else if (key == "edge_prob") cfg.edge_prob = parse_real(key, value);
    else if (key == "d_min_m") cfg.d_min = parse_real(key, value);
    else if (key == "d_max_m") cfg.d_max = parse_real(key, value);
    else if (key == "a0_db") cfg.channel.a0 = db_to_linear(parse_real(key, value));
    else if (key == "d0_m") cfg.channel.d0 = parse_real(key, value);
    else if (key == "pathloss_exp") cfg.channel.pathloss_exp = parse_real(key, value);
    else if (key == "n0_dbm") cfg.channel.n0 = dbm_to_watts(parse_real(key, value));
    else if (key == "pbar_mw") cfg.channel.pbar = 1e-3 * parse_real(key, value);
    else if (key == "channel_uses_per_block") cfg.channel.n_uses = parse_int(key, value);
    else if (key == "eta0") cfg.learn.eta0 = parse_real(key, value);
    else if (key == "eta_decay_iters") cfg.learn.eta_decay = parse_real(key, value);
    else if (key == "tau") cfg.learn.tau = static_cast<int>(parse_int(key, value));
    else if (key == "batch_size") cfg.learn.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "blocks") cfg.blocks = static_cast<int>(parse_int(key, value));
    else if (key == "init_scale") cfg.init_scale = parse_real(key, value);
    else if (key == "quant_bits") cfg.quant.bits = static_cast<int>(parse_int(key, value));
    else if (key == "charge_header_bits") cfg.quant.charge_header = parse_bool(key, value);
    else if (key == "digital_lossless") cfg.digital_lossless = parse_bool(key, value);
    else if (key == "sparsity_k") cfg.sparsity_k = static_cast<int>(parse_int(key, value));
    else if (key == "lasso_lambda_scale") cfg.lasso_lambda_scale = parse_real(key, value);
    else if (key == "lasso_iters") cfg.lasso_iters = static_cast<int>(parse_int(key, value));
    else if (key == "deep_fade_threshold") cfg.deep_fade_threshold = parse_real(key, value);
    else if (key == "noise_off") cfg.noise_off = parse_bool(key, value);
    else if (key == "dataset") cfg.dataset = value;
    else if (key == "data_seed") cfg.data_seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "synth_classes") cfg.synth_classes = static_cast<int>(parse_int(key, value));
    else if (key == "synth_dim") cfg.synth_dim = static_cast<int>(parse_int(key, value));
    else if (key == "synth_train_per_class") cfg.synth_train_per_class = static_cast<int>(parse_int(key, value));
    else if (key == "synth_test_per_class") cfg.synth_test_per_class = static_cast<int>(parse_int(key, value));
    else if (key == "synth_spread") cfg.synth_spread = parse_real(key, value);
    else if (key == "idx_train_images") cfg.idx_train_images = value;
    else if (key == "idx_train_labels") cfg.idx_train_labels = value;
    else if (key == "idx_test_images") cfg.idx_test_images = value;
    else if (key == "idx_test_labels") cfg.idx_test_labels = value;
    else if (key == "samples_per_device") cfg.samples_per_device = static_cast<int>(parse_int(key, value));
    else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r\n");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r\n");
        line = line.substr(first, last - first + 1);

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        value.erase(value.find_last_not_of(" \t") + 1);
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        try {
            set_config_key(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

struct EpisodeSetup {
    ConnectivityGraph graph;
    MixingMatrix mix;
    DigitalSchedule digital;
    AnalogSchedule analog;
    CompressionMatrix matrix;
    bool exact_payloads = false;
    double lipschitz = 0.0;
    int resolved_k = 0;
};

void run_episode(const ExperimentConfig& cfg, std::uint64_t seed, const Model& model,
                 const Dataset& train, const Dataset& test, std::vector<MetricsRow>& rows,
                 RunStats& stats) {
    const bool needs_graph = cfg.mode != Mode::none;
    const bool digital_family = cfg.mode == Mode::digital || cfg.mode == Mode::tdma_digital;
    const bool analog_family = cfg.mode == Mode::analog || cfg.mode == Mode::tdma_analog;
    const int d = model.dim();

    EpisodeSetup ep;
    if (needs_graph) {
        ep.graph = generate_star_extended(seed, cfg.devices, cfg.edge_prob, cfg.d_min, cfg.d_max);
        ep.mix = build_mixing_matrix(ep.graph);
        ++stats.mixing_builds;
    }
    if (digital_family) {
        ep.digital = cfg.mode == Mode::digital ? make_digital_schedule(ep.graph)
                                               : make_digital_tdma_schedule(ep.graph);
        ++stats.schedule_builds;
    }
    if (analog_family) {
        ep.analog = cfg.mode == Mode::analog ? make_analog_schedule(ep.graph)
                                             : make_analog_tdma_schedule(ep.graph);
        ++stats.schedule_builds;
        ep.resolved_k = cfg.sparsity_k > 0 ? std::min(cfg.sparsity_k, d)
                                           : default_sparsity(d, cfg.devices);
        const long m_raw = ep.analog.num_slots > 0
                               ? static_cast<long>(cfg.channel.n_uses / ep.analog.num_slots)
                               : 0;
        if (m_raw >= d) {
            // Enough channel uses to ship the payload whole; the projection
            // would only add work.
            ep.exact_payloads = true;
        } else {
            if (m_raw < 1)
                throw ConfigError("analog schedule leaves no channel uses per slot");
            ep.matrix = build_compression_matrix(seed, static_cast<int>(m_raw), d);
            ep.lipschitz = largest_eigenvalue_ata(ep.matrix.a);
            if (!(ep.lipschitz > 0.0))
                throw NumericError("power iteration failed on the compression matrix");
            ep.lipschitz *= 1.001;
        }
    }

    const PartitionSpec part = partition_noniid(seed, train, cfg.devices, cfg.samples_per_device);
    std::vector<DeviceState> devs;
    devs.reserve(cfg.devices);
    for (int i = 0; i < cfg.devices; ++i) {
        devs.emplace_back(i, d, part.indices[i], derive_seed(seed, Stream::batch, i));
        if (cfg.init_scale > 0.0) {
            Rng init_rng(derive_seed(seed, Stream::init, i));
            for (double& x : devs.back().theta) x = cfg.init_scale * init_rng.normal();
        }
    }

    for (int b = 1; b <= cfg.blocks; ++b) {
        for (int it = 1; it <= cfg.learn.tau; ++it) {
            const long t = static_cast<long>(b - 1) * cfg.learn.tau + it;
            if (it < cfg.learn.tau || cfg.mode == Mode::none) {
                for (auto& dev : devs) local_step(dev, model, train, t, cfg.learn);
                stats.local_steps += cfg.devices;
                continue;
            }
            // Communication block boundary.
            if (cfg.mode == Mode::ideal) {
                ideal_consensus(devs, ep.mix, model, train, t, cfg.learn);
                ++stats.consensus_rounds;
            } else if (digital_family) {
                const BlockChannelState chan = sample_block_fading(seed, b, ep.graph, cfg.channel);
                ++stats.fading_draws;
                DigitalOptions opts;
                opts.quant = cfg.quant;
                opts.lossless = cfg.digital_lossless;
                digital_consensus(devs, ep.mix, ep.graph, ep.digital, chan, cfg.channel, opts,
                                  model, train, t, cfg.learn, stats);
            } else if (analog_family) {
                const BlockChannelState chan = sample_block_fading(seed, b, ep.graph, cfg.channel);
                ++stats.fading_draws;
                AnalogOptions opts;
                opts.sparsity_k = ep.resolved_k;
                opts.lambda_scale = cfg.lasso_lambda_scale;
                opts.lasso_iters = cfg.lasso_iters;
                opts.deep_fade_threshold = cfg.deep_fade_threshold;
                opts.noise_on = !cfg.noise_off;
                opts.exact_payloads = ep.exact_payloads;
                opts.lipschitz = ep.lipschitz;
                opts.noise_seed = derive_seed(seed, Stream::noise, static_cast<std::uint64_t>(b));
                if (ep.exact_payloads) ++stats.exact_payload_blocks;
                analog_consensus(devs, ep.mix, ep.graph, ep.analog,
                                 ep.exact_payloads ? nullptr : &ep.matrix, chan, cfg.channel,
                                 opts, model, train, t, cfg.learn, stats);
            }
        }

        MetricsRow row;
        row.episode_seed = seed;
        row.block_index = b;
        row.iteration = static_cast<long>(b) * cfg.learn.tau;
        row.mode = mode_name(cfg.mode);
        row.per_device.reserve(cfg.devices);
        double acc = 0.0;
        for (const auto& dev : devs) {
            const double a = model_accuracy(model, dev.theta, test);
            row.per_device.push_back(a);
            acc += a;
        }
        row.avg_test_accuracy = acc / cfg.devices;
        rows.push_back(std::move(row));
        ++stats.blocks;
    }
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    Dataset train, test;
    if (cfg.dataset == "synth") {
        const Dataset full = synth_dataset(cfg.data_seed, cfg.synth_classes, cfg.synth_dim,
                                           cfg.synth_train_per_class + cfg.synth_test_per_class,
                                           cfg.synth_spread);
        auto split = split_per_class(full, cfg.synth_train_per_class);
        train = std::move(split.first);
        test = std::move(split.second);
    } else {
        train = load_idx(cfg.idx_train_images, cfg.idx_train_labels);
        test = load_idx(cfg.idx_test_images, cfg.idx_test_labels);
        if (train.feature_dim != test.feature_dim)
            throw FormatError("train and test feature dimensions differ");
        const int c = std::max(train.num_classes, test.num_classes);
        train.num_classes = c;
        test.num_classes = c;
    }

    Model model{train.feature_dim, train.num_classes};

    RunResult result;
    for (std::uint64_t seed : cfg.seeds) {
        const std::string ctx = "episode seed " + std::to_string(seed) + ": ";
        try {
            run_episode(cfg, seed, model, train, test, result.rows, result.stats);
        } catch (const ConfigError&) {
            throw;
        } catch (const TopologyError& e) {
            throw TopologyError(ctx + e.what());
        } catch (const ScheduleError& e) {
            throw ScheduleError(ctx + e.what());
        } catch (const PartitionError& e) {
            throw PartitionError(ctx + e.what());
        } catch (const FormatError& e) {
            throw FormatError(ctx + e.what());
        } catch (const std::runtime_error& e) {
            throw NumericError(ctx + e.what());
        }
    }
    return result;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "episode_seed,block_index,iteration,mode,avg_test_accuracy\n";
    char buf[128];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%llu,%ld,%ld,%s,%.6f\n",
                      static_cast<unsigned long long>(r.episode_seed), r.block_index, r.iteration,
                      r.mode.c_str(), r.avg_test_accuracy);
        out += buf;
    }
    return out;
}

void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << metrics_to_csv(rows);
    out.flush();
    if (!out) throw FormatError("failed writing '" + path + "'");
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("metrics csv is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "episode_seed,block_index,iteration,mode,avg_test_accuracy")
        throw FormatError("metrics csv has an unexpected header");

    std::vector<MetricsRow> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        MetricsRow r;
        try {
            if (!std::getline(ss, tok, ',')) throw std::invalid_argument("");
            r.episode_seed = std::stoull(tok);
            if (!std::getline(ss, tok, ',')) throw std::invalid_argument("");
            r.block_index = std::stol(tok);
            if (!std::getline(ss, tok, ',')) throw std::invalid_argument("");
            r.iteration = std::stol(tok);
            if (!std::getline(ss, r.mode, ',')) throw std::invalid_argument("");
            if (!std::getline(ss, tok, ',')) throw std::invalid_argument("");
            r.avg_test_accuracy = std::stod(tok);
        } catch (const std::exception&) {
            throw FormatError("metrics csv line " + std::to_string(line_no) + ": malformed row");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string plot_script_text(const std::string& csv_path) {
    std::string s;
    s += "#!/usr/bin/env python3\n";
    s += "\"\"\"Plot average test accuracy per communication block, one line per mode.\"\"\"\n";
    s += "import csv\n";
    s += "from collections import defaultdict\n\n";
    s += "import matplotlib\n";
    s += "matplotlib.use(\"Agg\")\n";
    s += "import matplotlib.pyplot as plt\n\n";
    s += "CSV_PATH = \"" + csv_path + "\"\n\n";
    s += "acc = defaultdict(lambda: defaultdict(list))  # mode -> block -> [accuracy]\n";
    s += "with open(CSV_PATH, newline=\"\") as fh:\n";
    s += "    for row in csv.DictReader(fh):\n";
    s += "        acc[row[\"mode\"]][int(row[\"block_index\"])].append(float(row[\"avg_test_accuracy\"]))\n\n";
    s += "plt.figure(figsize=(7, 4.5))\n";
    s += "for mode in sorted(acc):\n";
    s += "    blocks = sorted(acc[mode])\n";
    s += "    mean = [sum(acc[mode][b]) / len(acc[mode][b]) for b in blocks]\n";
    s += "    plt.plot(blocks, mean, label=mode)\n";
    s += "plt.xlabel(\"communication block\")\n";
    s += "plt.ylabel(\"average test accuracy\")\n";
    s += "plt.legend()\n";
    s += "plt.grid(True, alpha=0.3)\n";
    s += "plt.tight_layout()\n";
    s += "out = CSV_PATH.rsplit(\".\", 1)[0] + \".png\"\n";
    s += "plt.savefig(out, dpi=150)\n";
    s += "print(out)\n";
    return s;
}

void write_plot_script(const std::string& csv_path, const std::string& script_path) {
    std::ofstream out(script_path);
    if (!out) throw FormatError("cannot open '" + script_path + "' for writing");
    out << plot_script_text(csv_path);
    if (!out) throw FormatError("failed writing '" + script_path + "'");
}

}  // namespace d2dsgd
