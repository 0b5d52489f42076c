#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "d2dsgd/errors.hpp"
#include "d2dsgd/harness.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Decentralized SGD over simulated D2D wireless links"};
    app.set_help_flag("-h,--help", "print this help and exit");

    std::string config_path, mode, seeds, out;
    long blocks = -1;
    bool emit_plot = false;
    app.add_option("--config", config_path, "configuration file (key = value lines)");
    app.add_option("--mode", mode, "ideal|digital|analog|tdma_digital|tdma_analog|none");
    app.add_option("--seed", seeds, "comma-separated episode seeds");
    app.add_option("--blocks", blocks, "number of communication blocks");
    app.add_option("--out", out, "metrics CSV path");
    app.add_flag("--emit-plot-script", emit_plot, "also write a matplotlib script next to the CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    d2dsgd::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = d2dsgd::load_config_file(config_path);
    if (!mode.empty()) cfg.mode = d2dsgd::parse_mode(mode);
    if (!seeds.empty()) d2dsgd::set_config_key(cfg, "seeds", seeds);
    if (blocks >= 0) d2dsgd::set_config_key(cfg, "blocks", std::to_string(blocks));
    if (!out.empty()) cfg.out = out;
    if (emit_plot) cfg.emit_plot_script = true;

    const d2dsgd::RunResult result = d2dsgd::run_experiment(cfg);
    d2dsgd::write_metrics(result.rows, cfg.out);

    std::string script_path;
    if (cfg.emit_plot_script) {
        script_path = cfg.out;
        const auto dot = script_path.rfind('.');
        script_path = (dot == std::string::npos ? script_path : script_path.substr(0, dot)) +
                      "_plot.py";
        d2dsgd::write_plot_script(cfg.out, script_path);
    }

    // Final-block accuracy per episode, then the across-episode mean.
    std::map<unsigned long long, double> final_acc;
    long last_block = 0;
    for (const auto& r : result.rows) last_block = std::max(last_block, r.block_index);
    for (const auto& r : result.rows)
        if (r.block_index == last_block) final_acc[r.episode_seed] = r.avg_test_accuracy;
    double mean = 0.0;
    for (const auto& [seed, acc] : final_acc) {
        std::printf("seed %llu: final avg accuracy %.4f\n", seed, acc);
        mean += acc;
    }
    if (!final_acc.empty())
        std::printf("mode %s: mean final accuracy %.4f over %zu episode(s), %ld block(s)\n",
                    d2dsgd::mode_name(cfg.mode), mean / final_acc.size(), final_acc.size(),
                    last_block);
    std::printf("wrote %s\n", cfg.out.c_str());
    if (!script_path.empty()) std::printf("wrote %s\n", script_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const d2dsgd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
