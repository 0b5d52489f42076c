#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "d2dsgd/channel.hpp"
#include "d2dsgd/learner.hpp"

namespace d2dsgd {

enum class Mode { ideal, digital, analog, tdma_digital, tdma_analog, none };

Mode parse_mode(const std::string& name);
const char* mode_name(Mode mode);

struct ExperimentConfig {
    Mode mode = Mode::ideal;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out = "metrics.csv";
    bool emit_plot_script = false;

    // topology
    int devices = 8;
    double edge_prob = 0.1;
    double d_min = 20.0;
    double d_max = 200.0;

    ChannelParams channel;

    LearningConfig learn;
    int blocks = 100;
    double init_scale = 0.0;  // 0: all devices start at zero

    // digital path
    QuantConfig quant;
    bool digital_lossless = false;

    // analog path
    int sparsity_k = 0;  // 0: floor(d * (1 - 0.4^(1/K)))
    double lasso_lambda_scale = 1.0;
    int lasso_iters = 200;
    double deep_fade_threshold = 1e-2;
    bool noise_off = false;

    // data
    std::string dataset = "synth";  // "synth" or "idx"
    std::uint64_t data_seed = 9000;
    int synth_classes = 10;
    int synth_dim = 20;
    int synth_train_per_class = 400;
    int synth_test_per_class = 200;
    double synth_spread = 1.0;
    std::string idx_train_images, idx_train_labels, idx_test_images, idx_test_labels;
    int samples_per_device = 2000;

    void validate() const;
};

// Flat "key = value" lines, '#' starts a comment. Unknown keys are rejected.
void set_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct MetricsRow {
    std::uint64_t episode_seed = 0;
    long block_index = 0;
    long iteration = 0;
    std::string mode;
    double avg_test_accuracy = 0.0;
    Vec per_device;  // not serialized
};

struct RunResult {
    std::vector<MetricsRow> rows;
    RunStats stats;
};

// One full experiment: per episode seed, build the topology and schedule,
// then interleave local SGD with the mode's block communication every tau
// iterations, evaluating average test accuracy after each block.
RunResult run_experiment(const ExperimentConfig& cfg);

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
void write_metrics(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);

// Companion matplotlib script: accuracy-vs-block line per mode.
std::string plot_script_text(const std::string& csv_path);
void write_plot_script(const std::string& csv_path, const std::string& script_path);

}  // namespace d2dsgd
