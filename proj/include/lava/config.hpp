#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lava {

// Module extraction settings. Defaults follow the reference experiments:
// overestimation weight 9, scale regularization 1e-4, minibatches of 64,
// stop after 100 epochs without a 1% improvement, Adam with its usual defaults.
struct AmfConfig {
    std::size_t num_modules = 9;
    double nu = 9.0;
    double gamma = 1e-4;
    std::size_t batch_size = 64;
    double improvement_tol = 0.01;
    std::size_t patience_epochs = 100;
    // Hard cap so a run always terminates even if the loss keeps creeping down.
    std::size_t max_epochs = 20000;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SelectionConfig {
    std::size_t num_runs = 10;
    std::vector<std::size_t> candidates;  // empty = {AmfConfig::num_modules}
    std::size_t medoid_restarts = 5;
    // Smallest candidate whose mean cosine term is within this fraction of
    // the best candidate wins unless `chosen` is set.
    double tolerance_fraction = 0.05;
    std::optional<std::size_t> chosen;
    // Every run reuses the same AMF seed; useful for checking run-to-run determinism.
    bool shared_run_seed = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PipelineConfig {
    std::optional<std::size_t> n;  // neighborhood size
    std::optional<double> o;       // overlap factor
    std::uint64_t rng_seed = 0;

    std::size_t direct_budget = 40;
    std::optional<double> search_half_width;  // default 2 * latent dimension
    std::size_t kmeans_max_iters = 300;
    std::size_t kmeans_inits = 3;

    double filter_threshold = 0.75;
    double memory_budget_mb = 1024.0;

    AmfConfig amf;
    SelectionConfig selection;
    double tau = 0.1;

    double presence_floor = 0.5;
    double metadata_threshold = 0.01;
    double ranking_cutoff = 0.05;

    double render_exponent = 3.0;
    double render_line_threshold = 0.1;

    void validate() const;

    // Accessors that fail with a ParameterError naming the missing key.
    std::size_t neighborhood_size() const;
    double overlap_factor() const;
};

// Stage seeds, all derived from PipelineConfig::rng_seed.
enum class SeedStream : std::uint64_t { placement = 1, amf = 2, selection = 3, jaccard = 4, finetune = 5 };

std::uint64_t stage_seed(const PipelineConfig& config, SeedStream stream) noexcept;

// Flat `key=value` grammar; `#` starts a comment; blank lines ignored.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace lava
