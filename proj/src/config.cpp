#include "lava/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <string_view>

#include "lava/data_io.hpp"
#include "lava/error.hpp"
#include "lava/random.hpp"

namespace lava {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_real(std::string_view key, std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw ParameterError("config key '" + std::string(key) + "': expected a real number, got '" +
                             std::string(text) + "'");
    }
    return v;
}

std::uint64_t to_unsigned(std::string_view key, std::string_view text) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParameterError("config key '" + std::string(key) + "': expected a non-negative integer, got '" +
                             std::string(text) + "'");
    }
    return v;
}

void require(bool ok, const std::string& constraint) {
    if (!ok) {
        throw ParameterError("config out of range: " + constraint);
    }
}

using Setter = std::function<void(PipelineConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"n", [](auto& c, auto k, auto v) { c.n = to_unsigned(k, v); }},
        {"o", [](auto& c, auto k, auto v) { c.o = to_real(k, v); }},
        {"seed", [](auto& c, auto k, auto v) { c.rng_seed = to_unsigned(k, v); }},
        {"direct_budget", [](auto& c, auto k, auto v) { c.direct_budget = to_unsigned(k, v); }},
        {"search_half_width", [](auto& c, auto k, auto v) { c.search_half_width = to_real(k, v); }},
        {"kmeans_max_iters", [](auto& c, auto k, auto v) { c.kmeans_max_iters = to_unsigned(k, v); }},
        {"kmeans_inits", [](auto& c, auto k, auto v) { c.kmeans_inits = to_unsigned(k, v); }},
        {"filter_threshold", [](auto& c, auto k, auto v) { c.filter_threshold = to_real(k, v); }},
        {"memory_budget_mb", [](auto& c, auto k, auto v) { c.memory_budget_mb = to_real(k, v); }},
        {"num_modules", [](auto& c, auto k, auto v) { c.amf.num_modules = to_unsigned(k, v); }},
        {"nu", [](auto& c, auto k, auto v) { c.amf.nu = to_real(k, v); }},
        {"gamma", [](auto& c, auto k, auto v) { c.amf.gamma = to_real(k, v); }},
        {"batch_size", [](auto& c, auto k, auto v) { c.amf.batch_size = to_unsigned(k, v); }},
        {"improvement_tol", [](auto& c, auto k, auto v) { c.amf.improvement_tol = to_real(k, v); }},
        {"patience_epochs", [](auto& c, auto k, auto v) { c.amf.patience_epochs = to_unsigned(k, v); }},
        {"max_epochs", [](auto& c, auto k, auto v) { c.amf.max_epochs = to_unsigned(k, v); }},
        {"learning_rate", [](auto& c, auto k, auto v) { c.amf.learning_rate = to_real(k, v); }},
        {"beta1", [](auto& c, auto k, auto v) { c.amf.beta1 = to_real(k, v); }},
        {"beta2", [](auto& c, auto k, auto v) { c.amf.beta2 = to_real(k, v); }},
        {"adam_epsilon", [](auto& c, auto k, auto v) { c.amf.adam_epsilon = to_real(k, v); }},
        {"num_runs", [](auto& c, auto k, auto v) { c.selection.num_runs = to_unsigned(k, v); }},
        {"candidates",
         [](auto& c, auto k, auto v) {
             c.selection.candidates.clear();
             while (!v.empty()) {
                 const auto comma = v.find(',');
                 c.selection.candidates.push_back(to_unsigned(k, trim(v.substr(0, comma))));
                 v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
             }
         }},
        {"medoid_restarts", [](auto& c, auto k, auto v) { c.selection.medoid_restarts = to_unsigned(k, v); }},
        {"shared_run_seed",
         [](auto& c, auto k, auto v) {
             const auto flag = to_unsigned(k, v);
             require(flag <= 1, "shared_run_seed is 0 or 1");
             c.selection.shared_run_seed = flag == 1;
         }},
        {"selection_tolerance", [](auto& c, auto k, auto v) { c.selection.tolerance_fraction = to_real(k, v); }},
        {"chosen_modules", [](auto& c, auto k, auto v) { c.selection.chosen = to_unsigned(k, v); }},
        {"tau", [](auto& c, auto k, auto v) { c.tau = to_real(k, v); }},
        {"presence_floor", [](auto& c, auto k, auto v) { c.presence_floor = to_real(k, v); }},
        {"metadata_threshold", [](auto& c, auto k, auto v) { c.metadata_threshold = to_real(k, v); }},
        {"ranking_cutoff", [](auto& c, auto k, auto v) { c.ranking_cutoff = to_real(k, v); }},
        {"render_exponent", [](auto& c, auto k, auto v) { c.render_exponent = to_real(k, v); }},
        {"render_line_threshold", [](auto& c, auto k, auto v) { c.render_line_threshold = to_real(k, v); }},
    };
    return table;
}

}  // namespace

void AmfConfig::validate() const {
    require(num_modules >= 1, "num_modules >= 1");
    require(nu >= 1.0, "nu >= 1");
    require(gamma >= 0.0, "gamma >= 0");
    require(batch_size >= 1, "batch_size >= 1");
    require(improvement_tol > 0.0, "improvement_tol > 0");
    require(patience_epochs >= 1, "patience_epochs >= 1");
    require(max_epochs >= 1, "max_epochs >= 1");
    require(learning_rate > 0.0, "learning_rate > 0");
    require(beta1 >= 0.0 && beta1 < 1.0, "0 <= beta1 < 1");
    require(beta2 >= 0.0 && beta2 < 1.0, "0 <= beta2 < 1");
    require(adam_epsilon > 0.0, "adam_epsilon > 0");
}

void SelectionConfig::validate() const {
    require(num_runs >= 2, "num_runs >= 2");
    require(medoid_restarts >= 1, "medoid_restarts >= 1");
    require(tolerance_fraction > 0.0, "selection_tolerance > 0");
    for (const auto m : candidates) {
        require(m >= 1, "candidates >= 1");
    }
    if (chosen) {
        require(*chosen >= 1, "chosen_modules >= 1");
    }
}

void PipelineConfig::validate() const {
    if (n) {
        require(*n >= 1, "n >= 1");
    }
    if (o) {
        require(*o > 0.0, "o > 0");
    }
    require(direct_budget >= 1, "direct_budget >= 1");
    if (search_half_width) {
        require(*search_half_width > 0.0, "search_half_width > 0");
    }
    require(kmeans_max_iters >= 1, "kmeans_max_iters >= 1");
    require(kmeans_inits >= 1, "kmeans_inits >= 1");
    require(filter_threshold > 0.0 && filter_threshold <= 1.0, "0 < filter_threshold <= 1");
    require(memory_budget_mb > 0.0, "memory_budget_mb > 0");
    amf.validate();
    selection.validate();
    require(tau > 0.0 && tau < 1.0, "0 < tau < 1");
    require(presence_floor >= 0.0, "presence_floor >= 0");
    require(metadata_threshold >= 0.0, "metadata_threshold >= 0");
    require(ranking_cutoff > 0.0 && ranking_cutoff <= 1.0, "0 < ranking_cutoff <= 1");
    require(render_exponent > 0.0, "render_exponent > 0");
    require(render_line_threshold >= 0.0 && render_line_threshold < 1.0, "0 <= render_line_threshold < 1");
}

std::size_t PipelineConfig::neighborhood_size() const {
    if (!n) {
        throw ParameterError("config key 'n' (neighborhood size) is required");
    }
    return *n;
}

double PipelineConfig::overlap_factor() const {
    if (!o) {
        throw ParameterError("config key 'o' (overlap factor) is required");
    }
    return *o;
}

std::uint64_t stage_seed(const PipelineConfig& config, SeedStream stream) noexcept {
    return derive_seed(config.rng_seed, static_cast<std::uint64_t>(stream));
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig config;
    std::string_view rest(text);
    std::size_t line_no = 0;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParameterError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ParameterError("unknown config key '" + std::string(key) + "'");
        }
        it->second(config, key, value);
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

}  // namespace lava
