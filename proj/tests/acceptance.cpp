// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "lava/amf.hpp"
#include "lava/analysis.hpp"
#include "lava/cli.hpp"
#include "lava/correlation.hpp"
#include "lava/data_io.hpp"
#include "lava/direct.hpp"
#include "lava/placement.hpp"
#include "lava/random.hpp"
#include "lava/render.hpp"
#include "lava/selection.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"
#include "support/temp_dir.hpp"

using namespace lava;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Timer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// Planted data shared by criteria 4, 5 and 10.
const testing::PlantedData& planted() {
    static const auto data = testing::planted_data(200, 300, 4, 0.02, 7);
    return data;
}

AmfConfig planted_amf(double nu = 9.0) {
    AmfConfig amf;
    amf.nu = nu;
    amf.seed = 11;
    return amf;
}

SelectionConfig planted_selection(std::vector<std::size_t> candidates) {
    SelectionConfig selection;
    selection.num_runs = 5;
    selection.candidates = std::move(candidates);
    selection.seed = 3;
    return selection;
}

const AmfRunResult& chosen_run(const SelectionOutcome& outcome) {
    return outcome.runs[outcome.report.chosen_candidate][outcome.report.chosen_run];
}

Outcome spearman_oracle() {
    Timer timer;
    Rng rng(1);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const std::size_t n = 5 + rng.below(196);
        const std::size_t levels = 2 + rng.below(n);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(rng.below(levels));
            y[i] = rng.uniform() < 0.5 ? x[i] + static_cast<double>(rng.below(3)) : static_cast<double>(rng.below(levels));
        }
        worst = std::max(worst, std::abs(spearman_abs(x, y) - testing::rank_then_pearson(x, y)));
    }
    const double s = timer.seconds();
    return {worst <= 1e-9 && s < 5.0, fmt("1000 tied pairs, max |diff| %.2e, %.2f s", worst, s)};
}

Outcome reconstruction_oracle() {
    Rng rng(2);
    int mismatches = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t rows = 1 + rng.below(20);
        const std::size_t pairs = 1 + rng.below(50);
        const std::size_t modules = 1 + rng.below(6);
        const auto model = random_model(rows, pairs, modules, rng.below(1u << 30));
        mismatches += reconstruct(model) == testing::triple_loop(model) ? 0 : 1;
    }
    return {mismatches == 0, fmt("100 random models, %d mismatches", mismatches)};
}

Outcome gradient_check() {
    Timer timer;
    Rng rng(3);
    int checked = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; checked < 100; ++seed) {
        const std::size_t rows = 2 + rng.below(4);
        const std::size_t pairs = 3 + rng.below(6);
        const std::size_t modules = 1 + rng.below(3);
        const auto model = random_model(rows, pairs, modules, seed);
        FloatMatrix c(rows, pairs);
        for (auto& v : c.values()) {
            v = static_cast<float>(rng.uniform());
        }
        if (!testing::non_degenerate(c, model)) {
            continue;
        }
        ++checked;
        AmfConfig config;
        config.gamma = checked % 2 == 0 ? 1e-4 : 0.5;
        worst = std::max(worst, testing::gradient_relative_error(c, model, config));
    }
    const double s = timer.seconds();
    return {worst <= 1e-4 && s < 30.0, fmt("100 interior points, max relative error %.2e, %.2f s", worst, s)};
}

Outcome planted_recovery() {
    Timer timer;
    const auto outcome = select_modules(planted().correlations, planted_selection({4}), planted_amf());
    const auto matched = testing::greedy_match(planted().truth.modules, chosen_run(outcome).model.modules);
    const double s = timer.seconds();
    const double worst = *std::min_element(matched.begin(), matched.end());
    return {worst >= 0.95 && s < 300.0,
            fmt("matched cosines %.3f %.3f %.3f %.3f, %.1f s", matched[0], matched[1], matched[2], matched[3], s)};
}

Outcome overestimation_behavior() {
    std::vector<double> ratios;
    for (const double nu : {1.0, 3.0, 9.0}) {
        const auto outcome = select_modules(planted().correlations, planted_selection({4}), planted_amf(nu));
        ratios.push_back(chosen_run(outcome).overestimation_ratio);
    }
    const bool in_band = ratios[2] >= 0.05 && ratios[2] <= 0.25;
    const bool monotone = ratios[0] > ratios[1] && ratios[1] > ratios[2];
    return {in_band && monotone,
            fmt("ratio at nu=1: %.3f, nu=3: %.3f, nu=9: %.3f", ratios[0], ratios[1], ratios[2])};
}

double pinball_grid_minimizer(const std::vector<float>& values, double tau) {
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double p = k / 100000.0;
        double loss = 0.0;
        for (const float v : values) {
            const double u = v - p;
            loss += u >= 0.0 ? tau * u : (tau - 1.0) * u;
        }
        if (loss < best) {
            best = loss;
            arg = p;
        }
    }
    return arg;
}

Outcome fine_tuning_quantiles() {
    // One locality, one all-ones module: the presence is a single location parameter.
    Rng rng(6);
    std::vector<float> values(101);
    for (auto& v : values) {
        v = static_cast<float>(rng.uniform(0.1, 0.9));
    }
    FloatMatrix c(1, values.size());
    std::copy(values.begin(), values.end(), c.values().begin());
    const AmfModel start{RealMatrix(1, values.size(), 1.0), RealMatrix(1, 1, 0.95)};
    AmfConfig config;
    config.num_modules = 1;
    bool pass = true;
    std::string detail;
    for (const double tau : {0.1, 0.5}) {
        const double oracle = pinball_grid_minimizer(values, tau);
        const double fitted = fine_tune_presences(c, start, tau, config).presences(0, 0);
        pass = pass && std::abs(fitted - oracle) <= 0.02;
        detail += fmt("tau=%.1f fitted %.4f vs grid %.4f; ", tau, fitted, oracle);
    }
    return {pass, detail.substr(0, detail.size() - 2)};
}

Outcome placement() {
    Rng rng(7);
    int count_errors = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.below(200);
        const std::size_t e = n + 1 + rng.below(5000);
        const double o = rng.uniform(1.0, 10.0);
        const auto expected = static_cast<std::size_t>(std::floor(static_cast<double>(e) * o / n + 0.5));
        count_errors += locality_count(e, o, n) == expected ? 0 : 1;
    }

    const std::vector<double> lo{-4.0, -4.0};
    const std::vector<double> hi{4.0, 4.0};
    const auto direct = direct_minimize(
        [](std::span<const double> x) { return (x[0] - 1.0) * (x[0] - 1.0) + (x[1] + 2.0) * (x[1] + 2.0); }, lo, hi,
        DirectOptions{200});
    const double miss = std::hypot(direct.best_x[0] - 1.0, direct.best_x[1] + 2.0);

    RealMatrix grid(2000, 2);
    for (std::size_t i = 0; i < 2000; ++i) {
        grid(i, 0) = static_cast<double>(i % 50);
        grid(i, 1) = static_cast<double>(i / 50);
    }
    const auto profile = centrality_profile(knn_self(grid, 100));
    PlacementOptions options;
    options.neighborhood_size = 100;
    options.locality_count = locality_count(2000, 4.0, 100);
    options.seed = 11;
    const auto [localities, report] = optimize_placement(grid, profile, options);
    const double origin = evaluate_placement(grid, profile, 0.0, 0.0, options).second;
    const double optimized = placement_loss(profile, localities, 2000);

    return {count_errors == 0 && miss <= 0.05 && optimized <= origin,
            fmt("%d locality-count errors; DIRECT miss %.4f in %zu evals; grid loss %.3f vs %.3f at (0,0)",
                count_errors, miss, direct.evaluations.size(), optimized, origin)};
}

Outcome entropy() {
    AmfModel uniform{RealMatrix(9, 1), RealMatrix(1, 9, 0.7)};
    const double u = *presence_entropy(uniform).entropy_bits[0];
    AmfModel one_hot{RealMatrix(9, 1), RealMatrix(1, 9)};
    one_hot.presences(0, 2) = 0.9;
    const double h = *presence_entropy(one_hot).entropy_bits[0];
    Rng rng(8);
    AmfModel random{RealMatrix(9, 1), RealMatrix(1000, 9)};
    for (auto& v : random.presences.values()) {
        v = rng.uniform() < 0.4 ? 0.0 : rng.uniform();
    }
    const auto stats = presence_entropy(random, 0.0);
    int violations = 0;
    for (const auto& e : stats.entropy_bits) {
        violations += e && (*e < 0.0 || *e > std::log2(9.0) + 1e-12) ? 1 : 0;
    }
    return {std::abs(u - 3.17) <= 0.005 && h == 0.0 && violations == 0,
            fmt("uniform %.4f bits, one-hot %.1f bits, %d bound violations over 1000 rows", u, h, violations)};
}

Outcome statistics() {
    LocalitySet set;
    set.probes = RealMatrix(11, 1);
    set.members = IndexMatrix(11, 10);
    SampleLabels labels{"status", {}};
    AmfModel model{RealMatrix(1, 1), RealMatrix(11, 1)};
    for (std::size_t l = 0; l < 11; ++l) {
        for (std::size_t k = 0; k < 10; ++k) {
            set.members(l, k) = labels.labels.size();
            labels.labels.push_back(k < l ? "case" : "control");
        }
        model.presences(l, 0) = static_cast<double>(l) / 10.0;
    }
    const auto assoc = metadata_association(model, labels, set, "case");
    const double p_perfect = assoc.modules[0].pearson_p;
    const double p_zero = correlation_p_value(0.0, 25);
    Rng rng(9);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const int dof = 1 + static_cast<int>(rng.below(60));
        const double t = rng.uniform(-10.0, 10.0);
        worst = std::max(worst, std::abs(student_t_cdf(t, dof) - static_cast<double>(testing::t_cdf_series(t, dof))));
    }
    return {p_perfect < 1e-10 && p_zero == 1.0 && worst <= 1e-8,
            fmt("p(r=1) %.1e, p(r=0) %.6f, t-CDF max error %.2e", p_perfect, p_zero, worst)};
}

Outcome stability_trend() {
    Timer timer;
    const auto outcome = select_modules(planted().correlations, planted_selection({2, 4, 6, 8}), planted_amf());
    const auto& c = outcome.report.candidates;
    int inversions = 0;
    for (std::size_t k = 1; k < c.size(); ++k) {
        inversions += c[k].cosine_mean < c[k - 1].cosine_mean ? 1 : 0;
    }
    const double sil4 = c[1].silhouette.value_or(-1.0);
    const double sil8 = c[3].silhouette.value_or(-1.0);
    return {inversions <= 1 && sil4 > sil8,
            fmt("cosine %.4f %.4f %.4f %.4f (%d inversions), silhouette M=4 %.3f vs M=8 %.3f, %.1f s",
                c[0].cosine_mean, c[1].cosine_mean, c[2].cosine_mean, c[3].cosine_mean, inversions, sil4, sil8,
                timer.seconds())};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file()) {
            files[fs::relative(entry.path(), root).generic_string()] = read_text_file(entry.path());
        }
    }
    return files;
}

Outcome determinism() {
    testing::TempDir dir;
    Rng rng(10);
    std::string emb, feat, labels = "side\n";
    for (std::size_t j = 0; j < 20; ++j) {
        feat += (j ? ",g" : "g") + std::to_string(j);
    }
    feat += '\n';
    for (std::size_t i = 0; i < 500; ++i) {
        const double x = rng.normal();
        const double y = rng.normal();
        emb += fmt("%.17g,%.17g\n", x, y);
        std::vector<double> f(20);
        for (auto& v : f) {
            v = rng.normal();
        }
        if (x > 0.0) {
            f[1] = 2.0 * f[0] + 0.2 * f[1];
        }
        if (y > 0.0) {
            f[5] = -f[4] + 0.3 * f[5];
        }
        for (std::size_t j = 0; j < 20; ++j) {
            feat += fmt(j ? ",%.17g" : "%.17g", f[j]);
        }
        feat += '\n';
        labels += x > 0.0 ? "right\n" : "left\n";
    }
    write_text_file(dir / "emb.csv", emb);
    write_text_file(dir / "feat.csv", feat);
    write_text_file(dir / "labels.txt", labels);
    write_text_file(dir / "run.cfg", "n=50\no=4\nseed=2024\ncandidates=2,3,4\nnum_runs=4\n");

    double slowest = 0.0;
    for (const char* out : {"a", "b"}) {
        Timer timer;
        std::ostringstream sink_out, sink_err;
        const int code = cli_main({"pipeline", "--config", (dir / "run.cfg").string(), "--embeddings",
                                   (dir / "emb.csv").string(), "--features", (dir / "feat.csv").string(), "--labels",
                                   (dir / "labels.txt").string(), "--target-label", "right", "--grid", "4x5", "--out",
                                   (dir / out).string()},
                                  sink_out, sink_err);
        if (code != 0) {
            return {false, "pipeline exited " + std::to_string(code) + ": " + sink_err.str()};
        }
        slowest = std::max(slowest, timer.seconds());
    }
    const auto a = snapshot(dir / "a");
    const auto b = snapshot(dir / "b");
    return {a == b && slowest < 120.0, fmt("%zu files, identical: %s, slowest run %.1f s", a.size(),
                                           a == b ? "yes" : "no", slowest)};
}

Outcome rendering() {
    const PairIndex pairs(4);
    const GridLayout layout{2, 2};
    std::vector<double> zero(6, 0.0), single(6, 0.0), faint(6, 0.0);
    single[pairs.id(0, 3)] = 1.0;
    faint[pairs.id(0, 3)] = 0.4;
    const fs::path golden(LAVA_GOLDEN_DIR);
    int matches = 0;
    matches += grid_heatmap_svg(zero, layout, RenderSpec{}) == read_text_file(golden / "heatmap_zero.svg");
    matches += grid_heatmap_svg(single, layout, RenderSpec{}) == read_text_file(golden / "heatmap_single_pair.svg");
    matches += grid_heatmap_svg(faint, layout, RenderSpec{}) == read_text_file(golden / "heatmap_below_threshold.svg");
    return {matches == 3, fmt("%d of 3 heatmaps byte-identical to golden files", matches)};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"spearman oracle", spearman_oracle},
        {"max reconstruction oracle", reconstruction_oracle},
        {"gradient correctness", gradient_check},
        {"planted module recovery", planted_recovery},
        {"overestimation behavior", overestimation_behavior},
        {"fine-tuning quantiles", fine_tuning_quantiles},
        {"locality count and placement", placement},
        {"presence entropy", entropy},
        {"statistics", statistics},
        {"stability trend", stability_trend},
        {"end-to-end determinism", determinism},
        {"heatmap golden files", rendering},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome result;
        try {
            result = criteria[i].second();
        } catch (const std::exception& e) {
            result = {false, std::string("exception: ") + e.what()};
        }
        failures += result.pass ? 0 : 1;
        std::printf("[%s] %2zu %s: %s\n", result.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    result.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failures);
    return failures == 0 ? 0 : 1;
}
