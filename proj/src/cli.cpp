#include "lava/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lava/analysis.hpp"
#include "lava/data_io.hpp"
#include "lava/error.hpp"
#include "lava/render.hpp"
#include "lava/reports.hpp"

namespace lava {

namespace {

namespace fs = std::filesystem;

class Log {
  public:
    explicit Log(std::ostream& err) : err_(err) {}

    void stage(const std::string& name, const std::string& status, const std::string& detail = {}) {
        err_ << "lava: stage=" << name << " status=" << status;
        if (!detail.empty()) {
            err_ << ' ' << detail;
        }
        err_ << '\n';
    }

    void warn(const std::string& message) { err_ << "lava: warning " << message << '\n'; }

  private:
    std::ostream& err_;
};

PipelineConfig load_stage_config(const std::string& path, const std::optional<std::uint64_t>& seed) {
    PipelineConfig config = path.empty() ? PipelineConfig{} : load_config(path);
    if (seed) {
        config.rng_seed = *seed;
    }
    return config;
}

double max_abs_presence(const AmfModel& model, std::size_t m) {
    double total = 0.0;
    for (std::size_t i = 0; i < model.presences.rows(); ++i) {
        total += model.presences(i, m);
    }
    return total;
}

void run_place(const PipelineConfig& config, const fs::path& embeddings_path, const fs::path& out, Log& log) {
    const auto embeddings = load_embeddings(embeddings_path);
    const std::size_t samples = embeddings.rows();
    const std::size_t n = config.neighborhood_size();
    if (n >= samples) {
        throw ParameterError("neighborhood size n=" + std::to_string(n) + " violates the precondition n < E (E=" +
                             std::to_string(samples) + ")");
    }
    const std::size_t ell = locality_count(samples, config.overlap_factor(), n);
    log.stage("place", "start", "E=" + std::to_string(samples) + " n=" + std::to_string(n) + " ell=" + std::to_string(ell));

    const auto profile = centrality_profile(knn_self(embeddings, n));
    PlacementOptions options;
    options.neighborhood_size = n;
    options.locality_count = ell;
    options.budget = config.direct_budget;
    options.half_width = config.search_half_width.value_or(2.0 * static_cast<double>(embeddings.cols()));
    options.kmeans = KMeansOptions{config.kmeans_max_iters, config.kmeans_inits};
    options.seed = stage_seed(config, SeedStream::placement);
    const auto [localities, report] = optimize_placement(embeddings, profile, options);

    save_localities(out, localities);
    write_json(out / "placement.json", to_json(report, samples, n, ell));
    std::ostringstream detail;
    detail << "best_loss=" << report.best_loss << " evaluations=" << report.evaluations.size();
    log.stage("place", "done", detail.str());
}

void run_correlate(const PipelineConfig& config, const fs::path& features_path, const fs::path& localities_dir,
                   const fs::path& out, Log& log) {
    const auto localities = load_localities(localities_dir);
    const auto features = load_features(features_path);
    const double bytes = static_cast<double>(correlation_bytes(localities.size(), features.features()));
    if (bytes > config.memory_budget_mb * 1024.0 * 1024.0) {
        log.warn("correlation matrix needs " + std::to_string(static_cast<long long>(bytes / (1024.0 * 1024.0))) +
                 " MB, above memory_budget_mb");
    }
    log.stage("correlate", "start",
              "ell=" + std::to_string(localities.size()) + " D=" + std::to_string(features.features()));
    const auto dataset = locality_correlations(features, localities, config.filter_threshold);
    save_correlations(out, dataset, localities.neighborhood_size());
    log.stage("correlate", "done", "pairs=" + std::to_string(dataset.pairs.size()));
}

AmfConfig amf_for_stage(const PipelineConfig& config) {
    AmfConfig amf = config.amf;
    amf.seed = stage_seed(config, SeedStream::amf);
    return amf;
}

void run_extract(const PipelineConfig& config, const fs::path& correlations_path, std::optional<std::size_t> modules,
                 const fs::path& out, Log& log) {
    const auto dataset = load_correlations(correlations_path);
    AmfConfig amf = amf_for_stage(config);
    if (modules) {
        amf.num_modules = *modules;
    }
    log.stage("extract", "start", "modules=" + std::to_string(amf.num_modules));
    const auto run = fit(dataset.values, amf);
    save_model(out, run.model, to_json(run, amf));
    std::ostringstream detail;
    detail << "final_loss=" << run.final_loss << " epochs=" << run.epochs_run;
    log.stage("extract", "done", detail.str());
}

void run_select(const PipelineConfig& config, const fs::path& correlations_path, const fs::path& out, Log& log) {
    const auto dataset = load_correlations(correlations_path);
    const AmfConfig amf = amf_for_stage(config);
    SelectionConfig selection = config.selection;
    selection.seed = stage_seed(config, SeedStream::selection);
    log.stage("select", "start", "runs=" + std::to_string(selection.num_runs));
    const auto outcome = select_modules(dataset.values, selection, amf);

    std::vector<std::size_t> counts = selection.candidates;
    if (counts.empty()) {
        counts.push_back(amf.num_modules);
    }
    for (std::size_t c = 0; c < outcome.runs.size(); ++c) {
        for (std::size_t r = 0; r < outcome.runs[c].size(); ++r) {
            AmfConfig cfg = amf;
            cfg.num_modules = counts[c];
            cfg.seed = run_seed(amf.seed, counts[c], selection.shared_run_seed ? 0 : r);
            save_model(out / "runs" / ("m" + std::to_string(counts[c])) / ("run" + std::to_string(r)),
                       outcome.runs[c][r].model, to_json(outcome.runs[c][r], cfg));
        }
    }
    const auto& report = outcome.report;
    const auto& chosen = outcome.runs[report.chosen_candidate][report.chosen_run];
    AmfConfig chosen_cfg = amf;
    chosen_cfg.num_modules = report.chosen_module_count;
    chosen_cfg.seed =
        run_seed(amf.seed, report.chosen_module_count, selection.shared_run_seed ? 0 : report.chosen_run);
    save_model(out / "model", chosen.model, to_json(chosen, chosen_cfg));
    write_json(out / "selection.json", to_json(report));
    log.stage("select", "done",
              "chosen_modules=" + std::to_string(report.chosen_module_count) +
                  " chosen_run=" + std::to_string(report.chosen_run));
}

void run_finetune(const PipelineConfig& config, const fs::path& correlations_path, const fs::path& model_dir,
                  std::optional<double> tau, const fs::path& out, Log& log) {
    const auto dataset = load_correlations(correlations_path);
    const auto model = load_model(model_dir);
    AmfConfig amf = config.amf;
    amf.seed = stage_seed(config, SeedStream::finetune);
    amf.num_modules = model.module_count();
    const double t = tau.value_or(config.tau);
    log.stage("finetune", "start", "tau=" + std::to_string(t));
    const auto tuned = fine_tune_presences(dataset.values, model, t, amf);
    Json meta;
    meta["schema_version"] = kSchemaVersion;
    meta["tau"] = t;
    meta["pinball_loss"] = pinball_loss(dataset.values, tuned, t);
    meta["overestimation_ratio"] = overestimation_ratio(dataset.values, reconstruct(tuned));
    meta["config"] = to_json(amf);
    save_model(out, tuned, meta);
    log.stage("finetune", "done");
}

struct AnalyzeInputs {
    fs::path correlations;
    fs::path model;
    fs::path localities;
    fs::path labels;
    fs::path features;
    std::string target_label;
    std::optional<std::size_t> reference;
};

void run_analyze(const PipelineConfig& config, const AnalyzeInputs& in, const fs::path& out, Log& log) {
    const auto dataset = load_correlations(in.correlations);
    const auto model = load_model(in.model);
    if (model.presences.rows() != dataset.values.rows() || model.modules.cols() != dataset.values.cols()) {
        throw DataError("model does not match the correlation matrix");
    }
    std::vector<std::string> names;
    if (!in.features.empty()) {
        names = load_features(in.features).names;
    } else {
        for (std::size_t f = 0; f < dataset.pairs.features(); ++f) {
            names.push_back("f" + std::to_string(f));
        }
    }
    if (names.size() != dataset.pairs.features()) {
        throw DataError("feature count does not match the correlation matrix");
    }
    log.stage("analyze", "start");
    fs::create_directories(out);

    Json report;
    report["schema_version"] = kSchemaVersion;
    report["localities"] = dataset.values.rows();
    report["modules"] = model.module_count();
    report["presence_entropy"] = to_json(presence_entropy(model, config.presence_floor));

    std::string csv = "module,rank,feature,correlation_sum,retained\n";
    Json modules = Json::array();
    for (std::size_t m = 0; m < model.module_count(); ++m) {
        Json mj;
        mj["module"] = m;
        const double total = max_abs_presence(model, m);
        mj["total_presence"] = total;
        const auto ranking = module_feature_ranking(model, dataset.pairs, m, config.ranking_cutoff);
        mj["all_zero"] = ranking.all_zero;
        Json top = Json::array();
        for (const auto f : ranking.retained) {
            const auto it = std::find_if(ranking.ordered.begin(), ranking.ordered.end(),
                                         [&](const auto& e) { return e.first == f; });
            top.push_back(Json{{"feature", names[f]}, {"correlation_sum", it->second}});
        }
        mj["retained_features"] = std::move(top);
        for (std::size_t r = 0; r < ranking.ordered.size(); ++r) {
            const auto [f, s] = ranking.ordered[r];
            const bool kept = std::find(ranking.retained.begin(), ranking.retained.end(), f) != ranking.retained.end();
            std::ostringstream line;
            line << m << ',' << r + 1 << ',' << names[f] << ',' << Json(s).dump() << ',' << (kept ? 1 : 0) << '\n';
            csv += line.str();
        }
        if (total > 0.0) {
            const auto avg = presence_weighted_average(dataset.values, model, m);
            mj["cosine_to_weighted_average"] = 1.0 - cosine_distance(model.modules.row(m), avg);
        } else {
            mj["cosine_to_weighted_average"] = nullptr;
        }
        modules.push_back(std::move(mj));
    }
    report["module_summaries"] = std::move(modules);

    if (in.reference) {
        report["reference_similarity"] = Json{{"reference", *in.reference},
                                              {"similarity", locality_similarity(dataset.values, *in.reference)}};
    }
    if (!in.labels.empty()) {
        if (in.localities.empty() || in.target_label.empty()) {
            throw ParameterError("--labels needs --localities and --target-label");
        }
        const auto localities = load_localities(in.localities);
        const auto labels = load_labels(in.labels);
        report["metadata"] =
            to_json(metadata_association(model, labels, localities, in.target_label, config.metadata_threshold));
    }
    write_json(out / "analysis.json", report);
    write_text_file(out / "rankings.csv", csv);
    log.stage("analyze", "done");
}

struct RenderInputs {
    fs::path model;
    std::optional<std::size_t> module;
    std::string grid;
    fs::path features;
    fs::path embeddings;
    fs::path localities;
    fs::path correlations;
};

void run_render(const PipelineConfig& config, const RenderInputs& in, const fs::path& out, Log& log) {
    const auto model = load_model(in.model);
    const auto pairs = PairIndex::from_pair_count(model.modules.cols());
    std::optional<GridLayout> layout;
    if (!in.grid.empty()) {
        layout = GridLayout::parse(in.grid);
        layout->validate(pairs.features());
    }
    if (in.module && *in.module >= model.module_count()) {
        throw ParameterError("module " + std::to_string(*in.module) + " out of range (model has " +
                             std::to_string(model.module_count()) + ")");
    }
    std::vector<std::string> names;
    if (!in.features.empty()) {
        names = load_features(in.features).names;
    } else {
        for (std::size_t f = 0; f < pairs.features(); ++f) {
            names.push_back("f" + std::to_string(f));
        }
    }
    std::optional<CorrelationDataset> dataset;
    if (!in.correlations.empty()) {
        dataset = load_correlations(in.correlations);
    }
    std::optional<RealMatrix> embeddings;
    std::optional<LocalitySet> localities;
    if (!in.embeddings.empty() && !in.localities.empty()) {
        embeddings = load_embeddings(in.embeddings);
        localities = load_localities(in.localities);
    }
    const RenderSpec spec{config.render_exponent, config.render_line_threshold};
    fs::create_directories(out);
    log.stage("render", "start");

    std::vector<std::size_t> which;
    if (in.module) {
        which.push_back(*in.module);
    } else {
        for (std::size_t m = 0; m < model.module_count(); ++m) {
            which.push_back(m);
        }
    }
    for (const auto m : which) {
        const auto stem = "module_" + std::to_string(m);
        const auto row = model.modules.row(m);
        const auto draw = [&](std::span<const double> values, const std::string& name) {
            if (layout) {
                render_grid_heatmap(values, *layout, spec, out / (name + "_heatmap.svg"));
            } else {
                write_text_file(out / (name + "_pairs.svg"), pair_bar_chart_svg(values, names, 25));
            }
        };
        draw(row, stem);
        if (dataset && max_abs_presence(model, m) > 0.0) {
            draw(presence_weighted_average(dataset->values, model, m), stem + "_average");
        }
        if (embeddings) {
            std::vector<double> presence(model.presences.rows());
            for (std::size_t i = 0; i < presence.size(); ++i) {
                presence[i] = model.presences(i, m);
            }
            render_presence_scatter(*embeddings, localities->probes, presence, out / (stem + "_presence.svg"));
        }
    }
    log.stage("render", "done", "modules=" + std::to_string(which.size()));
}

void run_jaccard(const PipelineConfig& config, const fs::path& embeddings_path, const fs::path& features_path,
                 const std::vector<std::size_t>& sizes, std::size_t cap, const fs::path& out, Log& log) {
    const auto embeddings = load_embeddings(embeddings_path);
    const auto features = load_features(features_path);
    validate_features(features, embeddings.rows());
    log.stage("jaccard", "start");
    const auto curve =
        neighborhood_jaccard(features.values, embeddings, sizes, cap, stage_seed(config, SeedStream::jaccard));
    if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
    }
    write_json(out, to_json(curve));
    log.stage("jaccard", "done");
}

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("LAVA_THREADS")) {
        const int threads = std::atoi(env);
        if (threads > 0) {
            omp_set_num_threads(threads);
        }
    }
#endif
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    apply_thread_cap();
    CLI::App app{"lava: locality-aware variable associations for latent embeddings"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value configuration file");
        sub->add_option("--seed", seed, "overrides the config seed");
    };

    std::string embeddings, features, localities, correlations, model, labels, target_label, grid, out_path;
    std::optional<std::size_t> modules, module, reference;
    std::optional<double> tau;
    std::vector<std::size_t> sizes;
    std::size_t cap = 1000;

    auto* place = app.add_subcommand("place", "optimize probe placement and build localities");
    common(place);
    place->add_option("--embeddings", embeddings)->required();
    place->add_option("--out", out_path)->required();

    auto* correlate = app.add_subcommand("correlate", "absolute Spearman correlations per locality");
    common(correlate);
    correlate->add_option("--features", features)->required();
    correlate->add_option("--localities", localities, "directory written by place")->required();
    correlate->add_option("--out", out_path)->required();

    auto* extract = app.add_subcommand("extract", "single AMF run");
    common(extract);
    extract->add_option("--correlations", correlations)->required();
    extract->add_option("--modules", modules, "module count (default: config num_modules)");
    extract->add_option("--out", out_path)->required();

    auto* select = app.add_subcommand("select", "repeated AMF runs per candidate module count");
    common(select);
    select->add_option("--correlations", correlations)->required();
    select->add_option("--out", out_path)->required();

    auto* finetune = app.add_subcommand("finetune", "pinball fine-tuning of presences");
    common(finetune);
    finetune->add_option("--correlations", correlations)->required();
    finetune->add_option("--model", model)->required();
    finetune->add_option("--tau", tau);
    finetune->add_option("--out", out_path)->required();

    auto* analyze = app.add_subcommand("analyze", "entropy, rankings, similarity and metadata reports");
    common(analyze);
    analyze->add_option("--correlations", correlations)->required();
    analyze->add_option("--model", model)->required();
    analyze->add_option("--localities", localities);
    analyze->add_option("--labels", labels);
    analyze->add_option("--target-label", target_label);
    analyze->add_option("--features", features, "used for feature names");
    analyze->add_option("--reference", reference, "locality id for similarity map");
    analyze->add_option("--out", out_path)->required();

    auto* render = app.add_subcommand("render", "SVG heatmaps, pair charts and presence scatter plots");
    common(render);
    render->add_option("--model", model)->required();
    render->add_option("--module", module);
    render->add_option("--grid", grid, "HxW feature layout");
    render->add_option("--features", features);
    render->add_option("--embeddings", embeddings);
    render->add_option("--localities", localities);
    render->add_option("--correlations", correlations, "also render presence-weighted averages");
    render->add_option("--out", out_path)->required();

    auto* pipeline = app.add_subcommand("pipeline", "place, correlate, select, analyze and render");
    common(pipeline);
    pipeline->add_option("--embeddings", embeddings)->required();
    pipeline->add_option("--features", features)->required();
    pipeline->add_option("--labels", labels);
    pipeline->add_option("--target-label", target_label);
    pipeline->add_option("--grid", grid);
    pipeline->add_option("--out", out_path)->required();

    auto* jaccard_cmd = app.add_subcommand("jaccard", "neighborhood retention between feature and latent space");
    common(jaccard_cmd);
    jaccard_cmd->add_option("--embeddings", embeddings)->required();
    jaccard_cmd->add_option("--features", features)->required();
    jaccard_cmd->add_option("--sizes", sizes)->required()->delimiter(',');
    jaccard_cmd->add_option("--cap", cap, "max sampled queries (0 = all)");
    jaccard_cmd->add_option("--out", out_path)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "lava: usage error: " << e.what() << '\n' << app.help();
        return 1;
    }

    Log log(err);
    try {
        const auto config = load_stage_config(config_path, seed);
        const fs::path dest(out_path);
        if (*place) {
            run_place(config, embeddings, dest, log);
        } else if (*correlate) {
            run_correlate(config, features, localities, dest, log);
        } else if (*extract) {
            run_extract(config, correlations, modules, dest, log);
        } else if (*select) {
            run_select(config, correlations, dest, log);
        } else if (*finetune) {
            run_finetune(config, correlations, model, tau, dest, log);
        } else if (*analyze) {
            run_analyze(config, AnalyzeInputs{correlations, model, localities, labels, features, target_label, reference},
                        dest, log);
        } else if (*render) {
            run_render(config, RenderInputs{model, module, grid, features, embeddings, localities, correlations}, dest,
                       log);
        } else if (*pipeline) {
            run_place(config, embeddings, dest / "localities", log);
            run_correlate(config, features, dest / "localities", dest / "correlations", log);
            run_select(config, dest / "correlations" / "correlations.bin", dest / "selection", log);
            const fs::path chosen = dest / "model";
            fs::create_directories(chosen);
            for (const char* name : {"modules.bin", "presences.bin", "model.json"}) {
                fs::copy_file(dest / "selection" / "model" / name, chosen / name,
                              fs::copy_options::overwrite_existing);
            }
            run_analyze(config,
                        AnalyzeInputs{dest / "correlations" / "correlations.bin", chosen,
                                      labels.empty() ? fs::path{} : dest / "localities", labels, features,
                                      target_label, std::nullopt},
                        dest / "analysis", log);
            run_render(config,
                       RenderInputs{chosen, std::nullopt, grid, features, embeddings, dest / "localities",
                                    dest / "correlations" / "correlations.bin"},
                       dest / "render", log);
        } else if (*jaccard_cmd) {
            run_jaccard(config, embeddings, features, sizes, cap, dest, log);
        }
    } catch (const ParameterError& e) {
        err << "lava: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "lava: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace lava
