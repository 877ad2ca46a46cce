#include "lava/reports.hpp"

#include <cmath>

#include "lava/data_io.hpp"
#include "lava/error.hpp"

namespace lava {

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Json to_json(const PlacementReport& report, std::size_t samples, std::size_t n, std::size_t localities) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["samples"] = samples;
    j["neighborhood_size"] = n;
    j["localities"] = localities;
    j["best_alpha"] = report.best_alpha;
    j["best_beta"] = report.best_beta;
    j["best_loss"] = report.best_loss;
    Json evals = Json::array();
    for (const auto& e : report.evaluations) {
        evals.push_back(Json{{"alpha", e.alpha}, {"beta", e.beta}, {"loss", e.loss}});
    }
    j["evaluations"] = std::move(evals);
    j["locality_in_degree"] = report.locality_in_degree;
    return j;
}

Json to_json(const AmfConfig& config) {
    Json j;
    j["num_modules"] = config.num_modules;
    j["nu"] = config.nu;
    j["gamma"] = config.gamma;
    j["batch_size"] = config.batch_size;
    j["improvement_tol"] = config.improvement_tol;
    j["patience_epochs"] = config.patience_epochs;
    j["max_epochs"] = config.max_epochs;
    j["learning_rate"] = config.learning_rate;
    j["beta1"] = config.beta1;
    j["beta2"] = config.beta2;
    j["adam_epsilon"] = config.adam_epsilon;
    j["seed"] = config.seed;
    return j;
}

Json to_json(const AmfRunResult& run, const AmfConfig& config) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["config"] = to_json(config);
    j["final_loss"] = run.final_loss;
    j["cosine_similarity_mean"] = run.cosine_similarity_mean;
    j["overestimation_ratio"] = run.overestimation_ratio;
    j["epochs_run"] = run.epochs_run;
    j["loss_curve"] = run.loss_curve;
    return j;
}

Json to_json(const SelectionReport& report) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    Json cands = Json::array();
    for (const auto& c : report.candidates) {
        Json cj;
        cj["module_count"] = c.module_count;
        cj["cosine_similarity_mean"] = c.cosine_mean;
        cj["cosine_similarity_std"] = c.cosine_std;
        cj["overestimation_ratio_mean"] = c.overestimation_mean;
        cj["overestimation_ratio_std"] = c.overestimation_std;
        cj["loss_mean"] = c.loss_mean;
        cj["loss_std"] = c.loss_std;
        cj["silhouette"] = c.silhouette ? Json(*c.silhouette) : Json(nullptr);
        cj["pooled_modules"] = c.pooled_modules;
        cj["best_run"] = c.best_run;
        cj["run_losses"] = c.run_losses;
        cands.push_back(std::move(cj));
    }
    j["candidates"] = std::move(cands);
    j["chosen_module_count"] = report.chosen_module_count;
    j["chosen_run"] = report.chosen_run;
    return j;
}

Json to_json(const PresenceStats& stats) {
    Json j;
    j["presence_floor"] = stats.presence_floor;
    j["retained"] = stats.retained;
    j["empty"] = stats.empty;
    j["mean_bits"] = stats.empty ? Json(nullptr) : Json(stats.mean);
    j["std_bits"] = stats.empty ? Json(nullptr) : Json(stats.std);
    Json per = Json::array();
    for (const auto& h : stats.entropy_bits) {
        per.push_back(h ? Json(*h) : Json(nullptr));
    }
    j["entropy_bits"] = std::move(per);
    j["summed_presence"] = stats.summed_presence;
    return j;
}

Json to_json(const MetadataAssociation& assoc) {
    Json j;
    j["target_label"] = assoc.target_label;
    j["presence_threshold"] = assoc.presence_threshold;
    Json mods = Json::array();
    for (const auto& m : assoc.modules) {
        Json mj;
        mj["module"] = m.module;
        mj["localities"] = m.localities;
        mj["defined"] = m.defined;
        mj["pearson_r"] = m.defined ? number_or_null(m.pearson_r) : Json(nullptr);
        mj["pearson_p"] = m.defined ? number_or_null(m.pearson_p) : Json(nullptr);
        mj["spearman_r"] = m.defined ? number_or_null(m.spearman_r) : Json(nullptr);
        mj["spearman_p"] = m.defined ? number_or_null(m.spearman_p) : Json(nullptr);
        mods.push_back(std::move(mj));
    }
    j["modules"] = std::move(mods);
    j["locality_ratio"] = assoc.locality_ratio;
    return j;
}

Json to_json(const JaccardCurve& curve) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["samples_used"] = curve.samples_used;
    Json points = Json::array();
    for (std::size_t i = 0; i < curve.sizes.size(); ++i) {
        points.push_back(Json{{"size", curve.sizes[i]}, {"mean_jaccard", curve.mean_jaccard[i]}});
    }
    j["curve"] = std::move(points);
    return j;
}

Json correlation_sidecar(const CorrelationDataset& dataset, std::size_t neighborhood_size) {
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["localities"] = dataset.values.rows();
    j["features"] = dataset.pairs.features();
    j["pairs"] = dataset.pairs.size();
    j["pair_order"] = "lexicographic (i, j), i < j; id = i*D - i*(i+1)/2 + (j - i - 1)";
    j["filter_threshold"] = dataset.filter_threshold;
    j["filter_rule"] = "pair set to 0 when either feature's modal-value fraction exceeds the threshold";
    j["neighborhood_size"] = neighborhood_size;
    j["matrix"] = "correlations.bin";
    return j;
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const Json& json) { write_text_file(path, dump(json)); }

void save_localities(const std::filesystem::path& dir, const LocalitySet& localities) {
    std::filesystem::create_directories(dir);
    save_matrix(localities.probes, dir / "probes.bin", MatrixFormat::binary);
    RealMatrix members(localities.members.rows(), localities.members.cols());
    for (std::size_t i = 0; i < members.size(); ++i) {
        members.values()[i] = static_cast<double>(localities.members.values()[i]);
    }
    save_matrix(members, dir / "members.bin", MatrixFormat::binary);
}

LocalitySet load_localities(const std::filesystem::path& dir) {
    LocalitySet set;
    set.probes = load_matrix(dir / "probes.bin", MatrixFormat::binary);
    const auto members = load_matrix(dir / "members.bin", MatrixFormat::binary);
    set.members = IndexMatrix(members.rows(), members.cols());
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double v = members.values()[i];
        if (v < 0.0 || v != std::floor(v)) {
            throw DataError("members.bin holds a non-index value");
        }
        set.members.values()[i] = static_cast<std::size_t>(v);
    }
    if (set.probes.rows() != set.members.rows()) {
        throw DataError("probes.bin and members.bin disagree on the locality count");
    }
    return set;
}

void save_correlations(const std::filesystem::path& dir, const CorrelationDataset& dataset,
                       std::size_t neighborhood_size) {
    std::filesystem::create_directories(dir);
    save_matrix(dataset.values, dir / "correlations.bin", MatrixFormat::binary);
    write_json(dir / "correlations.json", correlation_sidecar(dataset, neighborhood_size));
}

CorrelationDataset load_correlations(const std::filesystem::path& path) {
    const auto file = std::filesystem::is_directory(path) ? path / "correlations.bin" : path;
    CorrelationDataset dataset;
    dataset.values = load_float_matrix(file);
    dataset.pairs = PairIndex::from_pair_count(dataset.values.cols());
    const auto sidecar = file.parent_path() / "correlations.json";
    if (std::filesystem::exists(sidecar)) {
        const auto meta = Json::parse(read_text_file(sidecar), nullptr, false);
        if (!meta.is_discarded() && meta.contains("filter_threshold")) {
            dataset.filter_threshold = meta["filter_threshold"].get<double>();
        }
    }
    for (const float v : dataset.values.values()) {
        if (v < 0.0F || v > 1.0F) {
            throw DataError("correlation entries must lie in [0, 1]");
        }
    }
    return dataset;
}

void save_model(const std::filesystem::path& dir, const AmfModel& model, const Json& metadata) {
    std::filesystem::create_directories(dir);
    save_matrix(model.modules, dir / "modules.bin", MatrixFormat::binary);
    save_matrix(model.presences, dir / "presences.bin", MatrixFormat::binary);
    write_json(dir / "model.json", metadata);
}

AmfModel load_model(const std::filesystem::path& dir) {
    AmfModel model;
    model.modules = load_matrix(dir / "modules.bin", MatrixFormat::binary);
    model.presences = load_matrix(dir / "presences.bin", MatrixFormat::binary);
    if (model.presences.cols() != model.modules.rows()) {
        throw DataError("presences.bin and modules.bin disagree on the module count");
    }
    return model;
}

}  // namespace lava
