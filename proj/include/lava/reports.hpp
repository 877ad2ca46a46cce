#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "lava/amf.hpp"
#include "lava/analysis.hpp"
#include "lava/config.hpp"
#include "lava/correlation.hpp"
#include "lava/neighbors.hpp"
#include "lava/placement.hpp"
#include "lava/selection.hpp"

namespace lava {

// Insertion-ordered so serialized reports have a fixed key order.
using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const PlacementReport& report, std::size_t samples, std::size_t n, std::size_t localities);
Json to_json(const AmfConfig& config);
Json to_json(const AmfRunResult& run, const AmfConfig& config);
Json to_json(const SelectionReport& report);
Json to_json(const PresenceStats& stats);
Json to_json(const MetadataAssociation& assoc);
Json to_json(const JaccardCurve& curve);
Json correlation_sidecar(const CorrelationDataset& dataset, std::size_t neighborhood_size);

std::string dump(const Json& json);
void write_json(const std::filesystem::path& path, const Json& json);

// Directory layouts shared by the CLI stages.
void save_localities(const std::filesystem::path& dir, const LocalitySet& localities);
LocalitySet load_localities(const std::filesystem::path& dir);

void save_correlations(const std::filesystem::path& dir, const CorrelationDataset& dataset,
                       std::size_t neighborhood_size);
CorrelationDataset load_correlations(const std::filesystem::path& path);

void save_model(const std::filesystem::path& dir, const AmfModel& model, const Json& metadata);
AmfModel load_model(const std::filesystem::path& dir);

}  // namespace lava
