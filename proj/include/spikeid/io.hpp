#pragma once

// File formats. CSV for datasets and event streams; JSON (with a leading
// schema_version) for templates, bases, checkpoints, networks and reports.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "spikeid/ann.hpp"
#include "spikeid/encode.hpp"
#include "spikeid/preprocess.hpp"
#include "spikeid/snn.hpp"
#include "spikeid/spectra.hpp"

namespace spikeid::io {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

std::string read_text(const std::filesystem::path& path);
// Throws ValidationError when the file cannot be created or written.
void write_text(const std::filesystem::path& path, const std::string& text);
Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

// Header: label,distance_m,phantom,integration_s,c0,...,c{n-1}
std::string dataset_to_csv(const spectra::Dataset& ds);
// Labels are resolved against `class_names`; when empty, classes are numbered
// in order of first appearance.
spectra::Dataset dataset_from_csv(const std::string& text, std::vector<std::string> class_names = {});
void write_dataset(const std::filesystem::path& path, const spectra::Dataset& ds);
spectra::Dataset read_dataset(const std::filesystem::path& path, std::vector<std::string> class_names = {});

Json templates_to_json(const spectra::TemplateSet& set);
spectra::TemplateSet templates_from_json(const Json& j);
spectra::TemplateSet read_templates(const std::filesystem::path& path);

Json basis_to_json(const preprocess::ProjectionBasis& b);
preprocess::ProjectionBasis basis_from_json(const Json& j);

Json transform_to_json(const preprocess::InputTransform& t);
preprocess::InputTransform transform_from_json(const Json& j);

Json model_to_json(const ann::NetworkModel& m);
ann::NetworkModel model_from_json(const Json& j);

Json lif_to_json(const snn::LIFParams& p);
snn::LIFParams lif_from_json(const Json& j);

Json network_to_json(const snn::SpikingNetwork& n);
snn::SpikingNetwork network_from_json(const Json& j);

// Header: time_us,channel,polarity
std::string events_to_csv(const encode::EventStream& s);
encode::EventStream events_from_csv(const std::string& text);

Json metrics_to_json(const ann::Metrics& m);
Json cost_to_json(const snn::CostReport& r);

}  // namespace spikeid::io
