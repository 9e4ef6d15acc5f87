#pragma once

// nlohmann/json adapters for the result types. Private to the library.

#include <json.hpp>

#include "bufsim/experiment.hpp"
#include "bufsim/metrics.hpp"

namespace bufsim {

void to_json(nlohmann::json& j, const BufferPolicy& p);
void from_json(const nlohmann::json& j, BufferPolicy& p);

void to_json(nlohmann::json& j, const MeasurementWindow& w);
void from_json(const nlohmann::json& j, MeasurementWindow& w);

void to_json(nlohmann::json& j, const ClassStats& s);
void from_json(const nlohmann::json& j, ClassStats& s);

void to_json(nlohmann::json& j, const RunSummary& s);
void from_json(const nlohmann::json& j, RunSummary& s);

void to_json(nlohmann::json& j, const SopcastModelParams& p);
void from_json(const nlohmann::json& j, SopcastModelParams& p);

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);

}  // namespace bufsim
