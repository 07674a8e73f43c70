#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "vinestress/bicop.hpp"
#include "vinestress/datagen.hpp"
#include "vinestress/dvine.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/stress.hpp"

namespace vinestress::io {

/// Shortest text that reads back to the same double.
std::string format_number(double x);

// Panel CSV: header "date,<label>,...", dates "YYYY-MM", no missing cells.
// Errors carry the 1-based line number and the column name.
RawPanel read_panel(const std::filesystem::path& path);
RawPanel parse_panel(const std::string& text, const std::string& source = "<string>");
void write_panel(const std::filesystem::path& path, const RawPanel& panel);
std::string format_panel(const std::vector<std::string>& dates, const std::vector<std::string>& labels,
                         const Columns& columns);

/// Differenced series use the panel layout.
void write_diff(const std::filesystem::path& path, const DiffPanel& panel);
DiffPanel read_diff(const std::filesystem::path& path);

/// Pseudo-observation CSV. Entries must lie strictly inside (0,1).
void write_pseudo(const std::filesystem::path& path, const PseudoPanel& panel);
PseudoPanel read_pseudo(const std::filesystem::path& path);
/// Attaches the empirical marginals of the matching differenced series.
void attach_marginals(PseudoPanel& pseudo, const DiffPanel& diff);

nlohmann::json to_json(const BivariateCopula& c);
BivariateCopula copula_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DVineModel& model);
DVineModel model_from_json(const nlohmann::json& j);
void write_model(const std::filesystem::path& path, const DVineModel& model);
DVineModel read_model(const std::filesystem::path& path);

nlohmann::json to_json(const StressScenario& scenario);
/// Validates the scenario; errors name the offending field.
StressScenario scenario_from_json(const nlohmann::json& j);
StressScenario read_scenario(const std::filesystem::path& path);

nlohmann::json to_json(const GroundTruthSpec& spec);
GroundTruthSpec spec_from_json(const nlohmann::json& j);
GroundTruthSpec read_spec(const std::filesystem::path& path);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vinestress::io
