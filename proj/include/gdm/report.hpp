#pragma once

#include "gdm/estimate.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace gdm {

// Machine-readable result document. `config_echo` is embedded verbatim.
nlohmann::ordered_json result_to_json(const EstimationResult& result, const std::string& config_echo = {});
EstimationResult result_from_json(const nlohmann::json& doc);

EstimationResult read_result(const std::filesystem::path& path);

// Human-readable key/value report.
std::string format_report(const EstimationResult& result);

std::string format_comparison(const ComparisonTable& table);
std::string comparison_csv(const ComparisonTable& table);

}  // namespace gdm
