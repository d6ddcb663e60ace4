#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "amis/sampler.hpp"

namespace amis {

/// Real number with 17 significant digits.
std::string fmt17(double v);

/// JSON text with every floating-point value written to 17 significant digits.
/// Non-finite values become null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

std::string csv_quote(const std::string& field);
std::vector<std::string> csv_split(const std::string& line);

/// Columns: i, theta_1..theta_r, psi_value, proposal_params (density JSON).
std::string history_to_csv(const History& h);
History history_from_csv(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace amis
