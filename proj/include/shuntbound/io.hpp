#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "shuntbound/model.hpp"
#include "shuntbound/planner.hpp"
#include "shuntbound/solver.hpp"

namespace shuntbound {

/// Parses the instance format (docs/file_formats.md) and finalizes the
/// instance. Throws std::runtime_error with a readable message on malformed
/// input.
Instance instance_from_json(const nlohmann::json& j, const std::string& name = "instance");
nlohmann::json instance_to_json(const Instance& instance);

Instance load_instance(const std::string& path);
void save_instance(const Instance& instance, const std::string& path);

nlohmann::json solution_to_json(const Instance& instance, std::span<const Path> paths);
std::vector<Path> solution_from_json(const Instance& instance, const nlohmann::json& j);
std::vector<Path> load_solution(const Instance& instance, const std::string& path);

/// include_timing=false zeroes runtime_ms for byte-reproducible output.
nlohmann::json outcome_to_json(const Instance& instance, const Outcome& outcome,
                               bool include_timing = true);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace shuntbound
