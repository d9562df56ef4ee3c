#pragma once

#include <filesystem>
#include <string>

#include "teamci/team_problem.hpp"

// forward-declare nlohmann::json without pulling the header everywhere
#include <json.hpp>

namespace teamci {

inline constexpr int kProblemFileVersion = 1;

// Builds a TeamProblem from a problem file without running semantic
// validation (shape errors still throw ParseError).  Unknown fields and
// version mismatches are rejected with the offending path in the message.
TeamProblem load_problem(const std::filesystem::path& path);
TeamProblem load_problem_json(const nlohmann::json& doc, const std::string& source);

// load_problem + validate; a dirty instance (e.g. a channel violating
// normalization) is a parse-time error naming the channel and state.
TeamProblem parse_problem(const std::filesystem::path& path);

// Inverse of load_problem_json up to content: parse(serialize(p)) rebuilds
// the same spaces, law, densities and cost values.
nlohmann::json serialize_problem(const TeamProblem& problem);

// Content equality on the parsed representation (used by round-trip tests).
bool same_problem_content(const TeamProblem& a, const TeamProblem& b);

}  // namespace teamci
