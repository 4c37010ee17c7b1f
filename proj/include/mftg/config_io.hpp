#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mftg/game.hpp"
#include "mftg/learner.hpp"
#include "mftg/olne.hpp"
#include "mftg/riccati.hpp"

namespace mftg {

struct ParseError : std::runtime_error {
  ParseError(const std::string& where, const std::string& what_)
      : std::runtime_error(where + ": " + what_), path(where) {}
  std::string path;
};

// Fully expanded experiment description: model, optional team structure,
// learner settings, and the sweep grids the CLI commands consume.
struct ExperimentConfig {
  GameSpec spec;
  std::optional<TeamSpec> teams;
  LearnerConfig learner;
  std::string preset;  // non-empty when expanded from a named preset

  std::vector<double> eta_grid;
  std::vector<int> nb_grid;
  std::vector<int> m_grid;
  std::vector<int> runs_per_m;
  std::vector<double> gamma_scales;
};

// Config schema (JSON): a "model" object with scalar/matrix/time-sequence
// shorthand (number = 1x1 matrix, array of rows = one matrix, array of
// matrices or numbers = per-timestep sequence; per-player fields are arrays
// over players), an optional "teams" object assembled into the joint model,
// an optional "learner" object, and optional sweep grids. Errors carry the
// JSON path of the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

nlohmann::json spec_to_json(const GameSpec& spec);
nlohmann::json learner_to_json(const LearnerConfig& cfg);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

nlohmann::json mat_to_json(const Mat& m);
Mat mat_from_json(const nlohmann::json& j, const std::string& where);

nlohmann::json profile_to_json(const PolicyProfile& profile);
PolicyProfile profile_from_json(const nlohmann::json& j);
nlohmann::json solution_to_json(const RiccatiSolution& sol);
nlohmann::json olne_to_json(const OlneSolution& sol);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace mftg
