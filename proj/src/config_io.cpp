#include "mftg/config_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace mftg {
namespace {

using nlohmann::json;

const json& member(const json& j, const std::string& key,
                   const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + "." + key, "missing field");
  return *it;
}

const json* member_opt(const json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where, "expected an integer");
  return j.get<int>();
}

std::vector<int> as_int_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array of integers");
  std::vector<int> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(as_int(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> as_double_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

void check_dims(const Mat& m, int rows, int cols, const std::string& where) {
  if (m.rows() != rows || m.cols() != cols)
    throw ParseError(where, "expected a " + std::to_string(rows) + "x" +
                                std::to_string(cols) + " matrix, got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
}

// A time-dependent matrix field accepts: a number (1x1, constant in t), an
// array of rows (one matrix, constant in t), an array of numbers (scalar per
// timestep), or an array of matrices (one per timestep).
MatSeq parse_time_seq(const json& j, int rows, int cols, int count,
                      const std::string& where) {
  MatSeq out;
  if (j.is_number()) {
    Mat m(1, 1);
    m(0, 0) = j.get<double>();
    check_dims(m, rows, cols, where);
    out.assign(count, m);
    return out;
  }
  if (!j.is_array() || j.empty())
    throw ParseError(where, "expected a number, matrix, or per-timestep list");
  if (j[0].is_array() && !j[0].empty() && j[0][0].is_number()) {
    Mat m = mat_from_json(j, where);
    check_dims(m, rows, cols, where);
    out.assign(count, m);
    return out;
  }
  if (static_cast<int>(j.size()) != count)
    throw ParseError(where, "expected " + std::to_string(count) +
                                " timesteps, got " + std::to_string(j.size()));
  for (int t = 0; t < count; ++t) {
    const std::string at = where + "[" + std::to_string(t) + "]";
    Mat m = mat_from_json(j[t], at);
    check_dims(m, rows, cols, at);
    out.push_back(std::move(m));
  }
  return out;
}

MatSeq zero_seq(int rows, int cols, int count) {
  return MatSeq(count, Mat::Zero(rows, cols));
}

json seq_to_json(const MatSeq& seq) {
  json out = json::array();
  for (const Mat& m : seq) out.push_back(mat_to_json(m));
  return out;
}

MatSeq seq_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array of matrices");
  MatSeq out;
  for (size_t t = 0; t < j.size(); ++t)
    out.push_back(mat_from_json(j[t], where + "[" + std::to_string(t) + "]"));
  return out;
}

json player_seq_to_json(const PlayerMatSeq& seqs) {
  json out = json::array();
  for (const MatSeq& seq : seqs) out.push_back(seq_to_json(seq));
  return out;
}

PlayerMatSeq player_seq_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where, "expected an array over players");
  PlayerMatSeq out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(seq_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// rows may depend on the player (b is n x p_i, r is p_i x p_i).
PlayerMatSeq parse_player_seq(const json& j, int players,
                              const std::vector<int>& rows,
                              const std::vector<int>& cols, int count,
                              const std::string& where) {
  if (!j.is_array() || static_cast<int>(j.size()) != players)
    throw ParseError(where, "expected an array with one entry per player (" +
                                std::to_string(players) + ")");
  PlayerMatSeq out;
  for (int i = 0; i < players; ++i)
    out.push_back(parse_time_seq(j[i], rows[i], cols[i], count,
                                 where + "[" + std::to_string(i) + "]"));
  return out;
}

GameSpec spec_from_json(const json& j, const std::string& where) {
  GameSpec spec;
  spec.num_players = as_int(member(j, "num_players", where), where + ".num_players");
  spec.horizon = as_int(member(j, "horizon", where), where + ".horizon");
  spec.state_dim = as_int(member(j, "state_dim", where), where + ".state_dim");
  spec.control_dims =
      as_int_vec(member(j, "control_dims", where), where + ".control_dims");
  const int N = spec.num_players;
  const int T = spec.horizon;
  const int n = spec.state_dim;
  if (N <= 0 || T <= 0 || n <= 0)
    throw ParseError(where, "num_players, horizon, state_dim must be positive");
  if (static_cast<int>(spec.control_dims.size()) != N)
    throw ParseError(where + ".control_dims",
                     "expected " + std::to_string(N) + " entries");

  std::vector<int> ns(N, n);
  const std::vector<int>& ps = spec.control_dims;

  spec.a = parse_time_seq(member(j, "a", where), n, n, T, where + ".a");
  if (const json* ab = member_opt(j, "a_bar"))
    spec.a_bar = parse_time_seq(*ab, n, n, T, where + ".a_bar");
  else
    spec.a_bar = zero_seq(n, n, T);
  spec.b = parse_player_seq(member(j, "b", where), N, ns, ps, T, where + ".b");
  if (const json* bb = member_opt(j, "b_bar")) {
    spec.b_bar = parse_player_seq(*bb, N, ns, ps, T, where + ".b_bar");
  } else {
    spec.b_bar.clear();
    for (int i = 0; i < N; ++i) spec.b_bar.push_back(zero_seq(n, ps[i], T));
  }
  spec.q = parse_player_seq(member(j, "q", where), N, ns, ns, T + 1, where + ".q");
  spec.q_bar = parse_player_seq(member(j, "q_bar", where), N, ns, ns, T + 1,
                                where + ".q_bar");
  spec.r = parse_player_seq(member(j, "r", where), N, ps, ps, T, where + ".r");
  spec.r_bar = parse_player_seq(member(j, "r_bar", where), N, ps, ps, T,
                                where + ".r_bar");
  spec.sigma = mat_from_json(member(j, "sigma", where), where + ".sigma");
  check_dims(spec.sigma, n, n, where + ".sigma");
  spec.sigma0 = mat_from_json(member(j, "sigma0", where), where + ".sigma0");
  check_dims(spec.sigma0, n, n, where + ".sigma0");
  return spec;
}

TeamSpec teams_from_json(const json& j, const std::string& where) {
  TeamSpec teams;
  teams.num_teams = as_int(member(j, "num_teams", where), where + ".num_teams");
  teams.horizon = as_int(member(j, "horizon", where), where + ".horizon");
  teams.team_state_dim = as_int(member(j, "team_state_dim", where),
                                where + ".team_state_dim");
  teams.control_dims =
      as_int_vec(member(j, "control_dims", where), where + ".control_dims");
  teams.agent_counts =
      as_int_vec(member(j, "agent_counts", where), where + ".agent_counts");
  const int N = teams.num_teams;
  const int T = teams.horizon;
  const int m = teams.team_state_dim;
  if (N <= 0 || T <= 0 || m <= 0)
    throw ParseError(where, "num_teams, horizon, team_state_dim must be positive");
  if (static_cast<int>(teams.control_dims.size()) != N ||
      static_cast<int>(teams.agent_counts.size()) != N)
    throw ParseError(where, "control_dims and agent_counts need " +
                                std::to_string(N) + " entries");

  auto team_field = [&](const char* key, int rows, int cols, int count,
                        bool required) {
    std::vector<MatSeq> out;
    const json* f = member_opt(j, key);
    if (f == nullptr) {
      if (required)
        throw ParseError(where + "." + key, "missing field");
      out.assign(N, zero_seq(rows, cols, count));
      return out;
    }
    if (!f->is_array() || static_cast<int>(f->size()) != N)
      throw ParseError(where + "." + key,
                       "expected one entry per team (" + std::to_string(N) + ")");
    for (int i = 0; i < N; ++i)
      out.push_back(parse_time_seq(
          (*f)[i], rows > 0 ? rows : teams.control_dims[i],
          cols > 0 ? cols : teams.control_dims[i], count,
          where + "." + key + "[" + std::to_string(i) + "]"));
    return out;
  };

  teams.a = team_field("a", m, m, T, true);
  teams.a_bar = team_field("a_bar", m, m, T, false);
  teams.q = team_field("q", m, m, T + 1, true);
  teams.q_bar = team_field("q_bar", m, m, T + 1, true);
  teams.r = team_field("r", -1, -1, T, true);
  teams.r_bar = team_field("r_bar", -1, -1, T, true);

  auto cross_field = [&](const char* key, bool required) {
    std::vector<std::vector<MatSeq>> out(N);
    const json* f = member_opt(j, key);
    if (f == nullptr) {
      if (required) throw ParseError(where + "." + key, "missing field");
      for (int i = 0; i < N; ++i)
        for (int k = 0; k < N; ++k)
          out[i].push_back(zero_seq(m, teams.control_dims[k], T));
      return out;
    }
    if (!f->is_array() || static_cast<int>(f->size()) != N)
      throw ParseError(where + "." + key,
                       "expected one entry per team (" + std::to_string(N) + ")");
    for (int i = 0; i < N; ++i) {
      const json& row = (*f)[i];
      const std::string at = where + "." + key + "[" + std::to_string(i) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != N)
        throw ParseError(at, "expected one entry per player (" +
                                 std::to_string(N) + ")");
      for (int k = 0; k < N; ++k)
        out[i].push_back(parse_time_seq(row[k], m, teams.control_dims[k], T,
                                        at + "[" + std::to_string(k) + "]"));
    }
    return out;
  };

  teams.b = cross_field("b", true);
  teams.b_bar = cross_field("b_bar", false);

  const json& sig = member(j, "sigma", where);
  if (!sig.is_array() || static_cast<int>(sig.size()) != N)
    throw ParseError(where + ".sigma",
                     "expected one covariance per team (" + std::to_string(N) + ")");
  for (int i = 0; i < N; ++i) {
    Mat s = mat_from_json(sig[i], where + ".sigma[" + std::to_string(i) + "]");
    check_dims(s, m, m, where + ".sigma[" + std::to_string(i) + "]");
    teams.sigma.push_back(std::move(s));
  }
  teams.sigma0 = mat_from_json(member(j, "sigma0", where), where + ".sigma0");
  check_dims(teams.sigma0, N * m, N * m, where + ".sigma0");
  return teams;
}

GradientMode mode_from_string(const std::string& s, const std::string& where) {
  if (s == "exact") return GradientMode::kExact;
  if (s == "zero_order_expected") return GradientMode::kZeroOrderExpected;
  if (s == "zero_order_sample_path")
    return GradientMode::kZeroOrderSamplePath;
  throw ParseError(where, "unknown mode '" + s +
                              "' (expected exact, zero_order_expected, or "
                              "zero_order_sample_path)");
}

const char* mode_to_string(GradientMode mode) {
  switch (mode) {
    case GradientMode::kExact:
      return "exact";
    case GradientMode::kZeroOrderExpected:
      return "zero_order_expected";
    case GradientMode::kZeroOrderSamplePath:
      return "zero_order_sample_path";
  }
  return "exact";
}

StageScale stage_scale_from_json(const json& j, const std::string& where) {
  StageScale out;
  if (!j.is_array()) throw ParseError(where, "expected an array over players");
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(as_double_vec(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

LearnerConfig learner_from_json(const json& j, const std::string& where) {
  LearnerConfig cfg;
  if (const json* eta = member_opt(j, "eta")) {
    if (eta->is_number())
      cfg.eta = {eta->get<double>()};
    else
      cfg.eta = as_double_vec(*eta, where + ".eta");
  }
  if (const json* v = member_opt(j, "iterations"))
    cfg.iterations = as_int(*v, where + ".iterations");
  if (const json* v = member_opt(j, "num_directions"))
    cfg.num_directions = as_int(*v, where + ".num_directions");
  if (const json* v = member_opt(j, "radius"))
    cfg.radius = as_number(*v, where + ".radius");
  if (const json* v = member_opt(j, "sigma_y"))
    cfg.sigma_y = as_number(*v, where + ".sigma_y");
  if (const json* v = member_opt(j, "sigma_xbar"))
    cfg.sigma_xbar = as_number(*v, where + ".sigma_xbar");
  if (const json* v = member_opt(j, "proj_radius")) {
    if (v->is_null())
      cfg.proj_radius = std::numeric_limits<double>::infinity();
    else
      cfg.proj_radius = as_number(*v, where + ".proj_radius");
  }
  if (const json* v = member_opt(j, "antithetic")) {
    if (!v->is_boolean()) throw ParseError(where + ".antithetic", "expected a bool");
    cfg.antithetic = v->get<bool>();
  }
  if (const json* v = member_opt(j, "mode")) {
    if (!v->is_string()) throw ParseError(where + ".mode", "expected a string");
    cfg.mode = mode_from_string(v->get<std::string>(), where + ".mode");
  }
  if (const json* v = member_opt(j, "population"))
    cfg.population = as_int(*v, where + ".population");
  if (const json* v = member_opt(j, "gamma"))
    cfg.gamma = stage_scale_from_json(*v, where + ".gamma");
  if (const json* v = member_opt(j, "gamma_bar"))
    cfg.gamma_bar = stage_scale_from_json(*v, where + ".gamma_bar");
  if (const json* v = member_opt(j, "seed")) {
    if (!v->is_number_integer()) throw ParseError(where + ".seed", "expected an integer");
    cfg.seed = v->get<uint64_t>();
  }
  return cfg;
}

json stage_scale_to_json(const StageScale& s) {
  json out = json::array();
  for (const auto& row : s) out.push_back(row);
  return out;
}

json teams_to_json(const TeamSpec& teams) {
  json j;
  j["num_teams"] = teams.num_teams;
  j["horizon"] = teams.horizon;
  j["team_state_dim"] = teams.team_state_dim;
  j["control_dims"] = teams.control_dims;
  j["agent_counts"] = teams.agent_counts;
  auto dump_team = [](const std::vector<MatSeq>& f) {
    json out = json::array();
    for (const MatSeq& seq : f) out.push_back(seq_to_json(seq));
    return out;
  };
  j["a"] = dump_team(teams.a);
  j["a_bar"] = dump_team(teams.a_bar);
  json b = json::array(), bb = json::array();
  for (int i = 0; i < teams.num_teams; ++i) {
    b.push_back(dump_team(teams.b[i]));
    bb.push_back(dump_team(teams.b_bar[i]));
  }
  j["b"] = b;
  j["b_bar"] = bb;
  j["q"] = dump_team(teams.q);
  j["q_bar"] = dump_team(teams.q_bar);
  j["r"] = dump_team(teams.r);
  j["r_bar"] = dump_team(teams.r_bar);
  json sig = json::array();
  for (const Mat& s : teams.sigma) sig.push_back(mat_to_json(s));
  j["sigma"] = sig;
  j["sigma0"] = mat_to_json(teams.sigma0);
  return j;
}

}  // namespace

Mat mat_from_json(const json& j, const std::string& where) {
  if (j.is_number()) {
    Mat m(1, 1);
    m(0, 0) = j.get<double>();
    return m;
  }
  if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
    throw ParseError(where, "expected a number or an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Mat m(rows, cols);
  for (int rr = 0; rr < rows; ++rr) {
    const json& row = j[rr];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw ParseError(where, "ragged rows in matrix");
    for (int cc = 0; cc < cols; ++cc)
      m(rr, cc) = as_number(row[cc], where + "[" + std::to_string(rr) + "][" +
                                         std::to_string(cc) + "]");
  }
  return m;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index rr = 0; rr < m.rows(); ++rr) {
    json row = json::array();
    for (Eigen::Index cc = 0; cc < m.cols(); ++cc) row.push_back(m(rr, cc));
    rows.push_back(std::move(row));
  }
  return rows;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  const json* model = member_opt(j, "model");
  const json* teams = member_opt(j, "teams");
  if (model != nullptr && teams != nullptr)
    throw ParseError("$", "give either 'model' or 'teams', not both");
  if (model == nullptr && teams == nullptr)
    throw ParseError("$", "missing 'model' (or 'teams') object");
  if (teams != nullptr) {
    cfg.teams = teams_from_json(*teams, "teams");
    try {
      cfg.spec = assemble_joint(*cfg.teams);
    } catch (const std::invalid_argument& e) {
      throw ParseError("teams", e.what());
    }
  } else {
    cfg.spec = spec_from_json(*model, "model");
  }
  if (const json* l = member_opt(j, "learner"))
    cfg.learner = learner_from_json(*l, "learner");
  if (const json* v = member_opt(j, "preset")) {
    if (!v->is_string()) throw ParseError("preset", "expected a string");
    cfg.preset = v->get<std::string>();
  }
  if (const json* v = member_opt(j, "eta_grid"))
    cfg.eta_grid = as_double_vec(*v, "eta_grid");
  if (const json* v = member_opt(j, "nb_grid"))
    cfg.nb_grid = as_int_vec(*v, "nb_grid");
  if (const json* v = member_opt(j, "m_grid"))
    cfg.m_grid = as_int_vec(*v, "m_grid");
  if (const json* v = member_opt(j, "runs_per_m"))
    cfg.runs_per_m = as_int_vec(*v, "runs_per_m");
  if (const json* v = member_opt(j, "gamma_scales"))
    cfg.gamma_scales = as_double_vec(*v, "gamma_scales");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_json(read_json_file(path));
}

json spec_to_json(const GameSpec& spec) {
  json j;
  j["num_players"] = spec.num_players;
  j["horizon"] = spec.horizon;
  j["state_dim"] = spec.state_dim;
  j["control_dims"] = spec.control_dims;
  j["a"] = seq_to_json(spec.a);
  j["a_bar"] = seq_to_json(spec.a_bar);
  j["b"] = player_seq_to_json(spec.b);
  j["b_bar"] = player_seq_to_json(spec.b_bar);
  j["q"] = player_seq_to_json(spec.q);
  j["q_bar"] = player_seq_to_json(spec.q_bar);
  j["r"] = player_seq_to_json(spec.r);
  j["r_bar"] = player_seq_to_json(spec.r_bar);
  j["sigma"] = mat_to_json(spec.sigma);
  j["sigma0"] = mat_to_json(spec.sigma0);
  return j;
}

json learner_to_json(const LearnerConfig& cfg) {
  json j;
  j["eta"] = cfg.eta;
  j["iterations"] = cfg.iterations;
  j["num_directions"] = cfg.num_directions;
  j["radius"] = cfg.radius;
  j["sigma_y"] = cfg.sigma_y;
  j["sigma_xbar"] = cfg.sigma_xbar;
  if (std::isfinite(cfg.proj_radius))
    j["proj_radius"] = cfg.proj_radius;
  else
    j["proj_radius"] = nullptr;
  j["antithetic"] = cfg.antithetic;
  j["mode"] = mode_to_string(cfg.mode);
  j["population"] = cfg.population;
  if (!cfg.gamma.empty()) j["gamma"] = stage_scale_to_json(cfg.gamma);
  if (!cfg.gamma_bar.empty())
    j["gamma_bar"] = stage_scale_to_json(cfg.gamma_bar);
  j["seed"] = cfg.seed;
  return j;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = spec_to_json(cfg.spec);
  if (cfg.teams.has_value()) j["teams"] = teams_to_json(*cfg.teams);
  j["learner"] = learner_to_json(cfg.learner);
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  if (!cfg.eta_grid.empty()) j["eta_grid"] = cfg.eta_grid;
  if (!cfg.nb_grid.empty()) j["nb_grid"] = cfg.nb_grid;
  if (!cfg.m_grid.empty()) j["m_grid"] = cfg.m_grid;
  if (!cfg.runs_per_m.empty()) j["runs_per_m"] = cfg.runs_per_m;
  if (!cfg.gamma_scales.empty()) j["gamma_scales"] = cfg.gamma_scales;
  return j;
}

json profile_to_json(const PolicyProfile& profile) {
  json j;
  j["k"] = player_seq_to_json(profile.k);
  j["k_bar"] = player_seq_to_json(profile.k_bar);
  return j;
}

PolicyProfile profile_from_json(const json& j) {
  PolicyProfile profile;
  profile.k = player_seq_from_json(member(j, "k", "profile"), "profile.k");
  profile.k_bar =
      player_seq_from_json(member(j, "k_bar", "profile"), "profile.k_bar");
  return profile;
}

json solution_to_json(const RiccatiSolution& sol) {
  json j;
  j["gains"] = profile_to_json(sol.gains);
  j["z"] = player_seq_to_json(sol.z);
  j["z_bar"] = player_seq_to_json(sol.z_bar);
  j["f"] = seq_to_json(sol.f);
  j["f_bar"] = seq_to_json(sol.f_bar);
  j["phi_rcond"] = sol.phi_rcond;
  j["phi_bar_rcond"] = sol.phi_bar_rcond;
  return j;
}

json olne_to_json(const OlneSolution& sol) {
  json j;
  j["l"] = player_seq_to_json(sol.l);
  j["l_bar"] = player_seq_to_json(sol.l_bar);
  j["p"] = player_seq_to_json(sol.p);
  j["p_bar"] = player_seq_to_json(sol.p_bar);
  j["gains"] = profile_to_json(sol.gains);
  return j;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace mftg
