#include "mftg/game.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mftg {

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.where << ": " << v.reason << "\n";
  return os.str();
}

namespace {

void check_seq(std::vector<Violation>* out, const std::string& name,
               const MatSeq& seq, size_t len, int rows, int cols) {
  if (seq.size() != len) {
    out->push_back({name, "expected " + std::to_string(len) + " timesteps, got " +
                              std::to_string(seq.size())});
    return;
  }
  for (size_t t = 0; t < seq.size(); ++t) {
    if (seq[t].rows() != rows || seq[t].cols() != cols) {
      out->push_back({name + "[" + std::to_string(t) + "]",
                      "expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", got " + std::to_string(seq[t].rows()) + "x" +
                          std::to_string(seq[t].cols())});
    }
  }
}

void check_psd_seq(std::vector<Violation>* out, const std::string& name,
                   const MatSeq& seq) {
  for (size_t t = 0; t < seq.size(); ++t) {
    const std::string where = name + "[" + std::to_string(t) + "]";
    if (!is_symmetric(seq[t]))
      out->push_back({where, "not symmetric"});
    else if (!is_psd(seq[t]))
      out->push_back({where, "not positive semidefinite"});
  }
}

void check_pd_seq(std::vector<Violation>* out, const std::string& name,
                  const MatSeq& seq) {
  for (size_t t = 0; t < seq.size(); ++t) {
    const std::string where = name + "[" + std::to_string(t) + "]";
    if (!is_symmetric(seq[t]))
      out->push_back({where, "not symmetric"});
    else if (!is_pd(seq[t]))
      out->push_back({where, "not positive definite"});
  }
}

}  // namespace

ValidationReport validate_spec(const GameSpec& spec) {
  ValidationReport report;
  auto* out = &report.violations;

  if (spec.num_players < 1) out->push_back({"num_players", "must be >= 1"});
  if (spec.horizon < 1) out->push_back({"horizon", "must be >= 1"});
  if (spec.state_dim < 1) out->push_back({"state_dim", "must be >= 1"});
  if (static_cast<int>(spec.control_dims.size()) != spec.num_players)
    out->push_back({"control_dims", "length must equal num_players"});
  for (size_t i = 0; i < spec.control_dims.size(); ++i) {
    if (spec.control_dims[i] < 1)
      out->push_back({"control_dims[" + std::to_string(i) + "]", "must be >= 1"});
  }
  if (!report.ok()) return report;

  const int N = spec.num_players;
  const size_t T = static_cast<size_t>(spec.horizon);
  const int n = spec.state_dim;

  check_seq(out, "a", spec.a, T, n, n);
  check_seq(out, "a_bar", spec.a_bar, T, n, n);
  auto check_player = [&](const std::string& name, const PlayerMatSeq& pm,
                          size_t len, bool square_control) {
    if (static_cast<int>(pm.size()) != N) {
      out->push_back({name, "expected one entry per player"});
      return;
    }
    for (int i = 0; i < N; ++i) {
      const int p = spec.control_dims[i];
      const int rows = square_control ? p : n;
      const int cols = p;
      check_seq(out, name + "[" + std::to_string(i) + "]", pm[i], len,
                square_control ? rows : n, square_control ? cols : (name[0] == 'b' ? p : n));
    }
  };
  // Shapes: b fields are n x p_i, q fields n x n, r fields p_i x p_i.
  if (static_cast<int>(spec.b.size()) != N)
    out->push_back({"b", "expected one entry per player"});
  if (static_cast<int>(spec.b_bar.size()) != N)
    out->push_back({"b_bar", "expected one entry per player"});
  if (static_cast<int>(spec.q.size()) != N)
    out->push_back({"q", "expected one entry per player"});
  if (static_cast<int>(spec.q_bar.size()) != N)
    out->push_back({"q_bar", "expected one entry per player"});
  if (static_cast<int>(spec.r.size()) != N)
    out->push_back({"r", "expected one entry per player"});
  if (static_cast<int>(spec.r_bar.size()) != N)
    out->push_back({"r_bar", "expected one entry per player"});
  if (!report.ok()) return report;
  (void)check_player;

  for (int i = 0; i < N; ++i) {
    const std::string si = "[" + std::to_string(i) + "]";
    const int p = spec.control_dims[i];
    check_seq(out, "b" + si, spec.b[i], T, n, p);
    check_seq(out, "b_bar" + si, spec.b_bar[i], T, n, p);
    check_seq(out, "q" + si, spec.q[i], T + 1, n, n);
    check_seq(out, "q_bar" + si, spec.q_bar[i], T + 1, n, n);
    check_seq(out, "r" + si, spec.r[i], T, p, p);
    check_seq(out, "r_bar" + si, spec.r_bar[i], T, p, p);
  }
  if (spec.sigma.rows() != n || spec.sigma.cols() != n)
    out->push_back({"sigma", "expected " + std::to_string(n) + "x" + std::to_string(n)});
  if (spec.sigma0.rows() != n || spec.sigma0.cols() != n)
    out->push_back({"sigma0", "expected " + std::to_string(n) + "x" + std::to_string(n)});
  if (!report.ok()) return report;

  for (int i = 0; i < N; ++i) {
    const std::string si = "[" + std::to_string(i) + "]";
    check_psd_seq(out, "q" + si, spec.q[i]);
    check_psd_seq(out, "q_bar" + si, spec.q_bar[i]);
    check_pd_seq(out, "r" + si, spec.r[i]);
    check_pd_seq(out, "r_bar" + si, spec.r_bar[i]);
  }
  if (!is_symmetric(spec.sigma))
    out->push_back({"sigma", "not symmetric"});
  else if (!is_psd(spec.sigma))
    out->push_back({"sigma", "not positive semidefinite"});
  if (!is_symmetric(spec.sigma0))
    out->push_back({"sigma0", "not symmetric"});
  else if (!is_psd(spec.sigma0))
    out->push_back({"sigma0", "not positive semidefinite"});
  return report;
}

namespace {

int total_team_dim(const TeamSpec& teams) {
  return teams.num_teams * teams.team_state_dim;
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

GameSpec assemble_joint(const TeamSpec& teams) {
  const int N = teams.num_teams;
  const int m = teams.team_state_dim;
  const size_t T = static_cast<size_t>(teams.horizon);
  require(N >= 1 && m >= 1 && teams.horizon >= 1, "teams: bad dimensions");
  require(static_cast<int>(teams.control_dims.size()) == N, "teams: control_dims size");
  require(static_cast<int>(teams.agent_counts.size()) == N, "teams: agent_counts size");
  require(static_cast<int>(teams.a.size()) == N && static_cast<int>(teams.b.size()) == N,
          "teams: per-team matrix lists must have one entry per team");

  const int n = total_team_dim(teams);
  GameSpec spec;
  spec.num_players = N;
  spec.horizon = teams.horizon;
  spec.state_dim = n;
  spec.control_dims = teams.control_dims;

  spec.a.assign(T, Mat::Zero(n, n));
  spec.a_bar.assign(T, Mat::Zero(n, n));
  for (int i = 0; i < N; ++i) {
    require(teams.a[i].size() == T && teams.a_bar[i].size() == T, "teams: a length");
    for (size_t t = 0; t < T; ++t) {
      require(teams.a[i][t].rows() == m && teams.a[i][t].cols() == m, "teams: a shape");
      spec.a[t].block(i * m, i * m, m, m) = teams.a[i][t];
      spec.a_bar[t].block(i * m, i * m, m, m) = teams.a_bar[i][t];
    }
  }

  spec.b.resize(N);
  spec.b_bar.resize(N);
  for (int k = 0; k < N; ++k) {
    const int p = teams.control_dims[k];
    spec.b[k].assign(T, Mat::Zero(n, p));
    spec.b_bar[k].assign(T, Mat::Zero(n, p));
    for (int i = 0; i < N; ++i) {
      require(static_cast<int>(teams.b[i].size()) == N, "teams: b inner size");
      require(teams.b[i][k].size() == T, "teams: b length");
      for (size_t t = 0; t < T; ++t) {
        require(teams.b[i][k][t].rows() == m && teams.b[i][k][t].cols() == p,
                "teams: b shape");
        spec.b[k][t].block(i * m, 0, m, p) = teams.b[i][k][t];
        spec.b_bar[k][t].block(i * m, 0, m, p) = teams.b_bar[i][k][t];
      }
    }
  }

  spec.q.resize(N);
  spec.q_bar.resize(N);
  spec.r = teams.r;
  spec.r_bar = teams.r_bar;
  for (int i = 0; i < N; ++i) {
    require(teams.q[i].size() == T + 1 && teams.q_bar[i].size() == T + 1,
            "teams: q length must be horizon + 1");
    spec.q[i].assign(T + 1, Mat::Zero(n, n));
    spec.q_bar[i].assign(T + 1, Mat::Zero(n, n));
    for (size_t t = 0; t <= T; ++t) {
      spec.q[i][t].block(i * m, i * m, m, m) = teams.q[i][t];
      spec.q_bar[i][t].block(i * m, i * m, m, m) = teams.q_bar[i][t];
    }
  }

  spec.sigma = Mat::Zero(n, n);
  require(static_cast<int>(teams.sigma.size()) == N, "teams: sigma size");
  for (int i = 0; i < N; ++i)
    spec.sigma.block(i * m, i * m, m, m) = teams.sigma[i];
  spec.sigma0 = teams.sigma0;
  require(spec.sigma0.rows() == n && spec.sigma0.cols() == n, "teams: sigma0 shape");
  return spec;
}

TeamSpec extract_teams(const GameSpec& spec, int team_state_dim,
                       const std::vector<int>& agent_counts) {
  const int m = team_state_dim;
  const int N = spec.num_players;
  require(m >= 1 && N * m == spec.state_dim,
          "extract_teams: state_dim must equal num_players * team_state_dim");
  const size_t T = static_cast<size_t>(spec.horizon);

  TeamSpec teams;
  teams.num_teams = N;
  teams.horizon = spec.horizon;
  teams.team_state_dim = m;
  teams.control_dims = spec.control_dims;
  teams.agent_counts = agent_counts;

  teams.a.resize(N);
  teams.a_bar.resize(N);
  teams.b.resize(N);
  teams.b_bar.resize(N);
  teams.q.resize(N);
  teams.q_bar.resize(N);
  teams.sigma.resize(N);
  teams.r = spec.r;
  teams.r_bar = spec.r_bar;
  for (int i = 0; i < N; ++i) {
    teams.a[i].resize(T);
    teams.a_bar[i].resize(T);
    teams.q[i].resize(T + 1);
    teams.q_bar[i].resize(T + 1);
    teams.b[i].resize(N);
    teams.b_bar[i].resize(N);
    for (size_t t = 0; t < T; ++t) {
      teams.a[i][t] = spec.a[t].block(i * m, i * m, m, m);
      teams.a_bar[i][t] = spec.a_bar[t].block(i * m, i * m, m, m);
    }
    for (size_t t = 0; t <= T; ++t) {
      teams.q[i][t] = spec.q[i][t].block(i * m, i * m, m, m);
      teams.q_bar[i][t] = spec.q_bar[i][t].block(i * m, i * m, m, m);
    }
    for (int k = 0; k < N; ++k) {
      const int p = spec.control_dims[k];
      teams.b[i][k].resize(T);
      teams.b_bar[i][k].resize(T);
      for (size_t t = 0; t < T; ++t) {
        teams.b[i][k][t] = spec.b[k][t].block(i * m, 0, m, p);
        teams.b_bar[i][k][t] = spec.b_bar[k][t].block(i * m, 0, m, p);
      }
    }
    teams.sigma[i] = spec.sigma.block(i * m, i * m, m, m);
  }
  teams.sigma0 = spec.sigma0;
  return teams;
}

JointModel derive_joint_model(const GameSpec& spec) {
  const ValidationReport report = validate_spec(spec);
  if (!report.ok())
    throw std::invalid_argument("invalid game spec:\n" + report.to_string());

  JointModel model;
  model.spec = spec;
  const size_t T = static_cast<size_t>(spec.horizon);
  model.a_tilde.resize(T);
  for (size_t t = 0; t < T; ++t) model.a_tilde[t] = spec.a[t] + spec.a_bar[t];
  model.b_tilde.resize(spec.num_players);
  for (int i = 0; i < spec.num_players; ++i) {
    model.b_tilde[i].resize(T);
    for (size_t t = 0; t < T; ++t)
      model.b_tilde[i][t] = spec.b[i][t] + spec.b_bar[i][t];
  }
  return model;
}

PolicyProfile PolicyProfile::zeros(const JointModel& model) {
  PolicyProfile profile;
  const int N = model.players();
  const int T = model.horizon();
  profile.k.resize(N);
  profile.k_bar.resize(N);
  for (int i = 0; i < N; ++i) {
    profile.k[i].assign(T, Mat::Zero(model.p(i), model.n()));
    profile.k_bar[i].assign(T, Mat::Zero(model.p(i), model.n()));
  }
  return profile;
}

bool PolicyProfile::finite() const {
  for (const auto* fam : {&k, &k_bar})
    for (const auto& seq : *fam)
      for (const auto& m : seq)
        if (!m.allFinite()) return false;
  return true;
}

Mat closed_loop(const JointModel& model, const PolicyProfile& profile, int t,
                Branch br) {
  Mat l = model.a(t, br);
  for (int i = 0; i < model.players(); ++i)
    l -= model.b(i, t, br) * profile.gain(i, t, br);
  return l;
}

double max_gain_distance(const PolicyProfile& a, const PolicyProfile& b,
                         Branch br) {
  const auto& fa = br == Branch::kDeviation ? a.k : a.k_bar;
  const auto& fb = br == Branch::kDeviation ? b.k : b.k_bar;
  double worst = 0.0;
  for (size_t i = 0; i < fa.size(); ++i)
    for (size_t t = 0; t < fa[i].size(); ++t)
      worst = std::max(worst, (fa[i][t] - fb[i][t]).norm());
  return worst;
}

}  // namespace mftg
