#pragma once

#include <string>
#include <vector>

#include "mftg/types.hpp"

namespace mftg {

// Which half of the decoupled problem an operation works on: the deviation
// process y = x - xbar (matrices A, B, Q, R, Sigma) or the mean-field process
// xbar (matrices Atilde, Btilde, Qbar, Rbar, Sigma0).
enum class Branch { kDeviation, kMeanField };

inline const char* branch_name(Branch br) {
  return br == Branch::kDeviation ? "deviation" : "mean_field";
}

struct GameSpec {
  int num_players = 0;             // N
  int horizon = 0;                 // T; controls act on t = 0..T-1, states reach t = T
  int state_dim = 0;               // n, joint state dimension
  std::vector<int> control_dims;   // p_i

  MatSeq a;             // A_t, n x n, length T
  MatSeq a_bar;         // Abar_t, n x n, length T
  PlayerMatSeq b;       // B^i_t, n x p_i, length T
  PlayerMatSeq b_bar;   // Bbar^i_t
  PlayerMatSeq q;       // Q^i_t, n x n, length T+1
  PlayerMatSeq q_bar;   // Qbar^i_t, length T+1
  PlayerMatSeq r;       // R^i_t, p_i x p_i, length T
  PlayerMatSeq r_bar;   // Rbar^i_t
  Mat sigma;            // idiosyncratic noise covariance, n x n
  Mat sigma0;           // common noise covariance, n x n
};

struct Violation {
  std::string where;
  std::string reason;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

// Shape, symmetry and definiteness checks; returns every violation found.
ValidationReport validate_spec(const GameSpec& spec);

// Per-team building blocks with a uniform team state dimension m. Assembles
// into a joint GameSpec with A_t = diag(A^i_t) and Q^i_t supported on the
// (i, i) block only. b[i][k][t] holds player k's input rows into team i's
// dynamics; the cost weight r[i] is player i's own-control block.
struct TeamSpec {
  int num_teams = 0;
  int horizon = 0;
  int team_state_dim = 0;          // m
  std::vector<int> control_dims;   // p_i
  std::vector<int> agent_counts;   // M_i

  std::vector<MatSeq> a;                 // a[i][t], m x m
  std::vector<MatSeq> a_bar;
  std::vector<std::vector<MatSeq>> b;    // b[i][k][t], m x p_k
  std::vector<std::vector<MatSeq>> b_bar;
  std::vector<MatSeq> q;                 // q[i][t], m x m
  std::vector<MatSeq> q_bar;
  std::vector<MatSeq> r;                 // r[i][t], p_i x p_i
  std::vector<MatSeq> r_bar;
  std::vector<Mat> sigma;                // per-team idiosyncratic covariance, m x m
  Mat sigma0;                            // joint common covariance, n x n
};

// Throws std::invalid_argument on dimension mismatch across teams.
GameSpec assemble_joint(const TeamSpec& teams);

// Inverse of assemble_joint for block-structured specs; round-trips exactly.
TeamSpec extract_teams(const GameSpec& spec, int team_state_dim,
                       const std::vector<int>& agent_counts);

// GameSpec plus the mean-field matrices Atilde_t = A_t + Abar_t and
// Btilde^i_t = B^i_t + Bbar^i_t, precomputed for all t.
struct JointModel {
  GameSpec spec;
  MatSeq a_tilde;
  PlayerMatSeq b_tilde;

  int players() const { return spec.num_players; }
  int horizon() const { return spec.horizon; }
  int n() const { return spec.state_dim; }
  int p(int i) const { return spec.control_dims[i]; }

  const Mat& a(int t, Branch br) const {
    return br == Branch::kDeviation ? spec.a[t] : a_tilde[t];
  }
  const Mat& b(int i, int t, Branch br) const {
    return br == Branch::kDeviation ? spec.b[i][t] : b_tilde[i][t];
  }
  const Mat& q(int i, int t, Branch br) const {
    return br == Branch::kDeviation ? spec.q[i][t] : spec.q_bar[i][t];
  }
  const Mat& r(int i, int t, Branch br) const {
    return br == Branch::kDeviation ? spec.r[i][t] : spec.r_bar[i][t];
  }
  const Mat& noise_cov(Branch br) const {
    return br == Branch::kDeviation ? spec.sigma : spec.sigma0;
  }
};

// Validates and derives; throws std::invalid_argument listing the violations
// when the spec is not well-formed.
JointModel derive_joint_model(const GameSpec& spec);

// Feedback gains: u^i_t(x) = -K^i_t (x - xbar) - Kbar^i_t xbar for
// t = 0..T-1. Terminal gains are identically zero and not stored.
struct PolicyProfile {
  PlayerMatSeq k;       // K^i_t, p_i x n
  PlayerMatSeq k_bar;   // Kbar^i_t

  static PolicyProfile zeros(const JointModel& model);

  const Mat& gain(int i, int t, Branch br) const {
    return br == Branch::kDeviation ? k[i][t] : k_bar[i][t];
  }
  Mat& gain(int i, int t, Branch br) {
    return br == Branch::kDeviation ? k[i][t] : k_bar[i][t];
  }
  bool finite() const;
};

// Closed-loop transition at time t: A_t - sum_i B^i_t K^i_t (per branch).
Mat closed_loop(const JointModel& model, const PolicyProfile& profile, int t,
                Branch br);

// Max over (i, t) of the Frobenius distance between the two profiles'
// gains, per branch.
double max_gain_distance(const PolicyProfile& a, const PolicyProfile& b,
                         Branch br);

}  // namespace mftg
