#pragma once

#include <stdexcept>
#include <string>

#include "mftg/game.hpp"

namespace mftg {

// Implicit costate recursion at some timestep failed to converge under the
// damped fixed-point fallback.
struct FixedPointDiverged : std::runtime_error {
  explicit FixedPointDiverged(int t_)
      : std::runtime_error("costate fixed point diverged at t=" +
                           std::to_string(t_)),
        t(t_) {}
  int t;
};

// Open-loop Nash equilibrium in feedback representation:
//   u^i_t = -G^i_t (x - xbar) - Gbar^i_t xbar
// with G^i_t = L^i_t P^i_t and Gbar^i_t = (L^i_t + Lbar^i_t) Pbar^i_t, where
//   L^i_t = 1/2 (R^i_t)^{-1} (B^i_t)'
//   Lbar^i_t = 1/2 ((Rbar^i_t)^{-1} (B^i_t + Bbar^i_t)' - (R^i_t)^{-1} (B^i_t)')
// and P, Pbar solve the implicit backward recursions
//   P^i_t = (A_t' P^i_{t+1} + 2 Q^i_t)(A_t - sum_j B^j_t L^j_t P^j_t)
//   Pbar^i_t = (Atil_t' Pbar^i_{t+1} + 2 Qbar^i_t)
//              (Atil_t - sum_j Btil^j_t (L^j_t + Lbar^j_t) Pbar^j_t)
// with P^i_T = Pbar^i_T = 0.
struct OlneSolution {
  PlayerMatSeq l;      // l[i][t], t < T
  PlayerMatSeq l_bar;
  PlayerMatSeq p;      // p[i][t], t = 0..T
  PlayerMatSeq p_bar;
  PolicyProfile gains;  // k = G, k_bar = Gbar
};

OlneSolution solve_olne(const JointModel& model);

// Max Frobenius norm of P^i_t minus its defining right-hand side over all
// players and timesteps, per branch.
double olne_residual(const JointModel& model, const OlneSolution& sol,
                     Branch br);

}  // namespace mftg
