#pragma once

#include <string>

#include "mftg/learner.hpp"
#include "mftg/riccati.hpp"
#include "mftg/simulate.hpp"

namespace mftg {

// All writers emit a header row and format doubles with %.17g, so identical
// inputs produce byte-identical files.

// phase_t,iter_k,player,err_k,err_kbar,cost_y,cost_xbar,grad_norm,wall_ms
void write_trace_csv(const std::string& path, const RunTrace& trace);

// population,player,gap,stderr,slope (slope repeated per player row)
void write_eps_table_csv(const std::string& path, const EpsNashTable& table);

// run_id,t,agent,x0..x{n-1} plus agent=-1 rows carrying the mean field
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          int run_id = 0);

// branch,player,t,margin
void write_margins_csv(const std::string& path, const DiagDomReport& report);

std::string format_double(double v);

}  // namespace mftg
