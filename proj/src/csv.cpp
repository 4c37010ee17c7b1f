#include "mftg/csv.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace mftg {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(const std::string& path, const RunTrace& trace) {
  auto out = open_out(path);
  out << "phase_t,iter_k,player,err_k,err_kbar,cost_y,cost_xbar,grad_norm,"
         "wall_ms\n";
  for (const TraceRow& row : trace.rows) {
    out << row.phase_t << ',' << row.iter_k << ',' << row.player << ','
        << format_double(row.err_k) << ',' << format_double(row.err_kbar)
        << ',' << format_double(row.cost_y) << ','
        << format_double(row.cost_xbar) << ',' << format_double(row.grad_norm)
        << ',' << format_double(row.wall_ms) << '\n';
  }
  finish(out, path);
}

void write_eps_table_csv(const std::string& path, const EpsNashTable& table) {
  auto out = open_out(path);
  out << "population,player,gap,stderr,slope\n";
  for (const EpsNashRow& row : table.rows) {
    for (size_t i = 0; i < row.gap.size(); ++i) {
      const double slope =
          i < table.slope.size() ? table.slope[i]
                                 : std::numeric_limits<double>::quiet_NaN();
      out << row.population << ',' << i << ',' << format_double(row.gap[i])
          << ',' << format_double(row.se[i]) << ',' << format_double(slope)
          << '\n';
    }
  }
  finish(out, path);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          int run_id) {
  auto out = open_out(path);
  const int n = static_cast<int>(traj.xbar.rows());
  out << "run_id,t,agent";
  for (int d = 0; d < n; ++d) out << ",x" << d;
  out << '\n';
  for (int t = 0; t <= traj.horizon(); ++t) {
    out << run_id << ',' << t << ",-1";
    for (int d = 0; d < n; ++d) out << ',' << format_double(traj.xbar(d, t));
    out << '\n';
    for (Eigen::Index j = 0; j < traj.x[t].cols(); ++j) {
      out << run_id << ',' << t << ',' << j;
      for (int d = 0; d < n; ++d)
        out << ',' << format_double(traj.x[t](d, j));
      out << '\n';
    }
  }
  finish(out, path);
}

void write_margins_csv(const std::string& path, const DiagDomReport& report) {
  auto out = open_out(path);
  out << "branch,player,t,margin\n";
  auto dump = [&](const char* name,
                  const std::vector<std::vector<double>>& margins) {
    for (size_t i = 0; i < margins.size(); ++i)
      for (size_t t = 0; t < margins[i].size(); ++t)
        out << name << ',' << i << ',' << t << ','
            << format_double(margins[i][t]) << '\n';
  };
  dump("deviation", report.margin_y);
  dump("mean_field", report.margin_xbar);
  finish(out, path);
}

}  // namespace mftg
