#include "aitsahalia/csv.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace aitsahalia::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_convergence(const ConvergenceReport& report, std::ostream& out) {
  out << "scheme,h,e_h,seconds,violations\n";
  for (const auto& row : report.rows) {
    out << to_string(row.scheme) << ',' << format_double(row.h) << ',' << format_double(row.e_h) << ','
        << format_double(row.seconds) << ',' << row.violations << '\n';
  }
}

void write_paths_header(std::ostream& out) { out << "path,t,y,scheme,status\n"; }

void write_path(const Trajectory<double>& traj, long path, double h, SchemeKind scheme, std::ostream& out) {
  for (Eigen::Index n = 0; n < traj.states.size(); ++n) {
    const StepStatus status = n == 0 ? StepStatus::Ok : traj.statuses[static_cast<std::size_t>(n - 1)];
    out << path << ',' << format_double(static_cast<double>(n) * h) << ',' << format_double(traj.states(n))
        << ',' << to_string(scheme) << ',' << to_string(status) << '\n';
  }
}

void write_assumptions(const AssumptionReport& r, std::ostream& out) {
  out << "h,alpha,grid,gamma_used,gamma_required,a31_f_margin,a31_g_margin,a32_sup,a32_bound,"
         "a32_margin,a33_f_margin,a33_g_margin,m1,m2,exponent_condition_ok,pass\n";
  out << format_double(r.h) << ',' << format_double(r.alpha) << ',' << r.grid.describe() << ','
      << format_double(r.gamma_used) << ',' << format_double(r.gamma_required) << ','
      << format_double(r.a31_f_margin) << ',' << format_double(r.a31_g_margin) << ','
      << format_double(r.a32_sup) << ',' << format_double(r.a32_bound) << ',' << format_double(r.a32_margin)
      << ',' << format_double(r.a33_f_margin) << ',' << format_double(r.a33_g_margin) << ','
      << format_double(r.m1) << ',' << format_double(r.m2) << ',' << (r.exponent_condition_ok ? 1 : 0) << ','
      << (r.pass ? 1 : 0) << '\n';
}

void write_moments(const MomentReport& report, std::ostream& out) {
  out << "scheme,p,h,sup_moment,censored,inverse\n";
  for (const auto& row : report.rows) {
    out << to_string(report.scheme) << ',' << format_double(row.p) << ',' << format_double(row.h) << ','
        << format_double(row.sup_moment) << ',' << row.censored << ',' << (report.inverse ? 1 : 0) << '\n';
  }
}

void write_mlmc_levels(const MlmcResult& result, std::ostream& out) {
  out << "level,samples,mean,variance,cost\n";
  for (const auto& lvl : result.levels) {
    const double steps = std::ldexp(1.0, lvl.level);
    const double cost = &lvl == &result.levels.front() ? steps : 1.5 * steps;
    out << lvl.level << ',' << lvl.samples << ',' << format_double(lvl.mean()) << ','
        << format_double(lvl.variance()) << ',' << format_double(cost) << '\n';
  }
}

void write_mlmc_summary(const MlmcResult& result, std::ostream& out) {
  out << "payoff,estimate,std_error,bias_sq,target_rmse,finest_level\n";
  out << result.payoff_id << ',' << format_double(result.estimate) << ',' << format_double(result.std_error())
      << ',' << format_double(result.bias_sq) << ',' << format_double(result.target_rmse) << ','
      << (result.levels.empty() ? 0 : result.levels.back().level) << '\n';
}

}  // namespace aitsahalia::csv
