#pragma once

// CSV artifacts. UTF-8, LF line endings, mandatory header row, floats with
// 17 significant digits.

#include <iosfwd>
#include <string>

#include "aitsahalia/montecarlo.hpp"
#include "aitsahalia/schemes.hpp"
#include "aitsahalia/taming.hpp"

namespace aitsahalia::csv {

std::string format_double(double v);

// scheme,h,e_h,seconds,violations
void write_convergence(const ConvergenceReport& report, std::ostream& out);

// path,t,y,scheme,status   (status is the step status that produced y)
void write_paths_header(std::ostream& out);
void write_path(const Trajectory<double>& traj, long path, double h, SchemeKind scheme, std::ostream& out);

// h,alpha,grid,gamma_used,gamma_required,a31_f_margin,a31_g_margin,a32_sup,a32_bound,
// a32_margin,a33_f_margin,a33_g_margin,m1,m2,exponent_condition_ok,pass
void write_assumptions(const AssumptionReport& report, std::ostream& out);

// scheme,p,h,sup_moment,censored,inverse
void write_moments(const MomentReport& report, std::ostream& out);

// level,samples,mean,variance,cost
void write_mlmc_levels(const MlmcResult& result, std::ostream& out);
// payoff,estimate,std_error,bias_sq,target_rmse,finest_level
void write_mlmc_summary(const MlmcResult& result, std::ostream& out);

}  // namespace aitsahalia::csv
