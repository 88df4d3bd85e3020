// aitsahalia: simulation, convergence, assumption, moment and MLMC studies
// for the generalized Ait-Sahalia model.
//
// Exit codes: 0 success, 1 runtime failure (or a failed check), 2 invalid configuration.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "aitsahalia/config.hpp"
#include "aitsahalia/csv.hpp"
#include "aitsahalia/montecarlo.hpp"
#include "aitsahalia/noise.hpp"
#include "aitsahalia/taming.hpp"

namespace fs = std::filesystem;
using namespace aitsahalia;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;

// Raw flag values; only those actually given override the config file.
struct Flags {
  std::string config;
  std::string preset;
  std::string scheme;
  std::string reference;
  std::string levels;
  std::string p_list;
  std::string payoff;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long> paths;
  std::optional<int> ref_level;
  std::optional<int> h_level;
  std::optional<int> workers;
  std::optional<double> alpha;
  std::optional<double> horizon;
  std::optional<double> gamma;
  std::optional<double> strike;
  std::optional<double> rmse;
  bool inverse = false;
  bool desk = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Run configuration file");
  sub->add_option("--preset", f.preset, "Built-in model: eg1, eg2, eg3");
  sub->add_option("--scheme", f.scheme, "Scheme list, e.g. tem,bem");
  sub->add_option("--seed", f.seed, "Random seed");
  sub->add_option("--paths", f.paths, "Number of sample paths");
  sub->add_option("--levels", f.levels, "Step levels i (h = T 2^-i), e.g. 4-8 or 4,6,8");
  sub->add_option("--ref-level", f.ref_level, "Reference level for strong errors");
  sub->add_option("--alpha", f.alpha, "Taming exponent (>= 1/2)");
  sub->add_option("--horizon", f.horizon, "Time horizon T");
  sub->add_option("--out", f.out, "Output directory");
  sub->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
}

RunConfig resolve(const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) load_config_file(f.config, cfg);
  if (!f.preset.empty()) {
    cfg.preset = f.preset;
    cfg.params.reset();
  }
  if (!f.scheme.empty()) cfg.schemes = parse_schemes(f.scheme);
  if (!f.reference.empty()) cfg.reference = parse_scheme(f.reference);
  if (f.seed) cfg.seed = *f.seed;
  if (f.paths) cfg.paths = *f.paths;
  if (!f.levels.empty()) cfg.levels = parse_levels(f.levels);
  if (f.ref_level) cfg.ref_level = *f.ref_level;
  if (f.h_level) cfg.h_level = *f.h_level;
  if (f.alpha) cfg.alpha = *f.alpha;
  if (f.horizon) cfg.horizon = *f.horizon;
  if (!f.out.empty()) cfg.out = f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.gamma) cfg.gamma = *f.gamma;
  if (!f.p_list.empty()) cfg.p_list = parse_doubles(f.p_list);
  if (!f.payoff.empty()) cfg.payoff = f.payoff;
  if (f.strike) cfg.strike = *f.strike;
  if (f.rmse) cfg.target_rmse = *f.rmse;
  if (f.inverse) cfg.inverse = true;
  validate(cfg);
  return cfg;
}

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  const fs::path path = fs::path(cfg.out) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return out;
}

int cmd_simulate(const RunConfig& cfg) {
  const Params params = cfg.model();
  const auto schemes = cfg.schemes.value_or(std::vector<SchemeKind>{SchemeKind::TEM});
  const long count = cfg.paths.value_or(50);
  const int level = cfg.h_level.value_or(8);
  auto out = open_output(cfg, "paths.csv");
  csv::write_paths_header(out);
  long truncated = 0;
  for (SchemeKind scheme : schemes) {
    const auto sc = SchemeConfig<double>::uniform(scheme, cfg.horizon, 1L << level, cfg.alpha);
    for (long k = 0; k < count; ++k) {
      const auto lattice = BrownianLattice::generate(cfg.seed, static_cast<std::uint64_t>(k), cfg.horizon, level);
      const auto traj = integrate(params, sc, lattice.increments);
      if (!traj.ok()) ++truncated;
      csv::write_path(traj, k, sc.h, scheme, out);
    }
  }
  std::cout << "wrote " << (fs::path(cfg.out) / "paths.csv").string() << " (" << count << " paths per scheme, "
            << truncated << " truncated)\n";
  return kExitOk;
}

int cmd_convergence(const RunConfig& cfg, bool desk) {
  StudyConfig study;
  study.preset_id = cfg.model_id();
  study.params = cfg.model();
  study.schemes = cfg.schemes.value_or(std::vector<SchemeKind>{SchemeKind::TEM, SchemeKind::BEM});
  study.reference = cfg.reference;
  study.paths = cfg.paths.value_or(desk ? 1000 : 10000);
  study.ref_level = cfg.ref_level.value_or(desk ? 12 : 14);
  study.test_levels = cfg.levels.value_or(desk ? std::vector<int>{4, 5, 6, 7, 8}
                                               : std::vector<int>{4, 5, 6, 7, 8, 9});
  study.seed = cfg.seed;
  study.horizon = cfg.horizon;
  study.alpha = cfg.alpha;
  study.workers = cfg.workers;

  const ConvergenceReport rep = strong_error_study(study);
  auto out = open_output(cfg, "convergence.csv");
  csv::write_convergence(rep, out);
  for (const auto& s : rep.summaries) {
    if (s.fit) {
      std::cout << "scheme=" << to_string(s.scheme) << " q=" << csv::format_double(s.fit->q)
                << " resid=" << csv::format_double(s.fit->resid) << '\n';
    } else {
      std::cerr << "warning: scheme=" << to_string(s.scheme) << " has fewer than 3 usable levels; no rate fit\n";
    }
  }
  for (const auto& s : rep.summaries) {
    std::cout << "scheme=" << to_string(s.scheme) << " seconds=" << s.seconds << " violations=" << s.violations
              << '\n';
  }
  return kExitOk;
}

int cmd_check(const RunConfig& cfg) {
  const Params params = cfg.model();
  const double h = std::ldexp(cfg.horizon, -cfg.h_level.value_or(6));
  const AssumptionReport rep = check_assumptions(params, TamingConfig{cfg.alpha, cfg.horizon}, h, {}, cfg.gamma);
  auto out = open_output(cfg, "assumptions.csv");
  csv::write_assumptions(rep, out);
  csv::write_assumptions(rep, std::cout);
  std::cout << "model=" << cfg.model_id() << " regime=" << to_string(classify_regime(params, cfg.alpha).kind)
            << " h=" << h << " gamma=" << rep.gamma_used << '\n'
            << "  bounded coefficients:  " << (rep.a31_f_margin <= kAssumptionTolerance && rep.a31_g_margin <= kAssumptionTolerance ? "ok" : "FAILED") << '\n'
            << "  coupled monotonicity:  " << (rep.a32_margin <= kAssumptionTolerance ? "ok" : "FAILED")
            << " (sup " << rep.a32_sup << " <= L " << rep.a32_bound << ")\n"
            << "  modification error:    " << (rep.a33_f_margin <= kAssumptionTolerance && rep.a33_g_margin <= kAssumptionTolerance ? "ok" : "FAILED") << '\n'
            << "  exponent condition:    m1=" << rep.m1 << " m2=" << rep.m2 << " needs gamma >= "
            << rep.gamma_required << (rep.exponent_condition_ok ? " (met)" : " (not met)") << '\n'
            << (rep.pass ? "PASS" : "FAIL") << '\n';
  return rep.pass ? kExitOk : kExitFailure;
}

int cmd_moments(const RunConfig& cfg) {
  const auto schemes = cfg.schemes.value_or(std::vector<SchemeKind>{SchemeKind::TEM});
  auto out = open_output(cfg, "moments.csv");
  bool header = true;
  bool pass = true;
  for (SchemeKind scheme : schemes) {
    MomentConfig mc;
    mc.params = cfg.model();
    mc.scheme = scheme;
    mc.p_list = cfg.p_list;
    mc.h_levels = cfg.levels.value_or(std::vector<int>{4, 6, 8});
    mc.paths = cfg.paths.value_or(2000);
    mc.seed = cfg.seed;
    mc.horizon = cfg.horizon;
    mc.alpha = cfg.alpha;
    mc.workers = cfg.workers;
    mc.inverse = cfg.inverse;
    const MomentReport rep = moment_study(mc);
    std::ostringstream body;
    csv::write_moments(rep, body);
    std::string text = body.str();
    if (!header) text.erase(0, text.find('\n') + 1);
    out << text;
    header = false;
    for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
    if (rep.insufficient_samples) std::cerr << "warning: insufficient samples for " << to_string(scheme) << '\n';
    for (std::size_t i = 0; i < rep.spreads.size(); ++i) {
      std::cout << "scheme=" << to_string(scheme) << " p=" << mc.p_list[i] << " spread=" << rep.spreads[i]
                << " censored=" << rep.censored_total << '\n';
    }
    pass = pass && rep.pass;
  }
  std::cout << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kExitOk : kExitFailure;
}

int cmd_mlmc(const RunConfig& cfg) {
  MlmcConfig mc;
  mc.params = cfg.model();
  mc.scheme = cfg.schemes ? cfg.schemes->front() : SchemeKind::TEM;
  mc.payoff = parse_payoff(cfg.payoff, cfg.strike);
  mc.target_rmse = cfg.target_rmse;
  mc.seed = cfg.seed;
  mc.horizon = cfg.horizon;
  mc.alpha = cfg.alpha;
  mc.workers = cfg.workers;
  const MlmcResult res = mlmc_estimate(mc);
  auto levels = open_output(cfg, "mlmc.csv");
  csv::write_mlmc_levels(res, levels);
  auto summary = open_output(cfg, "mlmc_summary.csv");
  csv::write_mlmc_summary(res, summary);
  std::cout << "payoff=" << res.payoff_id << " estimate=" << csv::format_double(res.estimate)
            << " std_error=" << res.std_error() << " levels=" << res.levels.front().level << ".."
            << res.levels.back().level << '\n';
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveCoefficient:
    case ErrorCode::ExponentOutOfRange:
    case ErrorCode::InadmissibleRegime:
    case ErrorCode::StepTooLarge:
    case ErrorCode::LevelTooDeep:
    case ErrorCode::LevelMismatch:
    case ErrorCode::RefNotFiner:
    case ErrorCode::InvalidConfig:
      return kExitInvalid;
    default:
      return kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positivity-preserving tamed Euler schemes for the generalized Ait-Sahalia model"};
  app.require_subcommand(1);
  Flags f;

  auto* simulate = app.add_subcommand("simulate", "Export sample paths to paths.csv");
  add_common(simulate, f);
  simulate->add_option("--h-level", f.h_level, "Step level i, h = T 2^-i (default 8)");

  auto* convergence = app.add_subcommand("convergence", "Strong-error study to convergence.csv");
  add_common(convergence, f);
  convergence->add_option("--reference", f.reference, "Reference scheme (default bem)");
  convergence->add_flag("--desk", f.desk, "Desk-scale protocol: 1000 paths, reference 12, levels 4-8");

  auto* check = app.add_subcommand("check-assumptions", "Grid check of the taming bounds");
  add_common(check, f);
  check->add_option("--h-level", f.h_level, "Step level i, h = T 2^-i (default 6)");
  check->add_option("--gamma", f.gamma, "Monotonicity constant gamma");

  auto* moments = app.add_subcommand("moments", "Empirical moment stability to moments.csv");
  add_common(moments, f);
  moments->add_option("--p", f.p_list, "Moment orders, e.g. 2,4");
  moments->add_flag("--inverse", f.inverse, "Inverse moments E|Y|^-p");

  auto* mlmc = app.add_subcommand("mlmc", "Multilevel Monte Carlo estimate to mlmc.csv");
  add_common(mlmc, f);
  mlmc->add_option("--payoff", f.payoff, "identity, call or digital");
  mlmc->add_option("--strike", f.strike, "Strike for call/digital payoffs");
  mlmc->add_option("--rmse", f.rmse, "Target root-mean-square error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    const RunConfig cfg = resolve(f);
    if (*simulate) return cmd_simulate(cfg);
    if (*convergence) return cmd_convergence(cfg, f.desk);
    if (*check) return cmd_check(cfg);
    if (*moments) return cmd_moments(cfg);
    if (*mlmc) return cmd_mlmc(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
