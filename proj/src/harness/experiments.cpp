#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <sstream>
#include <thread>

#include "artifacts.hpp"
#include "diagnostics.hpp"
#include "ensemble.hpp"
#include "error.hpp"
#include "initial_data.hpp"
#include "norms.hpp"
#include "observables.hpp"
#include "scattering.hpp"
#include "snapshot_io.hpp"
#include "spectral.hpp"

#ifndef NLSLAB_VERSION
#define NLSLAB_VERSION "0.0.0"
#endif

namespace nlslab {

std::shared_ptr<const Trajectory> TrajectoryCache::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (!trajectory_ || key != key_) return nullptr;
  ++hits_;
  return trajectory_;
}

void TrajectoryCache::store(const std::string& key, std::shared_ptr<const Trajectory> trajectory) {
  std::lock_guard lock(mutex_);
  key_ = key;
  trajectory_ = std::move(trajectory);
}

std::size_t TrajectoryCache::hits() const {
  std::lock_guard lock(mutex_);
  return hits_;
}

std::string code_version() { return NLSLAB_VERSION; }

namespace {

using json = nlohmann::json;

json fit_json(const DecayFit& f) {
  return {{"exponent", f.exponent},
          {"log_constant", f.log_constant},
          {"constant", std::exp(f.log_constant)},
          {"r_squared", f.r_squared},
          {"window", {f.window.t_min, f.window.t_max}},
          {"samples", f.samples}};
}

// Replaces infinities, which JSON cannot carry, by strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_lock;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> g(failure_lock);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool is_3d_schrodinger(const ModelSpec& m, const Grid& g) { return m.symbol == SymbolKind::schrodinger && g.dim() == 3; }

class Run {
 public:
  Run(const ExperimentConfig& cfg, const RunOptions& opt) : cfg(cfg), opt(opt) {
    res.run_id = run_id(cfg);
    res.directory = (std::filesystem::path(cfg.text("output.dir")) / res.run_id).string();
    std::filesystem::create_directories(res.directory);
  }

  const ExperimentConfig& cfg;
  RunOptions opt;
  RunResult res;
  json fits = json::object();
  json extra = json::object();

  void verdict(const std::string& name, double measured, double lo, double hi, const std::string& note = "") {
    const bool pass = std::isfinite(measured) && measured >= lo && measured <= hi;
    res.verdicts.push_back({name, measured, lo, hi, pass, false, note});
  }
  void info(const std::string& name, double measured, const std::string& note = "") {
    res.verdicts.push_back({name, measured, -INFINITY, INFINITY, true, true, note});
  }
  void metric(const std::string& name, double v) { res.metrics[name] = v; }
  void row(std::string group, std::string quantity, std::string claimed, double measured, FitWindow w, double constant,
           const std::string& verdict_name) {
    std::string v = "info";
    for (const auto& x : res.verdicts)
      if (x.name == verdict_name && !x.informational) v = x.pass ? "pass" : "fail";
    res.rows.push_back({std::move(group), std::move(quantity), std::move(claimed), measured, w.t_min, w.t_max, constant, v});
  }
  void write(const std::string& name, const std::string& content) {
    write_file_atomic((std::filesystem::path(res.directory) / name).string(), content);
    res.artifacts.push_back(name);
  }
  void warn(const std::vector<std::string>& w) { res.warnings.insert(res.warnings.end(), w.begin(), w.end()); }

  ObserverOptions observer_options(bool pc) const {
    ObserverOptions o;
    o.stride = static_cast<std::size_t>(cfg.integer("observe.stride"));
    o.pseudoconformal = pc || cfg.flag("observe.pc");
    o.pc_stride = static_cast<std::size_t>(cfg.integer("observe.pc_stride"));
    return o;
  }

  const Trajectory& simulate(const ComplexField& u0, bool pc = false, const std::string& csv = "trajectory.csv") {
    const auto obs = observer_options(pc);
    std::string key;
    for (const auto& [k, v] : cfg.values())
      if (k.starts_with("grid.") || k.starts_with("model.") || k.starts_with("solver.") || k.starts_with("data."))
        key += k + "=" + v + "\n";
    key += "observe=" + std::to_string(obs.stride) + "," + std::to_string(obs.pseudoconformal) + "," +
           std::to_string(obs.pc_stride);
    if (opt.cache) sim = opt.cache->find(key);
    if (!sim) {
      sim = std::make_shared<const Trajectory>(evolve(u0, cfg.model(), cfg.solver(), standard_observers(obs)));
      if (opt.cache) opt.cache->store(key, sim);
    }
    const Trajectory& traj = *sim;
    warn(traj.warnings);
    res.validity_horizon = traj.validity_horizon;
    metric("validity_horizon", traj.validity_horizon);
    write(csv, trajectory_table(traj.series, traj.validity_horizon).str());
    if (cfg.flag("output.snapshots")) {
      const auto path = (std::filesystem::path(res.directory) / "snapshots.bin").string();
      write_snapshots(path, traj, cfg.unsigned_integer("seed"));
      res.artifacts.push_back("snapshots.bin");
    }
    return traj;
  }

 private:
  std::shared_ptr<const Trajectory> sim;

 public:

  FitWindow window(double horizon) const {
    return {cfg.real("fit.t_min"), std::min(cfg.real("fit.t_max"), horizon)};
  }
};

// Positive-time samples of a series restricted to (0, horizon].
std::vector<double> envelope_values(const ObservableSeries& linf, double horizon) {
  const auto env = decay_envelope(linf);
  std::vector<double> out;
  for (std::size_t i = 0; i < env.times.size(); ++i)
    if (env.times[i] > 0.0 && env.times[i] <= horizon) out.push_back(env.values[i]);
  return out;
}

double expected_linear_exponent(const ModelSpec& m, int dim, double p) {
  const double order = m.symbol == SymbolKind::biharmonic ? 4.0 : 2.0;
  const double inv = std::isinf(p) ? 0.0 : 1.0 / p;
  return dim * (0.5 - inv) * 2.0 / order;
}

void run_linear_decay(Run& run) {
  const auto& cfg = run.cfg;
  const ModelSpec model = cfg.model();
  const auto u0 = make_initial_data(cfg);
  const Grid& g = u0.grid();
  const double sdt = cfg.real("linear.sample_dt");
  const auto count = static_cast<std::size_t>(std::floor(cfg.real("linear.t_end") / sdt + 1e-9));
  const auto ps = cfg.reals("linear.p");
  const auto spec0 = to_spectral(u0);
  const double shell_fraction = cfg.real("solver.shell_fraction");
  const double shell_tol = cfg.real("solver.shell_tol");

  std::vector<double> times(count + 1);
  for (std::size_t k = 0; k <= count; ++k) times[k] = static_cast<double>(k) * sdt;
  std::vector<std::map<std::string, double>> rows(times.size());
  std::vector<std::vector<double>> lp(times.size(), std::vector<double>(ps.size()));
  std::vector<double> shell(times.size());
  parallel_for(times.size(), run.opt.jobs, [&](std::size_t k) {
    const auto spec = free_evolve(spec0, times[k], model);
    const auto u = to_physical(spec);
    const StepState state{times[k], k, u, spec, model};
    for (const auto& obs : standard_observers(run.observer_options(false))) rows[k][obs.name] = obs.evaluate(state);
    for (std::size_t j = 0; j < ps.size(); ++j) lp[k][j] = lp_norm(u, ps[j]);
    shell[k] = boundary_shell_mass_fraction(u, shell_fraction);
  });

  double horizon = times.back();
  std::size_t flagged = 0;
  bool found = false;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!found && shell[k] > shell_tol) {
      horizon = times[k] == 0.0 ? 0.0 : times[k];
      found = true;
    }
    if (found && times[k] > horizon) ++flagged;
  }
  run.res.validity_horizon = horizon;
  run.metric("validity_horizon", horizon);
  run.metric("samples_past_horizon", static_cast<double>(flagged));
  if (found) run.warn({"samples past the validity horizon are flagged and excluded from the fits"});

  std::map<std::string, ObservableSeries> series;
  for (std::size_t k = 0; k < times.size(); ++k)
    for (const auto& [name, v] : rows[k]) {
      series[name].name = name;
      series[name].push(times[k], v);
    }
  run.write("trajectory.csv", trajectory_table(series, horizon).str());

  const FitWindow w = run.window(horizon);
  std::vector<PlotLine> lines;
  const bool schr = model.symbol == SymbolKind::schrodinger;
  const bool bih = model.symbol == SymbolKind::biharmonic;
  for (std::size_t j = 0; j < ps.size(); ++j) {
    ObservableSeries s{"lp", {}, {}};
    for (std::size_t k = 0; k < times.size(); ++k)
      if (times[k] > 0.0) s.push(times[k], lp[k][j]);
    const std::string label = std::isinf(ps[j]) ? "linf" : "l" + fmt12(ps[j]);
    const auto fit = fit_decay(s, w, horizon);
    run.fits[label] = fit_json(fit);
    const double expected = expected_linear_exponent(model, g.dim(), ps[j]);
    const std::string name = label + "_exponent";
    if (ps[j] == 2.0) {
      run.verdict(name, fit.exponent, -1e-6, 1e-6, "L2 isometry");
    } else if (schr || bih) {
      const double tol = schr ? 0.05 : 0.1;
      run.verdict(name, fit.exponent, expected - tol, expected + tol);
    } else {
      run.info(name, fit.exponent);
    }
    run.row("linear dispersive decay", label, fmt12(expected), fit.exponent, fit.window, std::exp(fit.log_constant), name);
    if (std::isinf(ps[j]) || ps[j] == 6.0) lines.push_back({label, s.times, s.values, fit});
  }
  run.write("decay.svg", loglog_svg("free evolution, Lp norms", lines, horizon));
}

void run_nonlinear_decay(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0);
  const double H = traj.validity_horizon;
  const auto& linf = traj.series_named("linf");
  const auto fit = fit_decay(linf, run.window(H), H);
  run.fits["linf"] = fit_json(fit);
  const bool target = is_3d_schrodinger(traj.model, u0.grid());
  if (target) run.verdict("linf_exponent", fit.exponent, 1.4, 1.6);
  else run.info("linf_exponent", fit.exponent);
  const auto env = envelope_values(linf, H);
  const double ratio = env.empty() ? NAN : env.back() / median(env);
  run.metric("A_final", env.empty() ? NAN : env.back());
  run.metric("A_median", env.empty() ? NAN : median(env));
  if (target) run.verdict("A_final_over_median", ratio, 0.0, 1.5);
  else run.info("A_final_over_median", ratio);
  run.row("nonlinear decay", "linf", "1.5", fit.exponent, fit.window, std::exp(fit.log_constant), "linf_exponent");
  const auto profile = data_profile(u0);
  run.metric("M1", profile.m1);
  const auto de = decay_envelope(linf);
  run.write("decay.svg", loglog_svg("nonlinear flow, sup norm", {{"linf", linf.times, linf.values, fit}, {"A_env", de.times, de.values, std::nullopt}}, H));
}

void run_l6_decay(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0);
  const double H = traj.validity_horizon;
  const auto& l6 = traj.series_named("l6");
  const auto fit = fit_decay(l6, run.window(H), H);
  run.fits["l6"] = fit_json(fit);
  if (is_3d_schrodinger(traj.model, u0.grid())) run.verdict("l6_exponent", fit.exponent, 0.9, 1.1);
  else run.info("l6_exponent", fit.exponent);
  const auto profile = data_profile(u0);
  run.metric("M1_with_variance", profile.m1_variance);
  run.metric("x_l2", profile.x_l2);
  double worst = 0.0;
  for (const auto& s : traj.snapshots) {
    if (!(s.time > 0.0) || s.time > H) continue;
    const auto c = weighted_l6_check(s.field, s.time);
    if (c.rhs > 0.0) worst = std::max(worst, c.lhs / c.rhs);
  }
  run.info("l6_over_J_bound_max", worst, "sup over snapshots of ||u||_6 t / ||J u||_2");
  run.row("L6 decay", "l6", "1.0", fit.exponent, fit.window, std::exp(fit.log_constant), "l6_exponent");
  run.write("l6.svg", loglog_svg("nonlinear flow, L6 norm", {{"l6", l6.times, l6.values, fit}}, H));
}

// Largest snapshot-aligned T <= H and its halvings while T/2 stays aligned.
std::vector<double> extraction_times(const Trajectory& traj) {
  const double sp = traj.snapshot_spacing();
  long k = static_cast<long>(std::floor(traj.validity_horizon / sp + 1e-9));
  if (k % 2) --k;
  std::vector<double> out;
  while (k >= 2 && k % 2 == 0) {
    out.insert(out.begin(), static_cast<double>(k) * sp);
    k /= 2;
  }
  return out;
}

void run_scattering(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0);
  const auto Ts = extraction_times(traj);
  if (Ts.empty()) throw DomainError("validity horizon holds too few snapshots for scattering extraction");
  const auto state = extract_scattering_state(traj, Ts, run.cfg.real("scattering.gap_tol"));
  json gaps = json::array();
  for (const auto& g : state.gaps) gaps.push_back({{"T", g.T}, {"gap", g.gap}});
  run.extra["cauchy_gaps"] = gaps;
  run.extra["extraction_time"] = state.extraction_time;
  run.extra["diagnostic"] = state.diagnostic;
  CsvTable gt{{"T", "gap"}, {}};
  for (const auto& g : state.gaps) gt.rows.push_back({fmt12(g.T), fmt12(g.gap)});
  run.write("cauchy_gaps.csv", gt.str());

  if (traj.model.sign == 0) {
    double d = hdot_norm(to_spectral(state.u_plus - u0), 0.5);
    run.verdict("u_plus_minus_u0", d, 0.0, 1e-10 * std::max(1.0, hdot_norm(u0, 0.5)), "linear flow: u+ = u0");
    return;
  }
  run.verdict("gaps_converged", state.converged ? 1.0 : 0.0, 1.0, 1.0, state.diagnostic);
  if (state.gaps.size() >= 2) {
    const double ratio = state.gaps[state.gaps.size() - 2].gap / state.gaps.back().gap;
    run.verdict("gap_ratio_last_doubling", ratio, 3.5, 4.5);
    for (std::size_t i = 1; i + 1 < state.gaps.size(); ++i)
      run.info("gap_ratio_T" + fmt12(state.gaps[i].T), state.gaps[i - 1].gap / state.gaps[i].gap);
  }
  if (!state.converged) return;
  std::optional<FitWindow> w;
  const double lo = run.cfg.real("scattering.fit_t_min");
  if (lo > 0.0) w = FitWindow{lo, 0.5 * state.extraction_time};
  const auto rate = scattering_rate(traj, state, w);
  CsvTable st{{"t", "hdot_half_gap"}, {}};
  for (std::size_t i = 0; i < rate.series.size(); ++i)
    st.rows.push_back({fmt12(rate.series.times[i]), fmt12(rate.series.values[i])});
  run.write("scattering_gap.csv", st.str());
  if (!rate.fit) {
    run.info("scattering_exact", 1.0);
    return;
  }
  run.fits["scattering"] = fit_json(*rate.fit);
  if (is_3d_schrodinger(traj.model, u0.grid())) run.verdict("scattering_exponent", rate.fit->exponent, 1.7, 2.3);
  else run.info("scattering_exponent", rate.fit->exponent);
  run.row("scattering", "Hdot^1/2 distance to e^{it Delta}u+", "2", rate.fit->exponent, rate.fit->window,
          std::exp(rate.fit->log_constant), "scattering_exponent");
  run.write("scattering.svg", loglog_svg("distance to the scattering state", {{"gap", rate.series.times, rate.series.values, rate.fit}}));
}

void run_tail(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0);
  const double H = traj.validity_horizon;
  const auto count = static_cast<std::size_t>(run.cfg.integer("tail.count"));
  const double s0 = run.cfg.real("tail.s_min");
  const double s1 = run.cfg.real("tail.s_max_fraction") * H;
  if (!(s1 > s0)) throw DomainError("tail.s_min lies beyond tail.s_max_fraction of the validity horizon");
  std::vector<double> s;
  for (std::size_t i = 0; i < count; ++i) s.push_back(s0 + (s1 - s0) * static_cast<double>(i) / static_cast<double>(count - 1));
  const auto tail = spacetime_tail(traj, s);
  CsvTable t{{"s", "tail", "truncation_proxy"}, {}};
  double worst = 0.0;
  for (std::size_t i = 0; i < tail.s.size(); ++i) {
    t.rows.push_back({fmt12(tail.s[i]), fmt12(tail.tails[i]), fmt12(tail.proxies[i])});
    worst = std::max(worst, tail.proxies[i]);
  }
  run.write("tail.csv", t.str());
  run.metric("integrand_exponent", tail.integrand_exponent);
  run.verdict("max_truncation_proxy", worst, 0.0, 0.1 - 1e-15);
  if (!tail.fit) {
    run.verdict("tail_exponent", NAN, 0.55, 0.85, "fewer than 8 tail points with proxy below 10%");
    return;
  }
  run.fits["tail"] = fit_json(*tail.fit);
  if (is_3d_schrodinger(traj.model, u0.grid()) && traj.model.power == 3)
    run.verdict("tail_exponent", tail.fit->exponent, 0.55, 0.85);
  else
    run.info("tail_exponent", tail.fit->exponent);
  run.row("spacetime tail", "L5 tail over [s, inf)", "0.7", tail.fit->exponent, tail.fit->window,
          std::exp(tail.fit->log_constant), "tail_exponent");
  run.write("tail.svg", loglog_svg("L5 spacetime tail", {{"tail", tail.s, tail.tails, tail.fit}}, H));
}

void run_duhamel(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0);
  const double H = traj.validity_horizon;
  const auto profile = data_profile(u0);
  run.metric("M1", profile.m1);
  const auto& linf = traj.series_named("linf");
  const auto env = decay_envelope(linf);
  auto A_at = [&](double t) {
    double a = 0.0;
    for (std::size_t i = 0; i < env.times.size() && env.times[i] <= t * (1 + 1e-12); ++i) a = env.values[i];
    return a;
  };
  const double tol = run.cfg.real("duhamel.residual_tol");
  json probes = json::array();
  for (double t : run.cfg.reals("duhamel.probes")) {
    if (t > H) {
      run.warn({"probe t = " + fmt12(t) + " lies past the validity horizon and is skipped"});
      continue;
    }
    const double M = default_window_parameter(t, profile.m1, run.cfg.real("duhamel.m_c"));
    const auto fine = duhamel_split(traj, t, M, 1, tol);
    const auto coarse = duhamel_split(traj, t, M, 2);
    const std::string tag = "t" + fmt12(t);
    const double ratio = coarse.residual / fine.residual;
    run.verdict("residual_ratio_" + tag, ratio, 3.5, 4.5, "residual at doubled stride over residual");

    const auto sum = fine.F1 + fine.F2 + fine.F3;
    const double sum_norm = lp_norm(sum, 2.0);
    double spread = 0.0;
    json interior = json::array();
    for (double frac : run.cfg.reals("duhamel.m_interior")) {
      const auto alt = duhamel_split(traj, t, frac * t, 1);
      const auto alt_sum = alt.F1 + alt.F2 + alt.F3;
      spread = std::max(spread, lp_norm(alt_sum - sum, 2.0) / std::max(sum_norm, 1e-300));
      const double bound = 0.5 * A_at(t) * std::pow(t, -1.5);
      const double f2 = lp_norm(alt.F2, kInfinity);
      run.info("F2_over_bound_" + tag + "_M" + fmt12(alt.M), bound > 0 ? f2 / bound : NAN);
      interior.push_back({{"M", alt.M}, {"F1_l2", lp_norm(alt.F1, 2.0)}, {"F2_l2", lp_norm(alt.F2, 2.0)},
                          {"F3_l2", lp_norm(alt.F3, 2.0)}, {"F2_linf", f2}, {"residual", alt.residual}});
    }
    run.verdict("sum_spread_over_M_" + tag, spread, 0.0, 1e-10, "relative L2 change of F1+F2+F3");
    const double bound = 0.5 * A_at(t) * std::pow(t, -1.5);
    const double f2 = lp_norm(fine.F2, kInfinity);
    run.verdict("F2_linf_minus_bound_" + tag, f2 - bound, -INFINITY, 0.0,
                M >= 0.5 * t ? "M = t/2 leaves an empty middle window" : "");
    probes.push_back({{"t", t},
                      {"M", M},
                      {"F1_l2", lp_norm(fine.F1, 2.0)},
                      {"F2_l2", lp_norm(fine.F2, 2.0)},
                      {"F3_l2", lp_norm(fine.F3, 2.0)},
                      {"F1_linf", lp_norm(fine.F1, kInfinity)},
                      {"F2_linf", f2},
                      {"F3_linf", lp_norm(fine.F3, kInfinity)},
                      {"half_A_t_pow", bound},
                      {"residual", fine.residual},
                      {"residual_doubled_stride", coarse.residual},
                      {"nodes", fine.nodes},
                      {"interior", interior}});
  }
  run.write("duhamel.json", probes.dump(2) + "\n");
}

void run_pc_energy(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0, true);
  const double H = traj.validity_horizon;
  const auto& V = traj.series_named("V_pc");
  const int p = traj.model.power;
  const auto& lq = traj.series_named("l" + std::to_string(p + 1));
  const int d = u0.grid().dim();
  const double xu = weighted_x_norm(u0);
  run.verdict("V0_relative_error", std::abs(V.values.front() - xu * xu) / (xu * xu), 0.0, 1e-6);
  double rise = -INFINITY;
  for (std::size_t k = 1; k < V.size(); ++k)
    if (V.times[k] <= H) rise = std::max(rise, V.values[k] - V.values[k - 1]);
  run.metric("V0", V.values.front());
  run.verdict("max_step_increase_over_V0", rise / V.values.front(), -INFINITY, 1e-6);

  // Centered differences where V and the L^{p+1} norm share sample times.
  std::map<double, double> q;
  for (std::size_t i = 0; i < lq.size(); ++i) q[lq.times[i]] = std::pow(lq.values[i], p + 1);
  double worst = 0.0;
  std::size_t checked = 0;
  const double t_min = run.cfg.real("pc.check_t_min");
  CsvTable table{{"t", "V", "dVdt_fd", "dVdt_identity"}, {}};
  for (std::size_t k = 1; k + 1 < V.size(); ++k) {
    const double t = V.times[k];
    if (t < t_min || V.times[k + 1] > H) continue;
    auto it = q.find(t);
    if (it == q.end()) continue;
    const double fd = (V.values[k + 1] - V.values[k - 1]) / (V.times[k + 1] - V.times[k - 1]);
    const double exact = 4.0 * t / (p + 1) * (4.0 - d * (p - 1)) * it->second;
    table.rows.push_back({fmt12(t), fmt12(V.values[k]), fmt12(fd), fmt12(exact)});
    if (exact != 0.0) worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    ++checked;
  }
  run.write("pc_rate.csv", table.str());
  run.metric("rate_points", static_cast<double>(checked));
  if (traj.model.sign == 0) run.info("rate_relative_error", worst, "linear flow: the identity has no potential term");
  else run.verdict("rate_relative_error", checked ? worst : NAN, 0.0, 1e-3);
  run.write("pc_energy.svg", loglog_svg("pseudo-conformal energy", {{"V", V.times, V.values, std::nullopt}}, H));
}

void run_morawetz(Run& run) {
  const auto u0 = make_initial_data(run.cfg);
  const auto& traj = run.simulate(u0);
  const auto m = morawetz_accumulate(traj);
  run.metric("spacetime_l4_4th", m.spacetime_l4_4th);
  run.metric("mass_times_sup_hdot_half_sq", m.bound);
  run.info("l4_4th_over_bound", m.bound > 0 ? m.spacetime_l4_4th / m.bound : NAN,
           "integrated over [0, t_end]; the estimate holds up to a universal constant");
  const auto& l4 = traj.series_named("l4");
  run.write("l4.svg", loglog_svg("L4 norm", {{"l4", l4.times, l4.values, std::nullopt}}, traj.validity_horizon));
}

void run_sweep(Run& run) {
  const auto amps = run.cfg.reals("sweep.amplitudes");
  struct Row {
    double amp = 0, m1 = 0, horizon = 0, A = 0, exponent = NAN;
    std::map<std::string, ObservableSeries> series;
    std::vector<std::string> warnings;
  };
  std::vector<Row> rows(amps.size());
  const FitWindow base{run.cfg.real("fit.t_min"), run.cfg.real("fit.t_max")};
  parallel_for(amps.size(), run.opt.jobs, [&](std::size_t i) {
    const auto u0 = make_initial_data(run.cfg, amps[i]);
    auto traj = evolve(u0, run.cfg.model(), run.cfg.solver(), standard_observers(run.observer_options(false)));
    Row& r = rows[i];
    r.amp = amps[i];
    r.m1 = data_profile(u0).m1;
    r.horizon = traj.validity_horizon;
    const auto env = envelope_values(traj.series_named("linf"), r.horizon);
    r.A = env.empty() ? NAN : env.back();
    try {
      r.exponent = fit_decay(traj.series_named("linf"), {base.t_min, std::min(base.t_max, r.horizon)}, r.horizon).exponent;
    } catch (const Error&) {
    }
    r.series = std::move(traj.series);
    r.warnings = traj.warnings;
  });
  CsvTable trend{{"amplitude", "M1", "validity_horizon", "sup_t_pow_linf", "linf_exponent"}, {}};
  double min_horizon = kInfinity;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    min_horizon = std::min(min_horizon, r.horizon);
    trend.rows.push_back({fmt12(r.amp), fmt12(r.m1), fmt12(r.horizon), fmt12(r.A), fmt12(r.exponent)});
    char name[48];
    std::snprintf(name, sizeof name, "amplitude_%02zu.csv", i);
    run.write(name, trajectory_table(r.series, r.horizon).str());
    run.warn(r.warnings);
    run.info("sup_t_pow_linf_a" + fmt12(r.amp), r.A);
  }
  run.write("trend.csv", trend.str());
  if (!rows.empty()) run.res.validity_horizon = min_horizon;
  PlotLine line{"sup t^3/2 ||u||_inf", {}, {}, std::nullopt};
  for (const auto& r : rows) {
    line.t.push_back(r.amp);
    line.v.push_back(r.A);
  }
  run.write("trend.svg", loglog_svg("decay constant against amplitude", {line}));
}

void run_gate(Run& run) {
  const auto& cfg = run.cfg;
  const auto u0 = make_initial_data(cfg);
  const ModelSpec model = cfg.model();
  SolverConfig base = cfg.solver();
  base.t_end = cfg.real("gate.t_end");
  base.boundary_mass_tol = 1.0 - 1e-12;
  std::vector<ComplexField> finals;
  double dt = cfg.real("gate.dt");
  for (int level = 0; level < 3; ++level, dt *= 0.5) {
    SolverConfig c = base;
    c.dt = dt;
    c.snapshot_stride = static_cast<int>(c.steps());
    auto traj = evolve(u0, model, c);
    finals.push_back(traj.snapshots.back().field);
  }
  const double e1 = lp_norm(finals[0] - finals[1], 2.0);
  const double e2 = lp_norm(finals[1] - finals[2], 2.0);
  run.metric("richardson_difference_coarse", e1);
  run.metric("richardson_difference_fine", e2);
  run.verdict("richardson_ratio", e1 / e2, 3.5, 4.5);

  const auto& traj = run.simulate(u0);
  const auto& mass = traj.series_named("mass");
  const auto& energy = traj.series_named("energy");
  double dm = 0.0, de = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) dm = std::max(dm, std::abs(mass.values[i] / mass.values[0] - 1.0));
  for (std::size_t i = 0; i < energy.size(); ++i)
    de = std::max(de, std::abs(energy.values[i] / energy.values[0] - 1.0));
  run.verdict("mass_drift", dm, 0.0, 1e-10);
  run.verdict("energy_drift", de, 0.0, 1e-6);
}

void run_ensemble(Run& run) {
  const auto& cfg = run.cfg;
  const auto started = std::chrono::steady_clock::now();
  const auto u0 = make_initial_data(cfg);
  const auto partition = build_partition(u0.grid(), cfg.real("ensemble.partition_h"));
  double err = 0.0;
  for (double v : partition.total()) err = std::max(err, std::abs(v - 1.0));
  run.verdict("partition_sum_error", err, 0.0, 1e-12);
  run.metric("partition_pieces", static_cast<double>(partition.pieces()));

  const auto terms = static_cast<std::size_t>(cfg.integer("ensemble.moment_terms"));
  std::vector<double> c(terms);
  for (std::size_t n = 0; n < terms; ++n) c[n] = 1.0 / std::sqrt(static_cast<double>(n + 1));
  const auto moment_n = static_cast<std::size_t>(cfg.integer("ensemble.moment_samples"));
  for (double rho : cfg.reals("ensemble.moment_rho")) {
    const double ratio = gaussian_moment_check(c, rho, moment_n, cfg.unsigned_integer("seed") ^ 0x5eedULL);
    const double exact = gaussian_moment_constant(rho);
    run.metric("moment_constant_rho" + fmt12(rho), exact);
    run.verdict("moment_ratio_rho" + fmt12(rho), ratio, 0.0, 1.05 * exact, "exact constant " + fmt12(exact));
  }

  EnsembleOptions opt;
  opt.master_seed = cfg.unsigned_integer("seed");
  opt.n_samples = static_cast<std::size_t>(cfg.integer("ensemble.samples"));
  opt.lambda_multiples = cfg.reals("ensemble.lambdas");
  opt.unit_gaussians = cfg.flag("ensemble.unit_gaussians");
  opt.jobs = run.opt.jobs;
  opt.probe_stride = static_cast<std::size_t>(cfg.integer("ensemble.probe_stride"));
  opt.fit_window = {cfg.real("fit.t_min"), cfg.real("fit.t_max")};
  opt.weighted_p = cfg.reals("ensemble.weighted_p");
  opt.eps1 = cfg.real("ensemble.eps1");
  opt.eps2 = cfg.real("ensemble.eps2");
  opt.weighted_points = static_cast<std::size_t>(cfg.integer("ensemble.weighted_points"));
  const auto obs = run.observer_options(false);
  opt.observers = [obs] { return standard_observers(obs); };
  SolverConfig solver = cfg.solver();
  solver.snapshot_stride = static_cast<int>(solver.steps());
  const auto report = ensemble_run(u0, partition, cfg.model(), solver, opt);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  CsvTable samples{{"index", "seed", "status", "validity_horizon", "sup_t_pow_unl_linf", "h1", "unl_linf_exponent"}, {}};
  for (double p : opt.weighted_p) samples.header.push_back("weighted_l" + fmt12(p));
  json per_sample = json::array();
  double min_horizon = kInfinity;
  for (const auto& r : report.samples) {
    if (r.ok) min_horizon = std::min(min_horizon, r.horizon);
    std::vector<std::string> row{std::to_string(r.index), std::to_string(r.seed), r.ok ? "ok" : "failed",
                                 fmt12(r.horizon), fmt12(r.sup_scaled), fmt12(r.h1),
                                 r.fit ? fmt12(r.fit->exponent) : ""};
    for (std::size_t k = 0; k < opt.weighted_p.size(); ++k) row.push_back(k < r.weighted.size() ? fmt12(r.weighted[k].value) : "");
    samples.rows.push_back(row);
    json js = {{"index", r.index}, {"seed", r.seed}, {"status", r.ok ? "ok" : "failed"}};
    if (!r.ok) js["error"] = r.error;
    else {
      js["sup_t_pow_unl_linf"] = r.sup_scaled;
      js["validity_horizon"] = r.horizon;
      js["h1"] = r.h1;
    }
    per_sample.push_back(js);
    if (r.ok) {
      char name[48];
      std::snprintf(name, sizeof name, "sample_%04zu.csv", r.index);
      auto series = r.series;
      series["unl_linf"] = r.unl_linf;
      run.write(name, trajectory_table(series, r.horizon).str());
    }
  }
  run.write("samples.csv", samples.str());
  // Smallest horizon over the samples that finished.
  if (min_horizon < kInfinity) run.res.validity_horizon = min_horizon;

  run.metric("n_failed", static_cast<double>(report.n_failed));
  run.metric("median_sup", report.median_sup);
  run.metric("runtime_seconds", elapsed);
  run.verdict("runtime_seconds", elapsed, 0.0, 1800.0);
  double rise = 0.0;
  for (std::size_t i = 1; i < report.tails.size(); ++i) rise = std::max(rise, report.tails[i] - report.tails[i - 1]);
  run.verdict("tail_increase", rise, 0.0, 0.0, "tails must be nonincreasing in lambda");
  for (std::size_t i = 0; i < opt.lambda_multiples.size() && i < report.tails.size(); ++i) {
    const std::string name = "tail_at_" + fmt12(opt.lambda_multiples[i]) + "x_median";
    if (opt.lambda_multiples[i] == 4.0) run.verdict(name, report.tails[i], 0.0, 0.1);
    else run.info(name, report.tails[i]);
  }
  json weighted = json::array();
  for (const auto& w : report.weighted) {
    weighted.push_back({{"p", w.p}, {"median", w.median}, {"iqr_over_median", w.iqr_over_median}});
    run.info("weighted_l" + fmt12(w.p) + "_iqr_over_median", w.iqr_over_median);
  }
  json tails = json::array();
  for (std::size_t i = 0; i < report.tails.size(); ++i)
    tails.push_back({{"lambda", report.lambdas[i]}, {"probability", report.tails[i]}});
  json h1 = json::array();
  for (std::size_t i = 0; i < report.h1_tails.size(); ++i)
    h1.push_back({{"lambda", report.h1_lambdas[i]}, {"probability", report.h1_tails[i]}});
  const json manifest = {{"master_seed", opt.master_seed},
                         {"n_samples", report.n_samples},
                         {"n_failed", report.n_failed},
                         {"median_sup_t_pow_unl_linf", report.median_sup},
                         {"tails", tails},
                         {"median_h1", report.median_h1},
                         {"h1_tails", h1},
                         {"weighted_norms", weighted},
                         {"samples", per_sample}};
  run.write("ensemble.json", manifest.dump(2) + "\n");
  run.row("random data", "P(sup t^3/2 ||u_nl||_inf > 4 median)", "small", report.tails.size() > 2 ? report.tails[2] : NAN,
          {0.0, 0.0}, report.median_sup, "tail_at_4x_median");
}

json verdict_json(const Verdict& v) {
  return {{"name", v.name}, {"measured", num(v.measured)}, {"lo", num(v.lo)},          {"hi", num(v.hi)},
          {"pass", v.pass},  {"informational", v.informational}, {"note", v.note}};
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  Run run(config, options);
  const std::string started = utc_timestamp();
  run.write("config.txt", serialize_config(config));
  try {
    switch (config.kind()) {
      case ExperimentKind::linear_decay: run_linear_decay(run); break;
      case ExperimentKind::nonlinear_decay: run_nonlinear_decay(run); break;
      case ExperimentKind::scattering_rate: run_scattering(run); break;
      case ExperimentKind::spacetime_tail: run_tail(run); break;
      case ExperimentKind::duhamel: run_duhamel(run); break;
      case ExperimentKind::pc_energy: run_pc_energy(run); break;
      case ExperimentKind::l6_decay: run_l6_decay(run); break;
      case ExperimentKind::morawetz: run_morawetz(run); break;
      case ExperimentKind::ensemble: run_ensemble(run); break;
      case ExperimentKind::amplitude_sweep: run_sweep(run); break;
      case ExperimentKind::convergence_gate: run_gate(run); break;
    }
    bool any = false, all = true;
    for (const auto& v : run.res.verdicts)
      if (!v.informational) {
        any = true;
        all = all && v.pass;
      }
    run.res.status = !any ? "info" : all ? "pass" : "fail";
    run.res.exit_code = all ? kExitPass : kExitAcceptance;
  } catch (const NumericalAbort& e) {
    run.res.status = "numerical-abort";
    run.res.error = e.what();
    run.res.exit_code = kExitNumerical;
  } catch (const ConfigError& e) {
    throw;
  } catch (const std::exception& e) {
    run.res.status = "error";
    run.res.error = e.what();
    run.res.exit_code = kExitAcceptance;
  }

  if (!run.fits.empty()) run.write("fits.json", run.fits.dump(2) + "\n");
  json verdicts = json::array();
  for (const auto& v : run.res.verdicts) verdicts.push_back(verdict_json(v));
  json rows = json::array();
  for (const auto& r : run.res.rows)
    rows.push_back({{"group", r.group},
                    {"quantity", r.quantity},
                    {"claimed", r.claimed},
                    {"measured", num(r.measured)},
                    {"window", {num(r.window_lo), num(r.window_hi)}},
                    {"constant", num(r.constant)},
                    {"verdict", r.verdict}});
  json metrics = json::object();
  for (const auto& [k, v] : run.res.metrics) metrics[k] = num(v);
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(config)));
  run.res.manifest = {{"run_id", run.res.run_id},
                      {"config_hash", hash},
                      {"code_version", code_version()},
                      {"kind", config.text("kind")},
                      {"started", started},
                      {"finished", utc_timestamp()},
                      {"validity_horizon", num(run.res.validity_horizon)},
                      {"status", run.res.status},
                      {"exit_code", run.res.exit_code},
                      {"error", run.res.error},
                      {"verdicts", verdicts},
                      {"rows", rows},
                      {"metrics", metrics},
                      {"fits", run.fits},
                      {"details", run.extra},
                      {"warnings", run.res.warnings},
                      {"artifacts", run.res.artifacts}};
  write_file_atomic((std::filesystem::path(run.res.directory) / "manifest.json").string(), run.res.manifest.dump(2) + "\n");
  return run.res;
}

}  // namespace nlslab
