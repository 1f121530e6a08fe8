#include "ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "model.hpp"
#include "norms.hpp"
#include "spectral.hpp"

namespace nlslab {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Minimum-image offset of q from cell k, in cell units, on a ring of `cells`.
double ring_offset(double q, int k, int cells) {
  double d = q - k;
  d -= cells * std::round(d / cells);
  return d;
}

}  // namespace

Bump smooth_bump(double radius) {
  return Bump{radius, [radius](double r) {
                const double s = r / radius;
                return s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0;
              }};
}

std::size_t PartitionOfUnity::pieces() const noexcept {
  std::size_t n = 1;
  for (int a = 0; a < grid_.dim(); ++a) n *= static_cast<std::size_t>(cells_);
  return n;
}

Vec3 PartitionOfUnity::center(std::size_t piece) const {
  Vec3 c{0.0, 0.0, 0.0};
  for (int a = grid_.dim() - 1; a >= 0; --a) {
    c[a] = -0.5 * grid_.box_length() + static_cast<double>(piece % cells_) * h_;
    piece /= cells_;
  }
  return c;
}

std::size_t PartitionOfUnity::neighbors(std::size_t site, Neighbors& out) const {
  const int d = grid_.dim();
  const Index3 j = grid_.unflatten(site);
  // Candidate cells per axis with their offsets in physical units.
  int cand[3][4];
  double off[3][4];
  int count[3] = {1, 1, 1};
  for (int a = 0; a < 3; ++a) {
    if (a >= d) {
      cand[a][0] = 0;
      off[a][0] = 0.0;
      continue;
    }
    const double q = (grid_.coordinate(j[a]) + 0.5 * grid_.box_length()) / h_;
    const int base = static_cast<int>(std::floor(q));
    count[a] = 0;
    for (int k = base - 1; k <= base + 2; ++k) {
      const double o = ring_offset(q, k, cells_) * h_;
      if (std::abs(o) >= bump_.radius) continue;
      cand[a][count[a]] = ((k % cells_) + cells_) % cells_;
      off[a][count[a]] = o;
      ++count[a];
    }
  }
  std::size_t n = 0;
  const double r2max = bump_.radius * bump_.radius;
  for (int x = 0; x < count[0]; ++x)
    for (int y = 0; y < count[1]; ++y)
      for (int z = 0; z < count[2]; ++z) {
        const double r2 = off[0][x] * off[0][x] + off[1][y] * off[1][y] + off[2][z] * off[2][z];
        if (r2 >= r2max) continue;
        const double w = bump_.profile(std::sqrt(r2));
        if (w <= 0.0) continue;
        std::size_t piece = static_cast<std::size_t>(cand[0][x]);
        if (d > 1) piece = piece * cells_ + cand[1][y];
        if (d > 2) piece = piece * cells_ + cand[2][z];
        out[n++] = {piece, w};
      }
  return n;
}

ComplexField PartitionOfUnity::piece(std::size_t target) const {
  if (target >= pieces()) throw InvalidArgument("partition piece index out of range");
  ComplexField out(grid_);
  Neighbors nb;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const std::size_t n = neighbors(i, nb);
    double total = 0.0, mine = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      total += nb[k].psi;
      if (nb[k].piece == target) mine += nb[k].psi;
    }
    out[i] = mine / total;
  }
  return out;
}

std::vector<double> PartitionOfUnity::square_sum() const {
  std::vector<double> out(grid_.size());
  Neighbors nb;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t n = neighbors(i, nb);
    double total = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += nb[k].psi;
    for (std::size_t k = 0; k < n; ++k) sq += (nb[k].psi / total) * (nb[k].psi / total);
    out[i] = sq;
  }
  return out;
}

std::vector<double> PartitionOfUnity::total() const {
  std::vector<double> out(grid_.size());
  Neighbors nb;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t n = neighbors(i, nb);
    double total = 0.0, s = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += nb[k].psi;
    for (std::size_t k = 0; k < n; ++k) s += nb[k].psi / total;
    out[i] = s;
  }
  return out;
}

PartitionOfUnity build_partition(const Grid& grid, double h, Bump psi) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("partition spacing must be positive");
  const double ratio = grid.box_length() / h;
  const int cells = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - cells) > 1e-9 * ratio) throw InvalidArgument("box length must be a multiple of the partition spacing");
  if (cells < 4) throw InvalidArgument("partition needs at least 4 cells per axis");
  if (!(psi.radius > 0.5 * h && psi.radius < 2.0 * h)) throw InvalidArgument("bump radius must lie in (h/2, 2h)");
  if (!psi.profile) throw InvalidArgument("bump profile is empty");

  PartitionOfUnity p;
  p.grid_ = grid;
  p.h_ = h;
  p.bump_ = std::move(psi);
  p.cells_ = cells;
  PartitionOfUnity::Neighbors nb;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t n = p.neighbors(i, nb);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += nb[k].psi;
    if (!(total > 0.0)) {
      std::ostringstream msg;
      msg << "bump translates leave grid site " << i << " uncovered";
      throw DomainError(msg.str());
    }
  }
  return p;
}

PartitionOfUnity build_partition(const Grid& grid, double h) { return build_partition(grid, h, smooth_bump(1.5 * h)); }

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t sample_index) {
  return splitmix(splitmix(master_seed) ^ splitmix(sample_index + 0x632be59bd9b4e019ULL));
}

double cell_gaussian(std::uint64_t master_seed, std::uint64_t sample_index, std::uint64_t cell) {
  std::mt19937_64 gen(splitmix(sample_seed(master_seed, sample_index) ^ splitmix(cell)));
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(gen);
}

RandomDataSample sample_random_data(const ComplexField& u0, const PartitionOfUnity& partition,
                                    std::uint64_t master_seed, std::uint64_t index, bool unit_gaussians) {
  if (!(u0.grid() == partition.grid())) throw InvalidArgument("partition and data live on different grids");
  RandomDataSample s;
  s.seed = sample_seed(master_seed, index);
  s.index = index;
  s.gaussians.resize(partition.pieces());
  for (std::size_t n = 0; n < s.gaussians.size(); ++n)
    s.gaussians[n] = unit_gaussians ? 1.0 : cell_gaussian(master_seed, index, n);

  s.field = ComplexField(u0.grid());
  PartitionOfUnity::Neighbors nb;
  for (std::size_t i = 0; i < u0.size(); ++i) {
    const std::size_t n = partition.neighbors(i, nb);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      num += nb[k].psi * s.gaussians[nb[k].piece];
      den += nb[k].psi;
    }
    s.field[i] = u0[i] * (num / den);
  }
  return s;
}

double gaussian_moment_constant(double rho) {
  const double log_moment = 0.5 * rho * std::log(2.0) + std::lgamma(0.5 * (rho + 1.0)) - 0.5 * std::log(std::numbers::pi);
  return std::exp(log_moment / rho) / std::sqrt(rho);
}

double gaussian_moment_check(const std::vector<double>& c, double rho, std::size_t n_samples, std::uint64_t seed) {
  if (c.empty()) throw InvalidArgument("coefficient vector is empty");
  if (!(rho >= 2.0 && rho <= 20.0)) throw InvalidArgument("moment order must lie in [2, 20]");
  if (n_samples == 0) throw InvalidArgument("need at least one sample");
  double c2 = 0.0;
  for (double v : c) c2 += v * v;
  if (!(c2 > 0.0)) throw InvalidArgument("coefficient vector is zero");
  std::mt19937_64 gen(splitmix(seed));
  std::normal_distribution<double> normal(0.0, 1.0);
  // Moments of the normalized sum keep the accumulation scale-free.
  const double inv = 1.0 / std::sqrt(c2);
  double acc = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    double x = 0.0;
    for (double v : c) x += v * inv * normal(gen);
    acc += std::pow(std::abs(x), rho);
  }
  return std::pow(acc / static_cast<double>(n_samples), 1.0 / rho) / std::sqrt(rho);
}

double log_weight(double t, double p, double eps1) {
  const double lt = std::log(t);
  const double a = 100.0 * lt;
  // log(1 + e^a) without overflow
  const double log1p_term = a > 0.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a));
  return a - log1p_term + (3.0 * (0.5 - 1.0 / p) - eps1) * lt;
}

std::vector<WeightedNorm> weighted_linear_norms(const ComplexField& u0, const ModelSpec& model,
                                                const std::vector<double>& ps, double eps1, double eps2,
                                                const std::vector<double>& t_grid) {
  for (double p : ps)
    if (!(p > 2.0) || !std::isfinite(p)) throw InvalidArgument("weighted norm exponent must satisfy 2 < p < inf");
  if (!(eps1 > eps2 && eps2 > 0.0)) throw InvalidArgument("weighted norm needs eps1 > eps2 > 0");
  if (t_grid.size() < 2) throw InvalidArgument("weighted norm needs at least two times");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw InvalidArgument("weighted norm times must be nonnegative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("weighted norm times must increase");
  }

  const double ninf = -std::numeric_limits<double>::infinity();
  // log of the integrand per exponent and time
  std::vector<std::vector<double>> logf(ps.size(), std::vector<double>(t_grid.size(), ninf));
  const auto spec0 = to_spectral(u0);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (t == 0.0) continue;  // the weight vanishes at t = 0
    if (100.0 * std::abs(std::log(t)) > 600.0) {
      std::ostringstream msg;
      msg << "log magnitude of t^100 exceeds 600 at t = " << t;
      throw DomainError(msg.str());
    }
    const auto u = to_physical(free_evolve(spec0, t, model));
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const double norm = lp_norm(u, ps[k]);
      if (norm == 0.0) continue;
      const double lf = (log_weight(t, ps[k], eps1) + std::log(norm)) / eps2;
      if (lf > 600.0) {
        std::ostringstream msg;
        msg << "log magnitude of the weighted integrand is " << lf << " at t = " << t << ", above 600";
        throw DomainError(msg.str());
      }
      logf[k][i] = lf;
    }
  }

  // log-sum-exp trapezoid over [a, b] restricted to grid points
  auto log_trapezoid = [&](const std::vector<double>& lf, double from) {
    double peak = ninf;
    for (std::size_t i = 0; i < lf.size(); ++i)
      if (t_grid[i] >= from || (i + 1 < lf.size() && t_grid[i + 1] > from)) peak = std::max(peak, lf[i]);
    if (peak == ninf) return ninf;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < lf.size(); ++i) {
      const double a = std::max(t_grid[i], from), b = t_grid[i + 1];
      if (!(b > a)) continue;
      // linear interpolation of the integrand at a when the cut falls inside
      const double w = (a - t_grid[i]) / (b - t_grid[i]);
      const double fa = (1.0 - w) * std::exp(lf[i] - peak) + w * std::exp(lf[i + 1] - peak);
      acc += 0.5 * (b - a) * (fa + std::exp(lf[i + 1] - peak));
    }
    return acc > 0.0 ? peak + std::log(acc) : ninf;
  };

  std::vector<WeightedNorm> out(ps.size());
  const double t_max = t_grid.back();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    const double total = log_trapezoid(logf[k], t_grid.front());
    out[k].log_integral = total;
    if (total == ninf) continue;
    out[k].value = std::exp(eps2 * total);
    const double last = log_trapezoid(logf[k], 0.1 * t_max);
    out[k].truncation_proxy = last == ninf ? 0.0 : std::exp(last - total);
  }
  return out;
}

WeightedNorm weighted_linear_norm(const ComplexField& u0, const ModelSpec& model, double p, double eps1,
                                  double eps2, const std::vector<double>& t_grid) {
  return weighted_linear_norms(u0, model, {p}, eps1, eps2, t_grid).front();
}

std::vector<double> weighted_time_grid(double t_min, double t_max, std::size_t points) {
  if (!(t_min > 0.0 && t_max > t_min) || points < 2) throw InvalidArgument("weighted time grid needs 0 < t_min < t_max and 2 points");
  std::vector<double> out{0.0};
  const std::size_t m = points - 1;
  for (std::size_t i = 0; i < m; ++i)
    out.push_back(m == 1 ? t_max : t_min * std::pow(t_max / t_min, static_cast<double>(i) / static_cast<double>(m - 1)));
  return out;
}

std::vector<double> empirical_tail(const std::vector<double>& values, const std::vector<double>& lambdas) {
  std::vector<double> out;
  out.reserve(lambdas.size());
  for (double l : lambdas) {
    std::size_t above = 0;
    for (double v : values) above += v > l ? 1 : 0;
    out.push_back(values.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(values.size()));
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

namespace {

SampleRecord run_sample(const ComplexField& u0, const PartitionOfUnity& partition, const ModelSpec& model,
                        const SolverConfig& config, const EnsembleOptions& opt, std::size_t index) {
  SampleRecord rec;
  rec.index = index;
  rec.seed = sample_seed(opt.master_seed, index);
  rec.unl_linf.name = "unl_linf";
  try {
    const auto sample = sample_random_data(u0, partition, opt.master_seed, index, opt.unit_gaussians);
    rec.h1 = hs_norm(sample.field, 1.0);

    const Grid& g = u0.grid();
    const auto omega = dispersion_table(g, model);
    const auto spec0 = to_spectral(sample.field);
    ComplexBuffer work(g.size());
    ObservableSeries probe{"unl_linf", {}, {}};
    const std::size_t stride = std::max<std::size_t>(1, opt.probe_stride);
    StepHook hook = [&](const StepState& s) {
      if (s.step == 0 || s.step % stride != 0) return;
      const auto c = s.spectral.coefficients();
      for (std::size_t i = 0; i < work.size(); ++i) {
        const double ph = -s.time * omega[i];
        work[i] = c[i] - spec0[i] * Complex(std::cos(ph), std::sin(ph));
      }
      backward_in_place(g, work);
      double sup = 0.0;
      for (const auto& v : work) sup = std::max(sup, std::abs(v));
      probe.push(s.time, sup);
    };
    const auto observers = opt.observers ? opt.observers() : std::vector<Observable>{};
    auto traj = evolve(sample.field, model, config, observers, hook);
    rec.horizon = traj.validity_horizon;
    for (std::size_t i = 0; i < probe.size(); ++i) {
      if (probe.times[i] > rec.horizon) break;
      rec.unl_linf.push(probe.times[i], probe.values[i]);
      rec.sup_scaled = std::max(rec.sup_scaled, std::pow(probe.times[i], 1.5) * probe.values[i]);
    }
    const FitWindow w{opt.fit_window.t_min, std::min(opt.fit_window.t_max, rec.horizon)};
    try {
      rec.fit = fit_decay(rec.unl_linf, w, rec.horizon);
    } catch (const Error&) {
      rec.fit.reset();
    }
    if (opt.weighted_points >= 2 && rec.horizon > opt.weighted_t_min)
      rec.weighted = weighted_linear_norms(sample.field, model, opt.weighted_p, opt.eps1, opt.eps2,
                                           weighted_time_grid(opt.weighted_t_min, rec.horizon, opt.weighted_points));
    rec.series = std::move(traj.series);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

EnsembleReport ensemble_run(const ComplexField& u0, const PartitionOfUnity& partition, const ModelSpec& model,
                            const SolverConfig& config, const EnsembleOptions& options) {
  model.validate();
  config.validate();
  if (options.n_samples == 0) throw InvalidArgument("ensemble needs at least one sample");
  EnsembleReport report;
  report.n_samples = options.n_samples;
  report.samples.resize(options.n_samples);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < options.n_samples; i = next++)
      report.samples[i] = run_sample(u0, partition, model, config, options, i);
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(options.n_samples)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<double> sups, h1s;
  std::vector<std::vector<double>> weighted(options.weighted_p.size());
  for (const auto& rec : report.samples) {
    if (!rec.ok) {
      ++report.n_failed;
      continue;
    }
    sups.push_back(rec.sup_scaled);
    h1s.push_back(rec.h1);
    for (std::size_t k = 0; k < rec.weighted.size() && k < weighted.size(); ++k) weighted[k].push_back(rec.weighted[k].value);
  }
  if (!sups.empty()) {
    report.median_sup = median(sups);
    report.median_h1 = median(h1s);
    for (double m : options.lambda_multiples) {
      report.lambdas.push_back(m * report.median_sup);
      report.h1_lambdas.push_back(m * report.median_h1);
    }
    report.tails = empirical_tail(sups, report.lambdas);
    report.h1_tails = empirical_tail(h1s, report.h1_lambdas);
  }
  for (std::size_t k = 0; k < weighted.size(); ++k) {
    if (weighted[k].empty()) continue;
    WeightedStats st;
    st.p = options.weighted_p[k];
    st.median = median(weighted[k]);
    st.iqr_over_median = st.median > 0.0 ? (quantile(weighted[k], 0.75) - quantile(weighted[k], 0.25)) / st.median : 0.0;
    report.weighted.push_back(st);
  }
  return report;
}

}  // namespace nlslab
