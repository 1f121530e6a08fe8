#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "field.hpp"
#include "series.hpp"
#include "solver.hpp"

namespace nlslab {

// Nonnegative radial profile psi(r), zero for r >= radius.
struct Bump {
  double radius = 1.5;
  std::function<double(double r)> profile;
};

// exp(-1 / (1 - (r/radius)^2)) inside the ball.
Bump smooth_bump(double radius);

// phi_n(x) = psi(|x - n|) / sum_m psi(|x - m|) over the lattice
// n_a = -L/2 + k h, with periodic minimum-image distances. Pieces are
// evaluated on demand rather than stored.
class PartitionOfUnity {
 public:
  struct Weight {
    std::size_t piece = 0;
    double psi = 0.0;  // unnormalized psi(|x - n|)
  };
  // At most 4 candidate cells per axis fall inside a ball of radius < 2h.
  using Neighbors = std::array<Weight, 64>;

  const Grid& grid() const noexcept { return grid_; }
  double spacing() const noexcept { return h_; }
  const Bump& bump() const noexcept { return bump_; }
  int cells_per_axis() const noexcept { return cells_; }
  std::size_t pieces() const noexcept;
  Vec3 center(std::size_t piece) const;

  // Unnormalized weights of the pieces covering a site; returns the count.
  std::size_t neighbors(std::size_t site, Neighbors& out) const;

  ComplexField piece(std::size_t n) const;  // phi_n on the grid
  std::vector<double> square_sum() const;   // sum_n phi_n^2 per site
  std::vector<double> total() const;        // sum_n phi_n per site

 private:
  friend PartitionOfUnity build_partition(const Grid&, double, Bump);
  Grid grid_;
  double h_ = 1.0;
  Bump bump_;
  int cells_ = 0;
};

// Requires L/h to be an integer of at least 4 and radius in (h/2, 2h).
// Throws DomainError when some grid point is covered by no translate.
PartitionOfUnity build_partition(const Grid& grid, double h, Bump psi);
PartitionOfUnity build_partition(const Grid& grid, double h = 1.0);

// Standard normal for (master_seed, sample_index, cell), independent of the
// order in which cells or samples are drawn.
double cell_gaussian(std::uint64_t master_seed, std::uint64_t sample_index, std::uint64_t cell);
std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t sample_index);

struct RandomDataSample {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<double> gaussians;  // one per lattice cell
  ComplexField field;
};

// u0^w = sum_n phi_n g_n u0. With unit_gaussians every g_n is 1 and the
// result equals u0 bit for bit.
RandomDataSample sample_random_data(const ComplexField& u0, const PartitionOfUnity& partition,
                                    std::uint64_t master_seed, std::uint64_t index, bool unit_gaussians = false);

// (E|g|^rho)^(1/rho) / sqrt(rho) for a standard normal g.
double gaussian_moment_constant(double rho);

// Empirical (E|sum c_n g_n|^rho)^(1/rho) / (sqrt(rho) ||c||_2).
double gaussian_moment_check(const std::vector<double>& c, double rho, std::size_t n_samples, std::uint64_t seed);

struct WeightedNorm {
  double value = 0.0;          // (int (gamma ||e^{it D} u||_p)^(1/eps2) dt)^eps2
  double log_integral = 0.0;   // log of the time integral (-inf when it vanishes)
  double truncation_proxy = 0.0;  // share of the integral from the last decade [t_max/10, t_max]
};

// log gamma_{p,eps1}(t) = log(t^100 / (1 + t^100)) + (3(1/2 - 1/p) - eps1) log t.
double log_weight(double t, double p, double eps1);

// Trapezoid in t over t_grid, with every weight in log space. Throws
// DomainError when |log t^100| or the log of the integrand exceeds 600.
WeightedNorm weighted_linear_norm(const ComplexField& u0, const ModelSpec& model, double p, double eps1,
                                  double eps2, const std::vector<double>& t_grid);

// Several exponents from one pass over t_grid.
std::vector<WeightedNorm> weighted_linear_norms(const ComplexField& u0, const ModelSpec& model,
                                                const std::vector<double>& ps, double eps1, double eps2,
                                                const std::vector<double>& t_grid);

// t = 0 followed by `points - 1` geometrically spaced times on [t_min, t_max].
std::vector<double> weighted_time_grid(double t_min, double t_max, std::size_t points);

// P(X > lambda) for each lambda.
std::vector<double> empirical_tail(const std::vector<double>& values, const std::vector<double>& lambdas);

double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

struct EnsembleOptions {
  std::uint64_t master_seed = 0;
  std::size_t n_samples = 64;
  std::vector<double> lambda_multiples{1.0, 2.0, 4.0, 8.0, 16.0};
  bool unit_gaussians = false;
  int jobs = 1;
  std::size_t probe_stride = 1;  // steps between u_nl evaluations
  FitWindow fit_window;          // clipped to the sample's horizon
  std::vector<double> weighted_p{3.0, 6.0, 12.0};
  double eps1 = 0.2;
  double eps2 = 0.1;
  std::size_t weighted_points = 0;  // geometric grid on [weighted_t_min, horizon]; 0 skips the weighted norms
  double weighted_t_min = 0.25;
  std::function<std::vector<Observable>()> observers;  // per-sample series, built once per sample
};

struct SampleRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double horizon = 0.0;
  double sup_scaled = 0.0;  // sup over (0, horizon] of t^(3/2) ||u_nl(t)||_inf
  double h1 = 0.0;          // ||u0^w||_{H^1}
  std::optional<DecayFit> fit;
  std::vector<WeightedNorm> weighted;
  ObservableSeries unl_linf;
  std::map<std::string, ObservableSeries> series;
};

struct WeightedStats {
  double p = 0.0;
  double median = 0.0;
  double iqr_over_median = 0.0;
};

struct EnsembleReport {
  std::size_t n_samples = 0;
  std::size_t n_failed = 0;
  std::vector<SampleRecord> samples;
  double median_sup = 0.0;
  std::vector<double> lambdas;
  std::vector<double> tails;
  double median_h1 = 0.0;
  std::vector<double> h1_lambdas;
  std::vector<double> h1_tails;
  std::vector<WeightedStats> weighted;
};

// Independent samples, run up to `jobs` at a time; the aggregation runs in
// sample order. Solver failures are recorded per sample.
EnsembleReport ensemble_run(const ComplexField& u0, const PartitionOfUnity& partition, const ModelSpec& model,
                            const SolverConfig& config, const EnsembleOptions& options);

}  // namespace nlslab
