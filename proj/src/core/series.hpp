#pragma once

#include <limits>
#include <string>
#include <vector>

namespace nlslab {

struct ObservableSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const noexcept { return times.size(); }
  void push(double t, double v) {
    times.push_back(t);
    values.push_back(v);
  }
  // Throws InvalidArgument unless lengths match and times increase strictly.
  void validate() const;
};

struct FitWindow {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
};

// value ~ exp(log_constant) * t^(-exponent) over the window.
struct DecayFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double r_squared = 0.0;
  FitWindow window;
  std::size_t samples = 0;
};

// Least squares on (log t, log value) over samples with t in the window.
// Needs at least 8 samples, all values positive, and t_max no later than the
// validity horizon. The exponent is rounded to 12 significant digits so it is
// unaffected by rescaling the series.
DecayFit fit_decay(const ObservableSeries& series, FitWindow window,
                   double validity_horizon = std::numeric_limits<double>::infinity());

// Trapezoid integral of the series restricted to [a, b] (linear interpolation
// at interior endpoints).
double trapezoid(const std::vector<double>& t, const std::vector<double>& v, double a, double b);

}  // namespace nlslab
