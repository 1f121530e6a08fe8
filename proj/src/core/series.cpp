#include "series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "error.hpp"

namespace nlslab {

void ObservableSeries::validate() const {
  if (times.size() != values.size()) throw InvalidArgument("series '" + name + "' has mismatched lengths");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw InvalidArgument("series '" + name + "' times must increase strictly");
}

namespace {

double round_significant(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  return std::strtod(buf, nullptr);
}

}  // namespace

DecayFit fit_decay(const ObservableSeries& series, FitWindow window, double validity_horizon) {
  series.validate();
  if (!(window.t_min < window.t_max)) throw InvalidArgument("fit window needs t_min < t_max");
  if (window.t_max > validity_horizon * (1.0 + 1e-12))
    throw DomainError("fit window [" + std::to_string(window.t_min) + ", " + std::to_string(window.t_max) +
                      "] crosses the validity horizon " + std::to_string(validity_horizon));
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series.times[i];
    if (t < window.t_min || t > window.t_max) continue;
    const double v = series.values[i];
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("series '" + series.name + "' has a nonpositive value at t = " + std::to_string(t));
    if (!(t > 0.0)) throw InvalidArgument("power-law fits need t > 0");
    x.push_back(std::log(t));
    y.push_back(std::log(v));
  }
  if (x.size() < 8)
    throw InvalidArgument("fit window holds " + std::to_string(x.size()) + " samples; at least 8 are needed");

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit window has no spread in time");
  const double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = (y[i] - my) - slope * (x[i] - mx);
    ss_res += r * r;
  }

  DecayFit fit;
  fit.exponent = round_significant(-slope, 12);
  fit.log_constant = my - slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.window = window;
  fit.window.t_min = std::max(window.t_min, series.times.front());
  fit.window.t_max = std::min(window.t_max, series.times.back());
  fit.samples = x.size();
  return fit;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v, double a, double b) {
  if (t.size() != v.size()) throw InvalidArgument("trapezoid: mismatched lengths");
  if (t.size() < 2 || !(b > a)) return 0.0;
  auto value_at = [&](double s) {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    if (it == t.begin()) return v.front();
    if (it == t.end()) return v.back();
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double w = (s - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - w) * v[i - 1] + w * v[i];
  };
  a = std::max(a, t.front());
  b = std::min(b, t.back());
  if (!(b > a)) return 0.0;
  double sum = 0.0;
  double prev_t = a, prev_v = value_at(a);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] <= a) continue;
    if (t[i] >= b) break;
    sum += 0.5 * (t[i] - prev_t) * (v[i] + prev_v);
    prev_t = t[i];
    prev_v = v[i];
  }
  sum += 0.5 * (b - prev_t) * (value_at(b) + prev_v);
  return sum;
}

}  // namespace nlslab
