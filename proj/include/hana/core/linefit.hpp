#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

namespace hana {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least-squares fit y = intercept + slope * x.
/// Throws if fewer than 2 points or all x values coincide.
inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 (x, y) pairs");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  // Flat data fits itself trivially; report r2 = 1 only when residuals vanish.
  f.r2 = (syy == 0.0) ? 1.0 : (f.slope * f.slope * sxx) / syy;
  if (f.r2 > 1.0) f.r2 = 1.0;
  if (f.r2 < 0.0) f.r2 = 0.0;
  return f;
}

}  // namespace hana
