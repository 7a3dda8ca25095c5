#pragma once

// Independent reference computations for tests. Nothing here may call into
// the code paths it is used to check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace oracle {

/// Rows of an h-row channel that belong to packet `packet` when packets hold
/// r rows, found by scanning every row.
inline std::vector<std::size_t> packet_rows(std::size_t h, std::size_t r, std::size_t packet)
{
  std::vector<std::size_t> rows;
  for (std::size_t y = 0; y < h; ++y) {
    if (y / r == packet)
      rows.push_back(y);
  }
  return rows;
}

inline double objective(std::span<const double> target, std::span<const double> source, double a,
                        double b)
{
  long double sum = 0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    const long double r = static_cast<long double>(target[k]) - (a * source[k] + b);
    sum += r * r;
  }
  return static_cast<double>(sum);
}

struct GridBest {
  double a = 0, b = 0, residual = std::numeric_limits<double>::infinity();
};

/// Exhaustive search over an (n x n) grid spanning [lo, hi]^2, evaluating
/// the residual directly at every point.
inline GridBest grid_search_direct(std::span<const double> target, std::span<const double> source,
                                   double lo, double hi, std::size_t n)
{
  GridBest best;
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t ia = 0; ia < n; ++ia) {
    const double a = lo + step * static_cast<double>(ia);
    for (std::size_t ib = 0; ib < n; ++ib) {
      const double b = lo + step * static_cast<double>(ib);
      double sum = 0;
      for (std::size_t k = 0; k < target.size(); ++k) {
        const double r = target[k] - (a * source[k] + b);
        sum += r * r;
      }
      if (sum < best.residual)
        best = {a, b, sum};
    }
  }
  best.residual = objective(target, source, best.a, best.b);
  return best;
}

/// Same search, but each grid point is scored from the five moments of the
/// data (sum x^2, sum s x, sum x, sum s^2, sum s); the winner is re-scored
/// directly. Needed for long vectors where the direct scan is too slow.
inline GridBest grid_search_moments(std::span<const double> target, std::span<const double> source,
                                    double lo, double hi, std::size_t n)
{
  long double sxx = 0, ssx = 0, sx = 0, sss = 0, ss = 0;
  for (std::size_t k = 0; k < target.size(); ++k) {
    sxx += static_cast<long double>(target[k]) * target[k];
    ssx += static_cast<long double>(source[k]) * target[k];
    sx += target[k];
    sss += static_cast<long double>(source[k]) * source[k];
    ss += source[k];
  }
  const long double m = static_cast<long double>(target.size());
  GridBest best;
  long double best_val = std::numeric_limits<long double>::infinity();
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t ia = 0; ia < n; ++ia) {
    const long double a = lo + step * static_cast<double>(ia);
    const long double base = sxx - 2 * a * ssx + a * a * sss;
    const long double lin = -2 * sx + 2 * a * ss;
    for (std::size_t ib = 0; ib < n; ++ib) {
      const long double b = lo + step * static_cast<double>(ib);
      const long double v = base + b * (lin + m * b);
      if (v < best_val) {
        best_val = v;
        best.a = static_cast<double>(a);
        best.b = static_cast<double>(b);
      }
    }
  }
  best.residual = objective(target, source, best.a, best.b);
  return best;
}

/// grid_search_moments followed by `levels` rounds of re-gridding a
/// zoom_n x zoom_n window of half-width one step around the current best point,
/// scoring each point directly.
inline GridBest grid_search_zoom(std::span<const double> target, std::span<const double> source,
                                 double lo, double hi, std::size_t n, std::size_t zoom_n,
                                 int levels)
{
  GridBest best = grid_search_moments(target, source, lo, hi, n);
  double step = (hi - lo) / static_cast<double>(n - 1);
  for (int level = 0; level < levels; ++level) {
    GridBest local = best;
    long double best_val = objective(target, source, best.a, best.b);
    const double step_local = 2 * step / static_cast<double>(zoom_n - 1);
    for (std::size_t ia = 0; ia < zoom_n; ++ia) {
      const double a = best.a - step + step_local * static_cast<double>(ia);
      for (std::size_t ib = 0; ib < zoom_n; ++ib) {
        const double b = best.b - step + step_local * static_cast<double>(ib);
        const long double v = objective(target, source, a, b);
        if (v < best_val) {
          best_val = v;
          local = {a, b, static_cast<double>(v)};
        }
      }
    }
    best = local;
    step = step_local;
  }
  best.residual = objective(target, source, best.a, best.b);
  return best;
}

/// Textbook Pearson in long double, single formula, no special cases.
inline double pearson(std::span<const double> u, std::span<const double> v)
{
  const long double n = static_cast<long double>(u.size());
  long double su = 0, sv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    su += u[k];
    sv += v[k];
  }
  const long double mu = su / n, mv = sv / n;
  long double c = 0, vu = 0, vv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    c += (u[k] - mu) * (v[k] - mv);
    vu += (u[k] - mu) * (u[k] - mu);
    vv += (v[k] - mv) * (v[k] - mv);
  }
  return static_cast<double>(c / (std::sqrt(vu / n) * std::sqrt(vv / n) * n));
}

} // namespace oracle
