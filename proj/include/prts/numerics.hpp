#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace prts {

/// Standard normal CDF, Phi(z).
double normal_cdf(double z);

/// Standard normal upper tail, P(Z > z). Accurate deep into the tail
/// (down to ~1e-300) where 1 - normal_cdf(z) would cancel.
double normal_sf(double z);

/// Standard normal density.
double normal_pdf(double z);

struct QuadratureOptions {
    double rel_tol = 1e-9;
    double abs_floor = 1e-18;
    int max_intervals = 4000;
};

/// Globally adaptive Gauss-Kronrod 15(7) quadrature of f on [a, b].
/// `breakpoints` seeds interval edges (kinks of the integrand); values
/// outside (a, b) are ignored. Throws std::runtime_error if the interval
/// budget is exhausted before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints = {},
                 const QuadratureOptions& opt = {});

/// Root of f on [lo, hi] by bisection; requires a sign change.
/// Stops when the bracket width falls below xtol.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol);

/// Smallest x in [lo, hi] with pred(x) true, assuming pred is monotone
/// (false below the boundary, true above). pred(hi) must be true.
double bisect_boundary(const std::function<bool(double)>& pred, double lo,
                       double hi, double xtol);

/// Maximizer of a unimodal f on [a, b] by golden-section search.
double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol);

/// splitmix64 step; used to derive independent per-worker seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Deterministic seed for worker `index` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace prts
