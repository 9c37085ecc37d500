#include "prts/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace prts {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

namespace {

// Gauss-Kronrod 15(7) nodes and weights on [-1, 1] (QUADPACK values).
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct GkResult {
    double value;
    double error;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fc = f(c);
    double result_g = fc * kWg[3];
    double result_k = fc * kWgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        result_k += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) result_g += kWg[j / 2] * (f1 + f2);
    }
    result_k *= h;
    result_g *= h;
    return {result_k, std::abs(result_k - result_g)};
}

struct Interval {
    double a, b, value, error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints,
                 const QuadratureOptions& opt) {
    if (!(b > a)) return 0.0;

    std::vector<double> edges{a, b};
    for (double p : breakpoints)
        if (p > a && p < b) edges.push_back(p);
    std::sort(edges.begin(), edges.end());

    std::priority_queue<Interval> heap;
    double total = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        GkResult r = gk15(f, edges[i], edges[i + 1]);
        heap.push({edges[i], edges[i + 1], r.value, r.error});
        total += r.value;
        err += r.error;
    }

    int used = static_cast<int>(heap.size());
    while (err > std::max(opt.abs_floor, opt.rel_tol * std::abs(total))) {
        if (used >= opt.max_intervals)
            throw std::runtime_error("integrate: interval budget exhausted");
        Interval worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        GkResult left = gk15(f, worst.a, mid);
        GkResult right = gk15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push({worst.a, mid, left.value, left.error});
        heap.push({mid, worst.b, right.value, right.error});
        ++used;
    }
    return total;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw std::invalid_argument("bisect_root: no sign change in bracket");
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double bisect_boundary(const std::function<bool(double)>& pred, double lo,
                       double hi, double xtol) {
    if (!pred(hi))
        throw std::invalid_argument("bisect_boundary: predicate false at hi");
    if (pred(lo)) return lo;
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        if (pred(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double golden_max(const std::function<double(double)>& f, double a, double b,
                  double xtol) {
    static const double gr = 0.6180339887498948482;
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > xtol) {
        if (fc >= fd) {  // ties move left, toward smaller thresholds
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master;
    std::uint64_t z = 0;
    for (std::uint64_t i = 0; i <= index; ++i) z = splitmix64(s);
    return z;
}

}  // namespace prts
