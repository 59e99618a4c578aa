#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <stdexcept>
#include <vector>

namespace rgl::detail {

struct Rule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

template <int N>
Rule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    Rule r;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            r.x.push_back(0.0);
            r.w.push_back(w[i]);
        } else {
            r.x.push_back(-a[i]);
            r.w.push_back(w[i]);
            r.x.push_back(a[i]);
            r.w.push_back(w[i]);
        }
    }
    return r;
}

/// Gauss-Legendre rule with q points on [-1, 1].
inline const Rule& gauss_rule(int q) {
    static const Rule r2 = make_rule<2>(), r3 = make_rule<3>(), r4 = make_rule<4>(), r6 = make_rule<6>(),
                      r8 = make_rule<8>(), r10 = make_rule<10>(), r15 = make_rule<15>(), r20 = make_rule<20>(),
                      r30 = make_rule<30>();
    switch (q) {
        case 2: return r2;
        case 3: return r3;
        case 4: return r4;
        case 6: return r6;
        case 8: return r8;
        case 10: return r10;
        case 15: return r15;
        case 20: return r20;
        case 30: return r30;
        default: throw std::invalid_argument("unsupported Gauss rule size");
    }
}

/// Tensor-product Gauss rule over the box [lo, hi] in d <= 3 dimensions.
template <class F>
double box_gauss(F&& f, const double* lo, const double* hi, int d, int q) {
    const Rule& r = gauss_rule(q);
    const int m = static_cast<int>(r.x.size());
    double half[3], mid[3], t[3];
    double jac = 1.0;
    for (int k = 0; k < d; ++k) {
        half[k] = 0.5 * (hi[k] - lo[k]);
        mid[k] = 0.5 * (hi[k] + lo[k]);
        jac *= half[k];
    }
    int total = 1;
    for (int k = 0; k < d; ++k) total *= m;
    double sum = 0.0;
    for (int flat = 0; flat < total; ++flat) {
        int rem = flat;
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            const int i = rem % m;
            rem /= m;
            t[k] = mid[k] + half[k] * r.x[i];
            w *= r.w[i];
        }
        sum += w * f(t);
    }
    return sum * jac;
}

/// Integral over a box whose integrand is singular only at the corner `c`
/// (c[k] is lo[k] or hi[k]). Geometric grading towards the corner; the
/// dropped innermost box is estimated as a geometric tail with ratio
/// `tail_ratio` (0 to skip).
template <class F>
double corner_graded(F&& f, const double* lo, const double* hi, const bool* at_lo, int d, int q, int levels,
                     double tail_ratio = 0.0) {
    double a[3], b[3];
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
        a[k] = lo[k];
        b[k] = hi[k];
    }
    // current box shrinks by half towards the corner each level; the shell
    // between consecutive boxes is split into 2^d - 1 sub-boxes
    double last = 0.0;
    for (int level = 0; level < levels; ++level) {
        double shell = 0.0;
        double m[3];
        for (int k = 0; k < d; ++k) m[k] = 0.5 * (a[k] + b[k]);
        for (int mask = 1; mask < (1 << d); ++mask) {
            double sl[3], sh[3];
            for (int k = 0; k < d; ++k) {
                const bool far = (mask >> k) & 1;  // far half along axis k
                const bool near_lo = at_lo[k];
                if (far == near_lo) {
                    sl[k] = m[k];
                    sh[k] = b[k];
                } else {
                    sl[k] = a[k];
                    sh[k] = m[k];
                }
            }
            shell += box_gauss(f, sl, sh, d, q);
        }
        total += shell;
        last = shell;
        for (int k = 0; k < d; ++k) {
            if (at_lo[k])
                b[k] = m[k];
            else
                a[k] = m[k];
        }
    }
    if (tail_ratio > 0.0 && tail_ratio < 1.0) total += last * tail_ratio / (1.0 - tail_ratio);
    return total;
}

}  // namespace rgl::detail
