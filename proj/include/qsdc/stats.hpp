#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "qsdc/errors.hpp"

namespace qsdc::stats {

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw EstimationError("gamma_p: bad arguments");
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    // Lentz continued fraction for Q(a, x).
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-14) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

// Survival function of the chi-squared distribution with k degrees of freedom.
inline double chi2_sf(double x, int dof) {
    if (x <= 0.0) return 1.0;
    return 1.0 - gamma_p(0.5 * dof, 0.5 * x);
}

// Pearson chi-squared test of uniformity over the given counts; returns the p-value.
inline double chi2_uniformity_pvalue(const std::vector<long>& counts) {
    if (counts.size() < 2) throw EstimationError("chi2 test needs >= 2 cells");
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0) throw EstimationError("chi2 test needs samples");
    const double expected = total / counts.size();
    double chi2 = 0.0;
    for (long c : counts) {
        const double d = c - expected;
        chi2 += d * d / expected;
    }
    return chi2_sf(chi2, static_cast<int>(counts.size()) - 1);
}

// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
inline double beta_inc(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(1.0 - x);
    auto cf = [](double a_, double b_, double x_) {
        double c = 1.0, d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
        if (std::fabs(d) < 1e-300) d = 1e-300;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 300; ++m) {
            const int m2 = 2 * m;
            double num = m * (b_ - m) * x_ / ((a_ + m2 - 1.0) * (a_ + m2));
            d = 1.0 + num * d;
            if (std::fabs(d) < 1e-300) d = 1e-300;
            c = 1.0 + num / c;
            if (std::fabs(c) < 1e-300) c = 1e-300;
            d = 1.0 / d;
            h *= d * c;
            num = -(a_ + m) * (a_ + b_ + m) * x_ / ((a_ + m2) * (a_ + m2 + 1.0));
            d = 1.0 + num * d;
            if (std::fabs(d) < 1e-300) d = 1e-300;
            c = 1.0 + num / c;
            if (std::fabs(c) < 1e-300) c = 1e-300;
            d = 1.0 / d;
            const double del = d * c;
            h *= del;
            if (std::fabs(del - 1.0) < 1e-14) break;
        }
        return h;
    };
    if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_front) * cf(a, b, x) / a;
    return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          b * std::log(1.0 - x) + a * std::log(x)) *
                     cf(b, a, 1.0 - x) / b;
}

// Lower-tail CDF of Student's t with nu degrees of freedom.
inline double student_t_cdf(double t, double nu) {
    const double x = nu / (nu + t * t);
    const double half_tail = 0.5 * beta_inc(0.5 * nu, 0.5, x);
    return t <= 0.0 ? half_tail : 1.0 - half_tail;
}

inline std::vector<double> ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (i + j) + 1.0;  // average rank for ties
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

struct SpearmanResult {
    double rho = 0.0;
    double p_one_sided_negative = 1.0;  // H1: monotonically decreasing
};

inline SpearmanResult spearman(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 4) throw EstimationError("spearman: need >= 4 paired samples");
    const std::vector<double> rx = ranks(x), ry = ranks(y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    SpearmanResult res;
    if (sxx <= 0 || syy <= 0) return res;
    res.rho = sxy / std::sqrt(sxx * syy);
    const double r = std::clamp(res.rho, -0.999999999999, 0.999999999999);
    const double t = r * std::sqrt((n - 2) / (1.0 - r * r));
    res.p_one_sided_negative = student_t_cdf(t, static_cast<double>(n - 2));
    return res;
}

inline double binomial_se(double p, double n) {
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

}  // namespace qsdc::stats
