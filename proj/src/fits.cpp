#include "windtree/fits.hpp"

#include <algorithm>
#include <cmath>

namespace windtree {

std::optional<LineFit> fit_line(const std::vector<double>& x,
                                const std::vector<double>& y,
                                const std::vector<double>& w) {
    size_t m = x.size();
    if (m < 3 || y.size() != m || w.size() != m) return std::nullopt;
    double W = 0, Sx = 0, Sy = 0;
    for (size_t i = 0; i < m; ++i) {
        W += w[i];
        Sx += w[i] * x[i];
        Sy += w[i] * y[i];
    }
    if (!(W > 0)) return std::nullopt;
    double xb = Sx / W, yb = Sy / W;
    double Sxx = 0, Sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        Sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        Sxy += w[i] * (x[i] - xb) * (y[i] - yb);
    }
    if (!(Sxx > 0)) return std::nullopt;
    LineFit f;
    f.n_points = int(m);
    f.slope = Sxy / Sxx;
    f.intercept = yb - f.slope * xb;
    double rss = 0, tss = 0;
    for (size_t i = 0; i < m; ++i) {
        double e = y[i] - (f.intercept + f.slope * x[i]);
        rss += w[i] * e * e;
        tss += w[i] * (y[i] - yb) * (y[i] - yb);
    }
    f.r2 = tss > 0 ? 1.0 - rss / tss : 1.0;
    // Weights are treated as relative; the residual scale is estimated.
    double sigma2 = m > 2 ? rss / double(m - 2) : 0.0;
    f.slope_err = std::sqrt(sigma2 / Sxx);
    f.intercept_err = std::sqrt(sigma2 * (1.0 / W + xb * xb / Sxx));
    return f;
}

ScalingFit fit_through_origin(const std::vector<double>& g,
                              const std::vector<double>& y,
                              const std::vector<double>& w) {
    ScalingFit f;
    size_t m = g.size();
    double Sgg = 0, Sgy = 0, Sy = 0, W = 0;
    for (size_t i = 0; i < m; ++i) {
        Sgg += w[i] * g[i] * g[i];
        Sgy += w[i] * g[i] * y[i];
        Sy += w[i] * y[i];
        W += w[i];
    }
    if (!(Sgg > 0) || m == 0) return f;
    f.c = Sgy / Sgg;
    double yb = Sy / W;
    double rss = 0, tss = 0;
    for (size_t i = 0; i < m; ++i) {
        double e = y[i] - f.c * g[i];
        rss += w[i] * e * e;
        tss += w[i] * (y[i] - yb) * (y[i] - yb);
    }
    f.rss = rss;
    f.r2 = tss > 0 ? 1.0 - rss / tss : 1.0;
    f.aic = double(m) * std::log(std::max(rss, 1e-300) / double(m)) + 2.0;
    double sigma2 = m > 1 ? rss / double(m - 1) : 0.0;
    f.c_err = std::sqrt(sigma2 / Sgg);
    return f;
}

ModelSelection select_growth_model(const std::vector<double>& n,
                                   const std::vector<double>& y,
                                   const std::vector<double>& w) {
    ModelSelection sel;
    std::vector<double> g(n.size());
    auto fit_with = [&](auto fn) {
        for (size_t i = 0; i < n.size(); ++i) g[i] = fn(n[i]);
        return fit_through_origin(g, y, w);
    };
    sel.fits[0] = fit_with([](double) { return 1.0; });
    sel.fits[1] = fit_with([](double v) { return std::log(v); });
    sel.fits[2] = fit_with([](double v) {
        double l = std::log(v);
        return l * l;
    });
    int best = 0;
    for (int k = 1; k < 3; ++k)
        if (sel.fits[k].aic < sel.fits[best].aic) best = k;
    sel.best = GrowthModel(best);
    return sel;
}

double ks_uniform(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    double n = double(xs.size());
    double d = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        d = std::max(d, xs[i] - double(i) / n);
        d = std::max(d, double(i + 1) / n - xs[i]);
    }
    return d;
}

namespace {

// Asymptotic Kolmogorov survival function.
double ks_q(double lambda) {
    // Below this the alternating series needs more than 100 terms; the
    // survival probability is 1 to machine accuracy anyway.
    if (lambda < 0.04) return 1.0;
    double sum = 0;
    double sign = 1;
    for (int k = 1; k <= 100; ++k) {
        double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace

KsTwoSample ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = double(a.size()), nb = double(b.size());
    size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double va = a[i], vb = b[j];
        if (va <= vb) ++i;
        if (vb <= va) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    KsTwoSample out;
    out.stat = d;
    double ne = std::sqrt(na * nb / (na + nb));
    out.p = ks_q((ne + 0.12 + 0.11 / ne) * d);
    return out;
}

} // namespace windtree
