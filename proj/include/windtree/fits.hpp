#pragma once
#include <array>
#include <optional>
#include <stdexcept>
#include <vector>

namespace windtree {

/// Thrown when an estimator has too few events to produce a fit.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Weighted least squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double slope_err = 0.0, intercept_err = 0.0;
    double r2 = 0.0;
    int n_points = 0;
};

std::optional<LineFit> fit_line(const std::vector<double>& x,
                                const std::vector<double>& y,
                                const std::vector<double>& w);

/// Tail fit CCDF(L) = c * L^-beta, carried out as a weighted line fit of
/// log CCDF against log L.
struct PowerLawFit {
    double beta = 0.0, c = 0.0;
    double beta_err = 0.0;
    double r2 = 0.0;
    int n_bins = 0;
};

/// Weighted through-origin fit y = c * g plus the quality numbers used
/// for model comparison.  aic = m*log(rss/m) + 2 (one parameter).
struct ScalingFit {
    double c = 0.0;
    double c_err = 0.0;
    double rss = 0.0;
    double aic = 0.0;
    double r2 = 0.0;
};

ScalingFit fit_through_origin(const std::vector<double>& g,
                              const std::vector<double>& y,
                              const std::vector<double>& w);

enum class GrowthModel { Constant, LogN, LogN2 };

struct ModelSelection {
    GrowthModel best = GrowthModel::Constant;
    std::array<ScalingFit, 3> fits;  // indexed by GrowthModel
};

/// Compare y(n) ~ c, c*ln n, c*(ln n)^2 by AIC.
ModelSelection select_growth_model(const std::vector<double>& n,
                                   const std::vector<double>& y,
                                   const std::vector<double>& w);

/// One-sample Kolmogorov-Smirnov distance against U[0,1].
double ks_uniform(std::vector<double> xs);

struct KsTwoSample {
    double stat = 0.0;
    double p = 1.0;
};

KsTwoSample ks_two_sample(std::vector<double> a, std::vector<double> b);

} // namespace windtree
