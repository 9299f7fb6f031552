#include "windtree/model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace windtree {

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams finish_wind_tree(ModelParams p) {
    p.kind = ScattererKind::WindTree;
    return p;
}

} // namespace

ModelParams ModelParams::wind_tree(double theta, double a, double r) {
    ModelParams p;
    p.theta = theta;
    p.a = a;
    p.r = r;
    p.sin_theta = std::sin(theta);
    p.cos_theta = std::cos(theta);
    return finish_wind_tree(p);
}

ModelParams ModelParams::wind_tree_tan(long m, long n, double a, double r) {
    if (m <= 0 || n <= 0)
        throw std::invalid_argument("wind_tree_tan: tangent must be positive");
    long g = std::gcd(m, n);
    m /= g;
    n /= g;
    ModelParams p;
    double h = std::hypot(double(m), double(n));
    p.theta = std::atan2(double(m), double(n));
    p.a = a;
    p.r = r;
    // Shared normalization keeps sin/cos exactly equal when m == n.
    p.sin_theta = double(m) / h;
    p.cos_theta = double(n) / h;
    p.theta_tan = std::pair<long, long>{m, n};
    return finish_wind_tree(p);
}

ModelParams ModelParams::lorentz(double R, double r) {
    ModelParams p;
    p.kind = ScattererKind::LorentzDisk;
    p.disk_radius = R;
    p.r = r;
    return p;
}

std::optional<ModelParams> ModelParams::preset(std::string_view name) {
    if (name == "canonical") return wind_tree_tan(1, 1, 0.4, 0.1);
    if (name == "tail") return wind_tree_tan(1, 1, std::sqrt(2.0) / 4.0, 0.05);
    if (name == "finite") return wind_tree_tan(1, 1, 0.4, 0.25);
    if (name == "lorentz") return lorentz(0.3, 0.1);
    return std::nullopt;
}

double ModelParams::extent_x() const {
    if (kind == ScattererKind::LorentzDisk) return disk_radius + r;
    return a * sin_theta + r;
}

double ModelParams::extent_y() const {
    if (kind == ScattererKind::LorentzDisk) return disk_radius + r;
    return a * cos_theta + r;
}

double ModelParams::circumradius() const {
    return std::max(extent_x(), extent_y());
}

ValidationReport validate_params(const ModelParams& p) {
    ValidationReport rep;
    auto fail = [&rep](const char* code, std::string msg) {
        rep.issues.push_back({code, std::move(msg)});
    };

    if (!(p.r >= 0.0) || !std::isfinite(p.r))
        fail("NonPositiveDimension", "particle radius r must be >= 0");

    if (p.kind == ScattererKind::LorentzDisk) {
        if (!(p.disk_radius > 0.0) || !std::isfinite(p.disk_radius))
            fail("NonPositiveDimension", "disk radius must be > 0");
        else if (!(p.disk_radius + p.r < 0.5))
            fail("TrappingConfiguration",
                 "grown disks of adjacent cells overlap: R + r >= 1/2");
    } else {
        if (!(p.a > 0.0) || !std::isfinite(p.a))
            fail("NonPositiveDimension", "side length a must be > 0");
        if (!(p.theta > 0.0) || !(p.theta <= kPi / 4 + 1e-12))
            fail("NonPositiveDimension", "theta must lie in (0, pi/4]");
        if (rep.issues.empty()) {
            // Solid rhombi of adjacent cells must not interpenetrate.
            if (p.a * p.cos_theta > 0.5 || p.a * p.sin_theta > 0.5)
                fail("TrappingConfiguration",
                     "rhombi of adjacent cells overlap: a*cos(theta) > 1/2");
            // The grown body must stay inside the 8 neighboring cells so a
            // scatterer can only be met while traversing a cell it touches.
            else if (p.extent_x() >= 1.0 - 1e-9 || p.extent_y() >= 1.0 - 1e-9)
                fail("TrappingConfiguration",
                     "grown scatterer reaches beyond the neighboring cells");
        }
    }

    rep.ok = rep.issues.empty();

    if (rep.ok && p.kind == ScattererKind::WindTree) {
        const double s2 = std::sqrt(2.0);
        bool quarter_pi = std::abs(p.theta - kPi / 4) < 1e-12;
        rep.edge_corridor_regime = quarter_pi && p.r > 0.0 && p.r < s2 / 8 &&
                                   p.a >= s2 / 4 - 1e-12 &&
                                   p.a < s2 / 2 - 2 * p.r;
    }
    return rep;
}

GeometrySummary geometry_summary(const ModelParams& p) {
    GeometrySummary g;
    if (p.kind == ScattererKind::LorentzDisk) {
        double rho = p.disk_radius + p.r;
        g.perimeter = 2 * kPi * rho;
        g.area = kPi * rho * rho;
    } else {
        // Grown rhombus: original area + perimeter * r + pi r^2.
        g.perimeter = 4 * p.a + 2 * kPi * p.r;
        g.area = p.a * p.a * (2 * p.sin_theta * p.cos_theta) +
                 4 * p.a * p.r + kPi * p.r * p.r;
    }
    g.mean_free_path = kPi * (1.0 - g.area) / g.perimeter;
    return g;
}

} // namespace windtree
