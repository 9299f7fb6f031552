#include "windtree/corridors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace windtree {

namespace {

CorridorLabel label_for(long px, long py) {
    if (px == 1 && py == 0) return CorridorLabel::Horizontal;
    if (px == 0 && py == 1) return CorridorLabel::Vertical;
    if (px == 1 && py == 1) return CorridorLabel::ObliquePlus;
    if (px == 1 && py == -1) return CorridorLabel::ObliqueMinus;
    return CorridorLabel::ObliqueOther;
}

CorridorSpec make_spec(long px, long py, CorridorType type, double width_math,
                       double r) {
    CorridorSpec c;
    c.px = int(px);
    c.py = int(py);
    c.type = type;
    c.label = label_for(px, py);
    c.width_math = width_math;
    c.width_eff = width_math - 2 * r;
    return c;
}

// True iff direction (p, |q|) is parallel to a rhombus edge, i.e.
// tan(theta) == p/|q| as exact rationals when available.
bool edge_parallel(const ModelParams& mp, long p, long q) {
    if (mp.kind != ScattererKind::WindTree) return false;
    q = std::labs(q);
    if (p <= 0 || q <= 0) return false;
    if (mp.theta_tan) {
        auto [m, n] = *mp.theta_tan;
        return p == m && q == n;
    }
    return std::abs(std::tan(mp.theta) - double(p) / double(q)) < 1e-12;
}

} // namespace

std::array<CorridorSpec, 2> axis_corridors(const ModelParams& p) {
    double wh, wv;
    if (p.kind == ScattererKind::LorentzDisk) {
        wh = wv = 1.0 - 2 * p.disk_radius;
    } else {
        wh = 1.0 - 2 * p.a * p.cos_theta;
        wv = 1.0 - 2 * p.a * p.sin_theta;
    }
    return {make_spec(1, 0, CorridorType::TypeI, wh, p.r),
            make_spec(0, 1, CorridorType::TypeI, wv, p.r)};
}

double direction_width(const ModelParams& p, long px, long qy) {
    if (px == 0 && qy == 0)
        throw std::invalid_argument("direction_width: zero direction");
    long g = std::gcd(std::labs(px), std::labs(qy));
    px /= g;
    qy /= g;
    double hyp = std::hypot(double(px), double(qy));
    double support;  // support radius of the scatterer along the normal
    if (p.kind == ScattererKind::LorentzDisk) {
        support = p.disk_radius;
        return 1.0 / hyp - 2 * support;
    }
    support = p.a *
              std::max(p.sin_theta * std::labs(qy), p.cos_theta * std::labs(px)) /
              hyp;
    return 1.0 / hyp - 2 * support;
}

double type2_width_rational(const ModelParams& p, long m, long n) {
    double h2 = double(m * m + n * n);
    double num = double(m + n - (n + m - 1) / m * m);  // m+n - m*ceil(n/m)
    return num / std::sqrt(h2) - 2.0 * double(m) * double(n) * p.a / h2;
}

double type2_width_trig(const ModelParams& p, long m, long n) {
    double ceil_nm = double((n + m - 1) / m);
    return p.sin_theta + p.cos_theta - ceil_nm * p.sin_theta -
           p.a * 2 * p.sin_theta * p.cos_theta;
}

std::optional<CorridorSpec> oblique_type2(const ModelParams& p, long m, long n) {
    if (m <= 0 || n <= 0 || m > n)
        throw std::invalid_argument("oblique_type2: need 0 < m <= n");
    long g = std::gcd(m, n);
    m /= g;
    n /= g;
    if (!edge_parallel(p, m, n)) return std::nullopt;
    double w = type2_width_rational(p, m, n);
    if (w <= kWidthTol) return std::nullopt;
    return make_spec(m, n, CorridorType::TypeII, w, p.r);
}

std::optional<CorridorSpec> oblique_type1(const ModelParams& p, long m, long n,
                                          int sign) {
    if (m <= 0 || n <= 0)
        throw std::invalid_argument("oblique_type1: need m, n >= 1");
    if (p.kind != ScattererKind::WindTree)
        throw std::invalid_argument("oblique_type1: rhombus scatterers only");
    long g = std::gcd(m, n);
    m /= g;
    n /= g;
    if (edge_parallel(p, m, n))
        throw std::invalid_argument("oblique_type1: direction is edge-parallel");

    double h = std::hypot(double(m), double(n));
    double tan_alpha = double(m) / double(n);
    double tan_theta = p.sin_theta / p.cos_theta;
    double w;
    if (m > n) {
        double num = double(n + m - (m + n - 1) / n * n);
        w = (num - 2 * p.a * double(m) * p.cos_theta) / h;
    } else if (tan_alpha < tan_theta) {
        double num = double(n + m - (n + m - 1) / m * m);
        w = (num - 2 * p.a * double(n) * p.sin_theta) / h;
    } else {
        double num = double(n + m - (n + m - 1) / m * m);
        w = (num - 2 * p.a * double(m) * p.cos_theta) / h;
    }
    if (w <= kWidthTol) return std::nullopt;
    long px = m, py = n;
    if (sign < 0) py = -n;
    return make_spec(px, py, CorridorType::TypeI, w, p.r);
}

std::vector<CorridorSpec> enumerate_corridors(const ModelParams& p,
                                              int max_denom) {
    std::vector<CorridorSpec> out;
    auto consider = [&](long px, long py) {
        double w = direction_width(p, px, py);
        CorridorType type = edge_parallel(p, px, py) ? CorridorType::TypeII
                                                     : CorridorType::TypeI;
        CorridorSpec c = make_spec(px, py, type, w, p.r);
        if (c.open()) out.push_back(c);
    };
    consider(1, 0);
    consider(0, 1);
    for (long px = 1; px <= max_denom; ++px)
        for (long qy = 1; qy <= max_denom; ++qy) {
            if (std::gcd(px, qy) != 1) continue;
            consider(px, qy);
            consider(px, -qy);
        }
    std::sort(out.begin(), out.end(),
              [](const CorridorSpec& a, const CorridorSpec& b) {
                  if (a.width_eff != b.width_eff)
                      return a.width_eff > b.width_eff;
                  long sa = std::labs(a.px) + std::labs(a.py);
                  long sb = std::labs(b.px) + std::labs(b.py);
                  if (sa != sb) return sa < sb;
                  if (a.px != b.px) return a.px < b.px;
                  return a.py < b.py;
              });
    return out;
}

HorizonRegime classify_regime(const ModelParams& p, int max_denom) {
    auto open = enumerate_corridors(p, max_denom);
    if (open.empty()) return HorizonRegime::FiniteHorizon;
    for (const auto& c : open)
        if (c.type == CorridorType::TypeII)
            return HorizonRegime::InfiniteWithTypeII;
    return HorizonRegime::InfiniteTypeIOnly;
}

SuppressionSup type1_suppression_sup(int max_denom) {
    if (max_denom < 3)
        throw std::invalid_argument("type1_suppression_sup: max_denom >= 3");
    SuppressionSup best;
    const double s2 = std::sqrt(2.0);
    for (long m = 2; m < max_denom; ++m)
        for (long n = m + 1; n <= max_denom; ++n) {
            if (std::gcd(m, n) != 1) continue;
            double v = double(n % m) / (s2 * double(n));
            if (v > best.value) best = {v, m, n};
        }
    return best;
}

double tangent_endpoint_threshold(const ModelParams& p, const CorridorSpec& c) {
    if (p.kind != ScattererKind::WindTree || p.r <= 0.0)
        throw std::invalid_argument(
            "tangent_endpoint_threshold: rhombus scatterers with r > 0 only");
    if (c.type != CorridorType::TypeI || !c.open())
        throw std::invalid_argument(
            "tangent_endpoint_threshold: open TypeI axis corridor required");
    if (c.label == CorridorLabel::Horizontal)
        return c.width_eff / (p.r * (1.0 - p.sin_theta)) + 2.0;
    if (c.label == CorridorLabel::Vertical)
        return c.width_eff / (p.r * (1.0 - p.cos_theta)) + 2.0;
    throw std::invalid_argument(
        "tangent_endpoint_threshold: axis corridors only");
}

} // namespace windtree
