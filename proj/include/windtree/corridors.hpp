#pragma once
#include <array>
#include <optional>
#include <vector>

#include "windtree/model.hpp"

namespace windtree {

/// TypeI corridors are bounded by tangent lines touching only the vertex
/// arcs; TypeII corridors run parallel to the rhombus edges, so their
/// boundary carries flat pieces.  Only TypeII corridors support runs of
/// neutral (flat) reflections.
enum class CorridorType { TypeI, TypeII };

enum class CorridorLabel { Horizontal, Vertical, ObliquePlus, ObliqueMinus,
                           ObliqueOther };

/// Width tolerance: widths within this of zero count as closed.  Keeps
/// knife-edge configurations (widths that vanish algebraically but come
/// out as +-1 ulp in floating point) classified deterministically.
inline constexpr double kWidthTol = 1e-12;

struct CorridorSpec {
    // Reduced integer direction vector of the corridor axis.
    int px = 0, py = 0;
    CorridorType type = CorridorType::TypeI;
    CorridorLabel label = CorridorLabel::ObliqueOther;
    double width_math = 0.0;  // strip width for a point particle
    double width_eff = 0.0;   // width_math - 2r: width seen by the disk
    bool open() const { return width_eff > kWidthTol; }
};

/// The two lattice-axis corridors (always TypeI).
std::array<CorridorSpec, 2> axis_corridors(const ModelParams& p);

/// Point-particle corridor width for a reduced direction (p, q), computed
/// by projecting the scatterer and the lattice onto the direction's normal:
/// lattice lines project to a grid of spacing 1/hypot(p, q) and the
/// scatterer blocks a band of twice its support radius.  This bound is
/// tight for every direction.
double direction_width(const ModelParams& p, long px, long qy);

/// Closed forms for the edge-parallel corridor width, valid when
/// tan(theta) = m/n.  The two algebraic forms agree to rounding error;
/// both are exposed so that consistency is testable.
double type2_width_rational(const ModelParams& p, long m, long n);
double type2_width_trig(const ModelParams& p, long m, long n);

/// Edge-parallel (TypeII) corridor along direction (m, n), present iff
/// tan(theta) = m/n (0 < m <= n reduced) and the width is positive.  The
/// mirror corridor along (m, -n) exists under the same condition.
std::optional<CorridorSpec> oblique_type2(const ModelParams& p, long m, long n);

/// Skew TypeI corridor along direction (sign*m, n) where m/n is the
/// tangent of the angle to the +y axis, computed from the closed-form
/// width cases.  Directions parallel to an axis or to an edge are not
/// skew; they throw std::invalid_argument.
///
/// The case formulas can overstate the width when the residue
/// n + m - m*ceil(n/m) exceeds 1; enumerate_corridors() therefore relies
/// on direction_width() instead and this function only evaluates the
/// closed forms as stated.
std::optional<CorridorSpec> oblique_type1(const ModelParams& p, long m, long n,
                                          int sign = +1);

/// All open corridors with direction components bounded by max_denom,
/// widest first (ties ordered by |p|+|q|, then p, then q).  Uses the
/// projection width for every direction.
std::vector<CorridorSpec> enumerate_corridors(const ModelParams& p,
                                              int max_denom = 64);

enum class HorizonRegime { FiniteHorizon, InfiniteTypeIOnly,
                           InfiniteWithTypeII };

HorizonRegime classify_regime(const ModelParams& p, int max_denom = 64);

/// At theta = pi/4, how close the skew directions with residue >= 2 come
/// to the closure threshold sqrt(2)/4: the maximum over reduced pairs
/// 2 <= m < n <= max_denom of (n + m - m*ceil(n/m)) / (sqrt(2)*n).
/// The m = 1 family attains sqrt(2)/4 exactly (at n = 2) and is excluded;
/// over the remaining directions the value stays strictly below sqrt(2)/4
/// and increases with max_denom.  Requires max_denom >= 3.
struct SuppressionSup {
    double value = 0.0;
    long m = 0, n = 0;  // argmax pair
};
SuppressionSup type1_suppression_sup(int max_denom);

/// Flight length along an open axis corridor above which both endpoints
/// of the flight necessarily lie on the dispersing arc caps.  WindTree
/// axis corridors only; requires r > 0 and an open corridor.
double tangent_endpoint_threshold(const ModelParams& p, const CorridorSpec& c);

/// Scale of the tangency approach of long corridor flights: an arc-cap
/// collision that continues a long flight happens within this arclength
/// of the exact tangency point.
inline double tangency_proximity_scale(const ModelParams& p) {
    return p.r * (1.5707963267948966 - p.theta);
}

} // namespace windtree
