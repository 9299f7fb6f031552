#pragma once
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace windtree {

enum class ScattererKind { WindTree, LorentzDisk };

/// Scatterer family on the unit integer lattice (centers at Z^2).
///
/// WindTree: rhombus with half-angle theta (the acute vertex angle is
/// 2*theta, at the top and bottom vertices), side length a, grown by the
/// moving-disk radius r.  Vertices of the ungrown rhombus sit at
/// (+-a*sin(theta), 0) and (0, +-a*cos(theta)).
/// LorentzDisk: disk of radius disk_radius, grown by r.
struct ModelParams {
    ScattererKind kind = ScattererKind::WindTree;
    double theta = 0.0;
    double a = 0.0;
    double r = 0.0;
    double disk_radius = 0.0;
    // Cached so that rational-tangent models evaluate trig identities
    // exactly (e.g. sin == cos bit-for-bit when tan(theta) = 1).
    double sin_theta = 0.0;
    double cos_theta = 0.0;
    // Exact rational tangent tan(theta) = m/n when known; corridor
    // existence is arithmetically rigid, so exactness matters.
    std::optional<std::pair<long, long>> theta_tan;

    static ModelParams wind_tree(double theta, double a, double r);
    static ModelParams wind_tree_tan(long m, long n, double a, double r);
    static ModelParams lorentz(double R, double r);
    /// Named configurations: "tail", "canonical", "finite", "lorentz".
    static std::optional<ModelParams> preset(std::string_view name);

    /// Half-extent of the grown scatterer along x / y.
    double extent_x() const;
    double extent_y() const;
    /// Radius of a disk (around the center) containing the grown scatterer.
    double circumradius() const;
};

struct ValidationIssue {
    std::string code;     // "TrappingConfiguration" | "NonPositiveDimension"
    std::string message;
};

struct ValidationReport {
    bool ok = false;
    std::vector<ValidationIssue> issues;
    // Informational: theta = pi/4, sqrt(2)/4 <= a < sqrt(2)/2 - 2r and
    // 0 < r < sqrt(2)/8.  In this window every skew straight-line direction
    // is blocked except the two edge-parallel ones, so the only oblique
    // corridors left are the ones carrying flat boundary.
    bool edge_corridor_regime = false;
};

/// Accepts a parameter set or reports every violated constraint.
///
/// A configuration is rejected as trapping when the ungrown scatterers of
/// adjacent cells overlap (the solid bodies intersect), or when the grown
/// scatterer outgrows the neighboring cells entirely.  Grown-boundary
/// overlap alone is allowed: it seals the corridors and produces a finite
/// horizon, which is a legitimate regime, not a malformed geometry.
ValidationReport validate_params(const ModelParams& p);

struct GeometrySummary {
    double perimeter = 0.0;        // |boundary of the grown scatterer|
    double area = 0.0;             // area of the grown scatterer
    double mean_free_path = 0.0;   // pi * (1 - area) / perimeter
};

GeometrySummary geometry_summary(const ModelParams& p);

} // namespace windtree
