#pragma once
#include <vector>

#include "windtree/model.hpp"
#include "windtree/vec2.hpp"

namespace windtree {

enum class SurfaceKind { Flat, Dispersing };

/// One maximal smooth piece of the grown-scatterer boundary: either a flat
/// edge (a translate of a rhombus side) or a circular arc of radius r
/// around a vertex.  Pieces are listed counterclockwise; arc angles are
/// polar angles of the outward normal.
struct BoundaryPiece {
    SurfaceKind kind = SurfaceKind::Flat;
    double s0 = 0.0;   // arclength at the start of the piece
    double len = 0.0;
    // Flat pieces.
    Vec2 p0, p1, normal;
    // Dispersing pieces.
    Vec2 center;
    double radius = 0.0;
    double psi0 = 0.0, psi1 = 0.0;
};

struct BoundaryPoint {
    Vec2 point;
    Vec2 normal;           // outward unit normal
    SurfaceKind kind = SurfaceKind::Flat;
    int piece = 0;
};

/// Arclength parameterization of one grown scatterer centered at the
/// origin.  s = 0 is the rightmost boundary point and s increases
/// counterclockwise, so the right vertex arc appears split into a leading
/// and a trailing piece.  The curve is C^1: consecutive pieces share both
/// endpoint and normal (arcs meet the edges at the tangency points).
class ScattererBoundary {
public:
    explicit ScattererBoundary(const ModelParams& p);

    double total_length() const { return total_; }
    const std::vector<BoundaryPiece>& pieces() const { return pieces_; }

    BoundaryPoint at(double s) const;
    double wrap(double s) const;

private:
    std::vector<BoundaryPiece> pieces_;
    double total_ = 0.0;
};

} // namespace windtree
