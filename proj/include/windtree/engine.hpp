#pragma once
#include <cstdint>
#include <vector>

#include "windtree/boundary.hpp"
#include "windtree/corridors.hpp"
#include "windtree/model.hpp"
#include "windtree/rng.hpp"
#include "windtree/vec2.hpp"

namespace windtree {

/// Collision state of the billiard map: which lattice cell the scatterer
/// sits in, the arclength s of the collision point on its boundary, and
/// the signed angle phi in [-pi/2, pi/2] from the outward normal to the
/// outgoing velocity (so the outgoing direction is the normal rotated by
/// phi counterclockwise).
struct PhasePoint {
    long long cx = 0, cy = 0;
    double s = 0.0;
    double phi = 0.0;
};

enum class CorridorClass : uint8_t {
    None, Horizontal, Vertical, ObliquePlus, ObliqueMinus
};

enum class FlightEnd : uint8_t {
    Collision,         // regular reflection found
    EscapedMaxLen,     // no collision within max_len (censored flight)
    DegenerateCorner   // r = 0 only: hit an exact rhombus corner
};

struct FlightRecord {
    Vec2 displacement;            // x_end - x_start in plane coordinates
    double length = 0.0;          // = |displacement| (unit speed)
    SurfaceKind start_kind = SurfaceKind::Flat;
    SurfaceKind end_kind = SurfaceKind::Flat;
    CorridorClass corridor_class = CorridorClass::None;
};

struct StepResult {
    PhasePoint hit;               // post-reflection state; valid iff Collision
    FlightRecord flight;
    FlightEnd end = FlightEnd::Collision;
};

/// Billiard dynamics in the equivalent point-particle billiard: scatterers
/// grown by r on the unit lattice, unit speed.  The collision search walks
/// the lattice cells pierced by the ray; since validate_params() bounds
/// the grown scatterer inside the ring of neighboring cells, the only
/// scatterers that can intersect a cell's slice of the ray are the four
/// centered at that cell's corners.
class Engine {
public:
    explicit Engine(const ModelParams& p);

    const ModelParams& params() const { return params_; }
    const ScattererBoundary& boundary() const { return boundary_; }

    Vec2 position_local(const PhasePoint& x) const;  // relative to own cell
    Vec2 outgoing_velocity(const PhasePoint& x) const;

    /// One application of the billiard map; flights longer than max_len
    /// are censored.
    StepResult map(const PhasePoint& x, double max_len = 1e4) const;

    /// Inverse map, computed by reversing time (negate phi, step, negate
    /// phi again).
    StepResult inverse(const PhasePoint& x, double max_len = 1e4) const;

    /// Draw a state from the invariant collision measure
    /// cos(phi) dphi ds / (2 |boundary|).  When grown scatterers of
    /// neighboring cells overlap, boundary points immersed in a neighbor
    /// are rejected; the cell is (0, 0).
    PhasePoint sample_liouville(CounterRng& rng) const;

    CorridorClass classify_flight(Vec2 displacement, double length) const;

    /// Open named corridors used by classify_flight.
    const std::vector<CorridorSpec>& named_corridors() const {
        return named_;
    }

private:
    struct SegPrim {
        Vec2 p0, dir, normal;     // dir = (p1 - p0)/len
        double len = 0.0, s0 = 0.0;
    };
    struct ArcPrim {
        Vec2 center;
        double radius = 0.0;
        double psi_lo = 0.0, psi_hi = 0.0;  // ccw range; full circle allowed
        double s_lo = 0.0;                   // arclength at psi_lo (pre-wrap)
    };

    struct Hit {
        double t = 0.0;
        double s = 0.0;
        Vec2 normal;
        SurfaceKind kind = SurfaceKind::Flat;
        bool corner = false;      // r = 0 segment-endpoint hit
    };

    bool hit_scatterer(Vec2 origin, Vec2 v, Hit& best) const;
    bool point_immersed(Vec2 q) const;

    ModelParams params_;
    ScattererBoundary boundary_;
    std::vector<SegPrim> segs_;
    std::vector<ArcPrim> arcs_;
    std::vector<CorridorSpec> named_;   // open corridors with named labels
    double extent_ = 0.0;               // circumradius of the grown body
    double class_pad_ = 0.0;            // transverse slack for classification
    bool overlap_possible_ = false;
};

} // namespace windtree
