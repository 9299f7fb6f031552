#include "windtree/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace windtree {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTEps = 1e-12;      // minimum advance along the ray
constexpr double kGrazeTol = 1e-12;  // |v.n| below this: tangency, no impact
constexpr double kDiscTol = 1e-12;   // ray/circle discriminant cutoff
constexpr double kMinClassifyLen = 5.0;

double wrap2pi(double x) {
    x = std::fmod(x, 2 * kPi);
    if (x < 0) x += 2 * kPi;
    return x;
}

} // namespace

Engine::Engine(const ModelParams& p) : params_(p), boundary_(p) {
    const auto& pieces = boundary_.pieces();
    if (p.kind == ScattererKind::LorentzDisk) {
        ArcPrim a;
        a.center = {0, 0};
        a.radius = p.disk_radius + p.r;
        a.psi_lo = 0.0;
        a.psi_hi = 2 * kPi;
        a.s_lo = 0.0;
        arcs_.push_back(a);
        class_pad_ = 2 * (p.disk_radius + p.r);
    } else {
        for (const auto& b : pieces)
            if (b.kind == SurfaceKind::Flat) {
                SegPrim s;
                s.p0 = b.p0;
                s.dir = (b.p1 - b.p0) * (1.0 / b.len);
                s.normal = b.normal;
                s.len = b.len;
                s.s0 = b.s0;
                segs_.push_back(s);
            }
        if (p.r > 0) {
            for (int i : {2, 4, 6}) {
                ArcPrim a;
                a.center = pieces[i].center;
                a.radius = pieces[i].radius;
                a.psi_lo = pieces[i].psi0;
                a.psi_hi = pieces[i].psi1;
                a.s_lo = pieces[i].s0;
                arcs_.push_back(a);
            }
            // The right-vertex arc is split by s = 0; merge the two halves
            // into one primitive starting at polar angle -theta.
            ArcPrim a;
            a.center = pieces[8].center;
            a.radius = pieces[8].radius;
            a.psi_lo = -p.theta;
            a.psi_hi = p.theta;
            a.s_lo = pieces[8].s0;
            arcs_.push_back(a);
        }
        class_pad_ = 2 * (p.a + p.r);
        overlap_possible_ =
            2 * p.extent_x() > 1.0 || 2 * p.extent_y() > 1.0;
    }
    extent_ = p.circumradius();
    for (const auto& c : enumerate_corridors(p, 8))
        if (c.label != CorridorLabel::ObliqueOther) named_.push_back(c);
}

Vec2 Engine::position_local(const PhasePoint& x) const {
    return boundary_.at(x.s).point;
}

Vec2 Engine::outgoing_velocity(const PhasePoint& x) const {
    BoundaryPoint bp = boundary_.at(x.s);
    return rotated(bp.normal, x.phi);
}

bool Engine::hit_scatterer(Vec2 origin, Vec2 v, Hit& best) const {
    bool improved = false;
    for (const auto& s : segs_) {
        double dn = dot(v, s.normal);
        if (dn >= -kGrazeTol) continue;
        double t = dot(s.p0 - origin, s.normal) / dn;
        if (t <= kTEps || t >= best.t) continue;
        Vec2 hp = origin + t * v;
        double u = dot(hp - s.p0, s.dir);
        if (u < -1e-12 || u > s.len + 1e-12) continue;
        double uc = std::clamp(u, 0.0, s.len);
        best.t = t;
        best.s = boundary_.wrap(s.s0 + uc);
        best.normal = s.normal;
        best.kind = SurfaceKind::Flat;
        best.corner = params_.r == 0.0 &&
                      (uc < 1e-12 || uc > s.len - 1e-12);
        improved = true;
    }
    for (const auto& a : arcs_) {
        Vec2 w = origin - a.center;
        double b = dot(w, v);
        double cc = norm2(w) - a.radius * a.radius;
        double disc = b * b - cc;
        if (disc < kDiscTol) continue;
        double sq = std::sqrt(disc);
        for (double t : {-b - sq, -b + sq}) {
            if (t <= kTEps || t >= best.t) continue;
            Vec2 pos = w + t * v;
            Vec2 n = pos * (1.0 / norm(pos));
            if (dot(v, n) >= -kGrazeTol) continue;
            double dpsi = wrap2pi(std::atan2(pos.y, pos.x) - a.psi_lo);
            double span = a.psi_hi - a.psi_lo;
            if (dpsi > span + 1e-9) continue;
            best.t = t;
            best.s = boundary_.wrap(a.s_lo + a.radius * std::min(dpsi, span));
            best.normal = n;
            best.kind = SurfaceKind::Dispersing;
            best.corner = false;
            improved = true;
            break;
        }
    }
    return improved;
}

StepResult Engine::map(const PhasePoint& x, double max_len) const {
    BoundaryPoint bp = boundary_.at(x.s);
    const Vec2 x0 = bp.point;
    const Vec2 v = rotated(bp.normal, x.phi);

    Hit best;
    best.t = kInf;
    long long bcx = 0, bcy = 0;
    auto test_center = [&](long long ix, long long iy) {
        Vec2 rel = x0 - Vec2{double(ix), double(iy)};
        if (std::abs(cross(rel, v)) >= extent_) return;
        if (dot(rel, v) - extent_ >= 0.0) return;  // body entirely behind
        if (hit_scatterer(rel, v, best)) {
            bcx = ix;
            bcy = iy;
        }
    };

    long long ix = (long long)std::floor(x0.x);
    long long iy = (long long)std::floor(x0.y);
    test_center(ix, iy);
    test_center(ix + 1, iy);
    test_center(ix, iy + 1);
    test_center(ix + 1, iy + 1);

    const int stepx = v.x > 0 ? 1 : (v.x < 0 ? -1 : 0);
    const int stepy = v.y > 0 ? 1 : (v.y < 0 ? -1 : 0);
    const double tdx = stepx ? 1.0 / std::abs(v.x) : kInf;
    const double tdy = stepy ? 1.0 / std::abs(v.y) : kInf;
    double tmx = stepx ? (stepx > 0 ? (double(ix) + 1.0 - x0.x) : (x0.x - double(ix))) / std::abs(v.x)
                       : kInf;
    double tmy = stepy ? (stepy > 0 ? (double(iy) + 1.0 - x0.y) : (x0.y - double(iy))) / std::abs(v.y)
                       : kInf;

    long long guard = 4 * (long long)(max_len) + 64;
    while (guard-- > 0) {
        double t_next = std::min(tmx, tmy);
        if (t_next > best.t || t_next > max_len) break;
        if (tmx <= tmy) {
            ix += stepx;
            tmx += tdx;
            long long col = ix + (stepx > 0 ? 1 : 0);
            test_center(col, iy);
            test_center(col, iy + 1);
        } else {
            iy += stepy;
            tmy += tdy;
            long long row = iy + (stepy > 0 ? 1 : 0);
            test_center(ix, row);
            test_center(ix + 1, row);
        }
    }

    StepResult out;
    out.flight.start_kind = bp.kind;
    if (!(best.t <= max_len)) {
        out.end = FlightEnd::EscapedMaxLen;
        out.flight.displacement = max_len * v;
        out.flight.length = max_len;
        out.flight.end_kind = bp.kind;  // unknown; never reached a surface
        out.flight.corridor_class =
            classify_flight(out.flight.displacement, max_len);
        return out;
    }

    out.flight.displacement = best.t * v;
    out.flight.length = best.t;
    out.flight.end_kind = best.kind;
    out.flight.corridor_class = classify_flight(v, best.t);
    if (best.corner) {
        out.end = FlightEnd::DegenerateCorner;
        return out;
    }
    Vec2 vr = reflected(v, best.normal);
    out.hit.cx = x.cx + bcx;
    out.hit.cy = x.cy + bcy;
    out.hit.s = best.s;
    out.hit.phi = std::atan2(cross(best.normal, vr), dot(best.normal, vr));
    out.end = FlightEnd::Collision;
    return out;
}

StepResult Engine::inverse(const PhasePoint& x, double max_len) const {
    PhasePoint xr = x;
    xr.phi = -x.phi;
    StepResult r = map(xr, max_len);
    r.hit.phi = -r.hit.phi;
    return r;
}

bool Engine::point_immersed(Vec2 q) const {
    // Scatterer at the origin; fold into the first quadrant, where the
    // grown rhombus is bounded by a single edge and its vertex arcs.
    double qx = std::abs(q.x), qy = std::abs(q.y);
    const double st = params_.sin_theta, ct = params_.cos_theta;
    double plane = qx * ct + qy * st - params_.a * st * ct;
    if (plane <= 0.0) return true;  // inside the solid rhombus
    // Distance to the edge segment from (a sin, 0) to (0, a cos).
    Vec2 p0{params_.a * st, 0.0}, p1{0.0, params_.a * ct};
    Vec2 d = p1 - p0;
    double u = std::clamp(dot(Vec2{qx, qy} - p0, d) / norm2(d), 0.0, 1.0);
    double dist = norm(Vec2{qx, qy} - (p0 + u * d));
    return dist < params_.r - 1e-12;
}

PhasePoint Engine::sample_liouville(CounterRng& rng) const {
    const double total = boundary_.total_length();
    for (int tries = 0; tries < 1000; ++tries) {
        double s = rng.next_double() * total;
        double phi = std::asin(2.0 * rng.next_double() - 1.0);
        bool near_junction = false;
        for (const auto& b : boundary_.pieces()) {
            double d = std::abs(s - b.s0);
            d = std::min(d, total - d);
            if (d < 1e-12) {
                near_junction = true;
                break;
            }
        }
        if (near_junction) continue;
        if (overlap_possible_) {
            Vec2 q = boundary_.at(s).point;
            bool immersed = false;
            for (int dx = -1; dx <= 1 && !immersed; ++dx)
                for (int dy = -1; dy <= 1 && !immersed; ++dy) {
                    if (dx == 0 && dy == 0) continue;
                    if (point_immersed(q - Vec2{double(dx), double(dy)}))
                        immersed = true;
                }
            if (immersed) continue;
        }
        return {0, 0, s, phi};
    }
    throw std::runtime_error(
        "sample_liouville: no admissible boundary point found");
}

CorridorClass Engine::classify_flight(Vec2 displacement, double length) const {
    if (!(length > kMinClassifyLen)) return CorridorClass::None;
    CorridorClass cls = CorridorClass::None;
    double best_sin = kInf;
    for (const auto& c : named_) {
        double hyp = std::hypot(double(c.px), double(c.py));
        double sin_ang =
            std::abs(cross(displacement, Vec2{c.px / hyp, c.py / hyp})) /
            length;
        if (sin_ang <= (c.width_eff + class_pad_) / length &&
            sin_ang < best_sin) {
            best_sin = sin_ang;
            switch (c.label) {
                case CorridorLabel::Horizontal:
                    cls = CorridorClass::Horizontal;
                    break;
                case CorridorLabel::Vertical:
                    cls = CorridorClass::Vertical;
                    break;
                case CorridorLabel::ObliquePlus:
                    cls = CorridorClass::ObliquePlus;
                    break;
                case CorridorLabel::ObliqueMinus:
                    cls = CorridorClass::ObliqueMinus;
                    break;
                default:
                    break;
            }
        }
    }
    return cls;
}

} // namespace windtree
