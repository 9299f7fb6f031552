#include "windtree/boundary.hpp"

#include <cmath>
#include <numbers>

namespace windtree {

namespace {

constexpr double kPi = std::numbers::pi;

BoundaryPiece make_arc(Vec2 center, double radius, double psi0, double psi1) {
    BoundaryPiece b;
    b.kind = SurfaceKind::Dispersing;
    b.center = center;
    b.radius = radius;
    b.psi0 = psi0;
    b.psi1 = psi1;
    b.len = radius * (psi1 - psi0);
    return b;
}

BoundaryPiece make_edge(Vec2 v0, Vec2 v1, Vec2 normal, double r) {
    BoundaryPiece b;
    b.kind = SurfaceKind::Flat;
    b.p0 = v0 + r * normal;
    b.p1 = v1 + r * normal;
    b.normal = normal;
    b.len = norm(v1 - v0);
    return b;
}

} // namespace

ScattererBoundary::ScattererBoundary(const ModelParams& p) {
    if (p.kind == ScattererKind::LorentzDisk) {
        pieces_.push_back(make_arc({0, 0}, p.disk_radius + p.r, 0, 2 * kPi));
    } else {
        const double st = p.sin_theta, ct = p.cos_theta, th = p.theta;
        const Vec2 right{p.a * st, 0}, top{0, p.a * ct};
        const Vec2 left = -right, bottom = -top;
        pieces_.push_back(make_arc(right, p.r, 0, th));
        pieces_.push_back(make_edge(right, top, {ct, st}, p.r));
        pieces_.push_back(make_arc(top, p.r, th, kPi - th));
        pieces_.push_back(make_edge(top, left, {-ct, st}, p.r));
        pieces_.push_back(make_arc(left, p.r, kPi - th, kPi + th));
        pieces_.push_back(make_edge(left, bottom, {-ct, -st}, p.r));
        pieces_.push_back(make_arc(bottom, p.r, kPi + th, 2 * kPi - th));
        pieces_.push_back(make_edge(bottom, right, {ct, -st}, p.r));
        pieces_.push_back(make_arc(right, p.r, 2 * kPi - th, 2 * kPi));
    }
    double s = 0.0;
    for (auto& b : pieces_) {
        b.s0 = s;
        s += b.len;
    }
    total_ = s;
}

double ScattererBoundary::wrap(double s) const {
    s = std::fmod(s, total_);
    if (s < 0) s += total_;
    return s;
}

BoundaryPoint ScattererBoundary::at(double s) const {
    s = wrap(s);
    // Nine pieces at most; a linear scan beats binary search here.
    int i = int(pieces_.size()) - 1;
    for (int k = 0; k + 1 < int(pieces_.size()); ++k) {
        if (s < pieces_[k].s0 + pieces_[k].len) {
            i = k;
            break;
        }
    }
    const BoundaryPiece& b = pieces_[i];
    BoundaryPoint out;
    out.kind = b.kind;
    out.piece = i;
    if (b.kind == SurfaceKind::Flat) {
        double u = (s - b.s0) / b.len;
        out.point = b.p0 + u * (b.p1 - b.p0);
        out.normal = b.normal;
    } else {
        double psi = b.psi0 + (s - b.s0) / b.radius;
        out.normal = {std::cos(psi), std::sin(psi)};
        out.point = b.center + b.radius * out.normal;
    }
    return out;
}

} // namespace windtree
