#include <doctest.h>

#include <windtree/engine.hpp>
#include <windtree/fits.hpp>

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace windtree;

namespace {

constexpr double kPi = std::numbers::pi;

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

Vec2 global_position(const Engine& eng, const PhasePoint& x) {
    return eng.position_local(x) + Vec2{double(x.cx), double(x.cy)};
}

double wrapped_dist(double a, double b, double total) {
    double d = std::abs(a - b);
    return std::min(d, total - d);
}

// Arclength of the arc-cap apex whose outward normal points along +y, -y,
// +x, -x (in that order).
std::array<double, 4> cap_apexes(const Engine& eng) {
    const auto& pc = eng.boundary().pieces();
    double r = eng.params().r, th = eng.params().theta;
    return {pc[2].s0 + r * (kPi / 2 - th), pc[6].s0 + r * (kPi / 2 - th),
            0.0, pc[4].s0 + r * th};
}

} // namespace

TEST_CASE("engine: map agrees with the brute-force oracle") {
    for (const char* name : {"tail", "canonical", "lorentz"}) {
        ModelParams p = *ModelParams::preset(name);
        Engine eng(p);
        int collisions = 0;
        for (int i = 0; i < 1000; ++i) {
            CounterRng rng(501, uint64_t(i));
            PhasePoint x = eng.sample_liouville(rng);
            Vec2 o = global_position(eng, x);
            Vec2 v = eng.outgoing_velocity(x);
            StepResult st = eng.map(x, 30.0);
            auto tr = oracle::trace(p, o, v, 30.0);
            INFO(name, " state ", i);
            if (st.end == FlightEnd::Collision) {
                REQUIRE(tr.hit);
                CHECK(st.hit.cx == tr.cx);
                CHECK(st.hit.cy == tr.cy);
                CHECK(near(st.flight.length, tr.t, 1e-9));
                CHECK(norm(global_position(eng, st.hit) - tr.point) < 1e-9);
                CHECK(norm(o + st.flight.displacement - tr.point) < 1e-9);
                ++collisions;
            } else {
                CHECK_FALSE(tr.hit);
            }
        }
        CHECK(collisions > 900);  // max_len 30 censors only rare flights
    }
}

TEST_CASE("engine: time reversal inverts the map") {
    for (const char* name : {"tail", "lorentz"}) {
        Engine eng(*ModelParams::preset(name));
        double worst = 0.0;
        int used = 0;
        for (int i = 0; i < 10000; ++i) {
            CounterRng rng(733, uint64_t(i));
            PhasePoint x = eng.sample_liouville(rng);
            StepResult st = eng.map(x);
            if (st.end != FlightEnd::Collision) continue;
            StepResult back = eng.inverse(st.hit);
            REQUIRE(back.end == FlightEnd::Collision);
            REQUIRE(back.hit.cx == x.cx);
            REQUIRE(back.hit.cy == x.cy);
            double total = eng.boundary().total_length();
            worst = std::max(worst, wrapped_dist(back.hit.s, x.s, total));
            worst = std::max(worst, std::abs(back.hit.phi - x.phi));
            ++used;
        }
        INFO(name, " worst reversal error ", worst);
        CHECK(used > 9900);
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("engine: flight record invariants") {
    for (const char* name : {"tail", "canonical", "finite", "lorentz"}) {
        ModelParams p = *ModelParams::preset(name);
        Engine eng(p);
        for (int i = 0; i < 200; ++i) {
            CounterRng rng(88, uint64_t(i));
            PhasePoint x = eng.sample_liouville(rng);
            StepResult st = eng.map(x);
            CHECK(near(norm(st.flight.displacement), st.flight.length,
                       1e-12 * (1 + st.flight.length)));
            if (st.end != FlightEnd::Collision) continue;
            // No interior point of the flight penetrates a scatterer.
            Vec2 o = global_position(eng, x);
            Vec2 v = eng.outgoing_velocity(x);
            for (double f : {0.25, 0.5, 0.75}) {
                Vec2 q = o + (f * st.flight.length) * v;
                long long qx = (long long)std::llround(q.x);
                long long qy = (long long)std::llround(q.y);
                for (long long dx = -1; dx <= 1; ++dx)
                    for (long long dy = -1; dy <= 1; ++dy)
                        CHECK(oracle::dist_grown(
                                  p, q,
                                  Vec2{double(qx + dx), double(qy + dy)}) >
                              -1e-9);
            }
        }
    }
}

TEST_CASE("engine: liouville sampler ranges and invariance") {
    Engine eng(*ModelParams::preset("tail"));
    double total = eng.boundary().total_length();
    double cos_sum = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        CounterRng rng(12, uint64_t(i));
        PhasePoint x = eng.sample_liouville(rng);
        CHECK(x.cx == 0);
        CHECK(x.cy == 0);
        CHECK(x.s >= 0.0);
        CHECK(x.s < total);
        CHECK(std::abs(x.phi) < kPi / 2);
        cos_sum += std::cos(x.phi);
    }
    // <cos phi> = pi/4 under the collision measure.
    CHECK(near(cos_sum / n, kPi / 4, 0.008));

    // One map application preserves the measure: s stays uniform and
    // sin(phi) stays uniform (Kolmogorov-Smirnov at 1.63/sqrt(n), ~1%).
    std::vector<double> us, up;
    for (int i = 0; i < 100000; ++i) {
        CounterRng rng(4242, uint64_t(i));
        PhasePoint x = eng.sample_liouville(rng);
        StepResult st = eng.map(x);
        if (st.end != FlightEnd::Collision) continue;
        us.push_back(st.hit.s / total);
        up.push_back((std::sin(st.hit.phi) + 1) / 2);
    }
    double thresh = 1.63 / std::sqrt(double(us.size()));
    CHECK(ks_uniform(us) < thresh);
    CHECK(ks_uniform(up) < thresh);
}

TEST_CASE("engine: sampler rejects points immersed in a neighbor") {
    ModelParams p = *ModelParams::preset("finite");  // grown bodies overlap
    Engine eng(p);
    for (int i = 0; i < 2000; ++i) {
        CounterRng rng(3030, uint64_t(i));
        PhasePoint x = eng.sample_liouville(rng);
        Vec2 q = eng.position_local(x);
        for (long long dx = -1; dx <= 1; ++dx)
            for (long long dy = -1; dy <= 1; ++dy) {
                if (dx == 0 && dy == 0) continue;
                CHECK(oracle::dist_grown(p, q, Vec2{double(dx), double(dy)}) >
                      -1e-9);
            }
    }
}

TEST_CASE("engine: period-2 bounce between facing apexes") {
    ModelParams p = *ModelParams::preset("canonical");
    Engine eng(p);
    const auto& pc = eng.boundary().pieces();
    double apex_s = pc[2].s0 + p.r * (kPi / 2 - p.theta);
    CHECK(near(apex_s, 0.55707963267948968, 1e-15));
    double gap = 1.0 - 2.0 * (p.a * p.cos_theta + p.r);

    PhasePoint x{0, 0, apex_s, 0.0};
    StepResult up = eng.map(x);
    REQUIRE(up.end == FlightEnd::Collision);
    CHECK(up.hit.cx == 0);
    CHECK(up.hit.cy == 1);
    CHECK(near(up.flight.length, 0.23431457505076203, 1e-14));
    CHECK(near(up.flight.length, gap, 1e-12));
    CHECK(up.flight.start_kind == SurfaceKind::Dispersing);
    CHECK(up.flight.end_kind == SurfaceKind::Dispersing);
    // Lands on the facing bottom apex, dead center.
    double bottom_apex = pc[6].s0 + p.r * (kPi / 2 - p.theta);
    CHECK(near(up.hit.s, bottom_apex, 1e-12));
    CHECK(near(up.hit.phi, 0.0, 1e-12));

    StepResult down = eng.map(up.hit);
    REQUIRE(down.end == FlightEnd::Collision);
    CHECK(down.hit.cx == 0);
    CHECK(down.hit.cy == 0);
    CHECK(down.flight.length == up.flight.length);
    CHECK(near(down.hit.s, apex_s, 1e-12));
    CHECK(near(down.hit.phi, 0.0, 1e-12));
}

TEST_CASE("engine: grazing corridor rays escape") {
    ModelParams p = *ModelParams::preset("tail");
    Engine eng(p);
    const auto& pc = eng.boundary().pieces();

    // Tangent ray from the top apex along -x: rides the horizontal
    // corridor boundary without ever impacting.
    double apex_s = pc[2].s0 + p.r * (kPi / 2 - p.theta);
    StepResult st = eng.map(PhasePoint{0, 0, apex_s, kPi / 2}, 50.0);
    CHECK(st.end == FlightEnd::EscapedMaxLen);
    CHECK(near(st.flight.length, 50.0, 1e-9));
    CHECK(st.flight.corridor_class == CorridorClass::Horizontal);

    // Ray along the top-left edge direction: rides the edge-parallel
    // corridor.
    double mid_s = pc[3].s0 + pc[3].len / 2;
    StepResult ob = eng.map(PhasePoint{0, 0, mid_s, -kPi / 2}, 50.0);
    CHECK(ob.end == FlightEnd::EscapedMaxLen);
    CHECK(ob.flight.corridor_class == CorridorClass::ObliquePlus);
    CHECK(ob.flight.start_kind == SurfaceKind::Flat);
}

TEST_CASE("engine: pointlike particle corner hit is flagged") {
    ModelParams p = ModelParams::wind_tree_tan(1, 1, 0.3, 0.0);
    Engine eng(p);
    // From the right vertex along +x: dead-on into the left vertex of the
    // next scatterer over.
    StepResult st = eng.map(PhasePoint{0, 0, 0.0, -kPi / 4}, 10.0);
    CHECK(st.end == FlightEnd::DegenerateCorner);
    CHECK(near(st.flight.length, 1.0 - 2 * p.a * p.sin_theta, 1e-12));
}

TEST_CASE("engine: mean free flight matches the geometry prediction") {
    ModelParams p = *ModelParams::preset("tail");
    Engine eng(p);
    double mfp = geometry_summary(p).mean_free_path;
    double sum = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
        CounterRng rng(913, uint64_t(i));
        PhasePoint x = eng.sample_liouville(rng);
        sum += eng.map(x).flight.length;
    }
    CHECK(near(sum / n, mfp, 0.01 * mfp));
}

TEST_CASE("engine: long axis flights end near the cap tangency points") {
    ModelParams p = *ModelParams::preset("tail");
    Engine eng(p);
    auto ax = axis_corridors(p);
    double thr_h = tangent_endpoint_threshold(p, ax[0]);
    double total = eng.boundary().total_length();
    auto apex = cap_apexes(eng);
    double scale = tangency_proximity_scale(p) + 1e-9;

    int events = 0;
    for (int i = 0; i < 200000; ++i) {
        CounterRng rng(5150, uint64_t(i));
        PhasePoint x = eng.sample_liouville(rng);
        StepResult st = eng.map(x);
        if (st.end != FlightEnd::Collision) continue;
        auto cls = st.flight.corridor_class;
        if (cls != CorridorClass::Horizontal && cls != CorridorClass::Vertical)
            continue;
        if (st.flight.length <= thr_h) continue;
        ++events;
        CHECK(st.flight.end_kind == SurfaceKind::Dispersing);
        // Horizontal flights graze the +-y caps, vertical flights the +-x
        // caps.
        double d;
        if (cls == CorridorClass::Horizontal)
            d = std::min(wrapped_dist(st.hit.s, apex[0], total),
                         wrapped_dist(st.hit.s, apex[1], total));
        else
            d = std::min(wrapped_dist(st.hit.s, apex[2], total),
                         wrapped_dist(st.hit.s, apex[3], total));
        CHECK(d <= scale);
    }
    CHECK(events >= 10);
}

TEST_CASE("engine: displacement classifier") {
    Engine eng(*ModelParams::preset("tail"));
    auto cls = [&](double dx, double dy) {
        Vec2 d{dx, dy};
        return eng.classify_flight(d, norm(d));
    };
    CHECK(cls(10, 0.01) == CorridorClass::Horizontal);
    CHECK(cls(-10, 0.01) == CorridorClass::Horizontal);
    CHECK(cls(0.01, 10) == CorridorClass::Vertical);
    CHECK(cls(7.07, 7.08) == CorridorClass::ObliquePlus);
    CHECK(cls(-7.07, -7.08) == CorridorClass::ObliquePlus);
    CHECK(cls(7.07, -7.08) == CorridorClass::ObliqueMinus);
    CHECK(cls(3, 0.001) == CorridorClass::None);  // below the length floor
    CHECK(cls(8, 6) == CorridorClass::None);      // no corridor that way
    CHECK(eng.named_corridors().size() == 4);
}
