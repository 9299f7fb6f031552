// Acceptance gate.  Runs the thirteen checks the library is signed off
// against, at their stated budgets and tolerances, and prints one PASS/FAIL
// line per criterion.  Exit code = number of failed criteria.
//
// argv[1] = path to the windtree binary (used by the determinism check).
//
// Budgets are chosen so the whole gate finishes in a few minutes on one
// core; the heavy criteria (single-orbit correlation, ensemble MSD) dominate.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <windtree/boundary.hpp>
#include <windtree/corridors.hpp>
#include <windtree/engine.hpp>
#include <windtree/experiments.hpp>
#include <windtree/fits.hpp>
#include <windtree/model.hpp>
#include <windtree/rng.hpp>

#include "oracle.hpp"

using namespace windtree;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double secs(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ostringstream with enough digits for the reported numbers
struct Detail {
    std::ostringstream ss;
    Detail() { ss.precision(6); }
    template <class T> Detail& operator<<(const T& v) {
        ss << v;
        return *this;
    }
    std::string str() const { return ss.str(); }
};

Vec2 global_position(const Engine& eng, const PhasePoint& x) {
    Vec2 loc = eng.position_local(x);
    return {loc.x + double(x.cx), loc.y + double(x.cy)};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f.good()) return "<unreadable:" + p.string() + ">";
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

bool within_rel(double v, double target, double rel) {
    return std::abs(v - target) <= rel * std::abs(target);
}

} // namespace

int main(int argc, char** argv) {
    const std::string exe = argc > 1 ? argv[1] : "";
    const int workers = resolve_workers(0);
    int failures = 0;

    auto criterion = [&](int k, const char* name, auto&& body) {
        Clock::time_point t0 = Clock::now();
        Detail d;
        bool ok = false;
        try {
            ok = body(d);
        } catch (const std::exception& e) {
            d << "exception: " << e.what();
        }
        std::printf("%s  criterion %2d  %-28s  %s  (%.1f s)\n",
                    ok ? "PASS" : "FAIL", k, name, d.str().c_str(), secs(t0));
        std::fflush(stdout);
        if (!ok) ++failures;
    };

    const ModelParams tail = *ModelParams::preset("tail");

    // 1. Exact geometry summaries and a C^1 boundary for random configs.
    criterion(1, "geometry exactness", [&](Detail& d) {
        Clock::time_point t0 = Clock::now();
        CounterRng rng(310, 0);
        int checked = 0;
        double worst = 0.0;
        while (checked < 100) {
            double th = 0.05 + rng.next_double() * (M_PI / 4 - 0.05);
            double a = 0.05 + rng.next_double() * 0.40;
            double r = 0.005 + rng.next_double() * 0.115;
            ModelParams p = ModelParams::wind_tree(th, a, r);
            if (!validate_params(p).ok) continue;
            ++checked;
            GeometrySummary gs = geometry_summary(p);
            double closed = 4 * p.a + 2 * M_PI * p.r;
            worst = std::max(worst, std::abs(gs.perimeter - closed));
            ScattererBoundary b(p);
            worst = std::max(worst, std::abs(b.total_length() - gs.perimeter));
            // one-sided limits at every piece junction
            const double h = 1e-12;
            for (const auto& pc : b.pieces()) {
                BoundaryPoint lo = b.at(b.wrap(pc.s0 - h));
                BoundaryPoint hi = b.at(pc.s0 + h);
                worst = std::max(worst, norm(lo.point - hi.point));
                worst = std::max(worst, norm(lo.normal - hi.normal));
            }
        }
        double dt = secs(t0);
        d << "100 configs, worst perimeter/junction error " << worst;
        return worst <= 1e-9 && dt < 1.0;
    });

    // 2. Corridor golden values on the edge-corridor preset.
    criterion(2, "corridor golden widths", [&](Detail& d) {
        Clock::time_point t0 = Clock::now();
        auto specs = enumerate_corridors(tail, 200);
        double d_oblique = std::sqrt(2.0) / 4 - 2 * tail.r;
        int seen_axis = 0, seen_oblique = 0;
        double worst = 0.0;
        for (const auto& c : specs) {
            if (c.label == CorridorLabel::Horizontal ||
                c.label == CorridorLabel::Vertical) {
                worst = std::max(worst, std::abs(c.width_math - 0.5));
                worst = std::max(worst, std::abs(c.width_eff - 0.4));
                ++seen_axis;
            } else if (c.label == CorridorLabel::ObliquePlus ||
                       c.label == CorridorLabel::ObliqueMinus) {
                worst = std::max(worst, std::abs(c.width_eff - d_oblique));
                ++seen_oblique;
            }
        }
        double dt = secs(t0);
        d << specs.size() << " open corridors at max denom 200, "
          << "golden-width error " << worst;
        return specs.size() == 4 && seen_axis == 2 && seen_oblique == 2 &&
               worst <= 1e-12 && dt < 1.0;
    });

    // 3. Skew-corridor suppression: bounded, monotone, brute-force value.
    criterion(3, "skew suppression", [&](Detail& d) {
        Clock::time_point t0 = Clock::now();
        bool monotone = true;
        double prev = 0.0;
        for (int md = 3; md <= 200; ++md) {
            double v = type1_suppression_sup(md).value;
            monotone = monotone && v >= prev - 1e-15;
            prev = v;
        }
        double v200 = prev;
        // independent brute force over reduced pairs
        double brute = 0.0;
        for (int n = 3; n <= 200; ++n)
            for (int m = 2; m < n; ++m) {
                if (std::gcd(m, n) != 1) continue;
                brute = std::max(brute, (n % m) / (std::sqrt(2.0) * n));
            }
        double dt = secs(t0);
        d << "sup(200) = " << v200 << ", brute force " << brute
          << (monotone ? ", monotone" : ", NOT monotone");
        return v200 < std::sqrt(2.0) / 4 && monotone &&
               std::abs(v200 - brute) <= 1e-12 &&
               std::abs(v200 - 0.35177674038928747) <= 1e-5 && dt < 1.0;
    });

    // 4. Map vs all-scatterers oracle; time-reversal round trip.
    criterion(4, "map vs oracle + reversal", [&](Detail& d) {
        Clock::time_point t0 = Clock::now();
        Engine eng(tail);
        int collisions = 0, mismatches = 0;
        double worst_fwd = 0.0;
        for (int i = 0; i < 1000; ++i) {
            CounterRng rng(9001, uint64_t(i));
            PhasePoint x = eng.sample_liouville(rng);
            Vec2 origin = global_position(eng, x);
            Vec2 v = eng.outgoing_velocity(x);
            oracle::TraceHit tr = oracle::trace(tail, origin, v, 30.0);
            StepResult st = eng.map(x, 30.0);
            if ((st.end == FlightEnd::Collision) != tr.hit) {
                ++mismatches;
                continue;
            }
            if (!tr.hit) continue;
            ++collisions;
            if (st.hit.cx != tr.cx || st.hit.cy != tr.cy) ++mismatches;
            worst_fwd =
                std::max(worst_fwd, std::abs(st.flight.length - tr.t));
            worst_fwd = std::max(
                worst_fwd, norm(global_position(eng, st.hit) - tr.point));
        }
        int reversed = 0;
        double worst_rev = 0.0;
        double total = eng.boundary().total_length();
        for (int i = 0; i < 10000; ++i) {
            CounterRng rng(733, uint64_t(i));
            PhasePoint x0 = eng.sample_liouville(rng);
            StepResult fwd = eng.map(x0);
            if (fwd.end != FlightEnd::Collision) continue;
            StepResult back = eng.inverse(fwd.hit);
            if (back.end != FlightEnd::Collision ||
                back.hit.cx != x0.cx || back.hit.cy != x0.cy) {
                ++mismatches;
                continue;
            }
            ++reversed;
            double ds = std::abs(back.hit.s - x0.s);
            ds = std::min(ds, total - ds);
            worst_rev = std::max(worst_rev, ds);
            worst_rev = std::max(worst_rev, std::abs(back.hit.phi - x0.phi));
        }
        double dt = secs(t0);
        d << collisions << " oracle collisions (worst " << worst_fwd << "), "
          << reversed << " round trips (worst " << worst_rev << "), "
          << mismatches << " mismatches";
        return mismatches == 0 && collisions >= 900 && worst_fwd <= 1e-9 &&
               reversed >= 9900 && worst_rev <= 1e-9 && dt < 30.0;
    });

    // 5. Invariance of the collision measure under one map step.
    criterion(5, "measure preservation", [&](Detail& d) {
        Clock::time_point t0 = Clock::now();
        Engine eng(tail);
        double total = eng.boundary().total_length();
        std::vector<double> us, vs;
        us.reserve(1000000);
        vs.reserve(1000000);
        for (uint64_t i = 0; i < 1000000; ++i) {
            CounterRng rng(4242, i);
            PhasePoint x = eng.sample_liouville(rng);
            StepResult st = eng.map(x);
            if (st.end != FlightEnd::Collision) continue;
            us.push_back(st.hit.s / total);
            vs.push_back((std::sin(st.hit.phi) + 1) / 2);
        }
        double n = double(us.size());
        double d1 = ks_uniform(us);
        double d2 = ks_uniform(vs);
        double crit = 1.63 / std::sqrt(n);
        double dt = secs(t0);
        d << "KS(s) = " << d1 << ", KS(sin phi) = " << d2 << " vs " << crit
          << " at n = " << uint64_t(n);
        return d1 < crit && d2 < crit && dt < 60.0;
    });

    // One 1e7-flight histogram feeds both tail-law criteria.
    Engine tail_eng(tail);
    TailHistogram hist;
    {
        Clock::time_point t0 = Clock::now();
        hist = flight_tail(tail_eng, 10000000, 1e4, 3, workers);
        std::printf("--    shared tail histogram: 1e7 flights, %llu censored"
                    "  (%.1f s)\n",
                    (unsigned long long)hist.censored, secs(t0));
        std::fflush(stdout);
    }

    // 6. Axis free-flight tail: inverse-square law and its constant.
    criterion(6, "axis tail law", [&](Detail& d) {
        PowerLawFit f = fit_powerlaw_ccdf(hist, CorridorClass::Horizontal,
                                          10.0, 100.0);
        d << "beta = " << f.beta << " (window [1.85, 2.15]), prefactor = "
          << f.c << " vs 0.046287 +-30%";
        return in_window(f.beta, 1.85, 2.15) && within_rel(f.c, 0.046287, 0.30);
    });

    // 7. Pooled oblique tail law (flat-edge corridors).
    criterion(7, "oblique tail law", [&](Detail& d) {
        PowerLawFit f = fit_powerlaw_ccdf_pooled_oblique(hist, 10.0, 100.0);
        d << "beta = " << f.beta << " (window [1.7, 2.3]), prefactor = "
          << f.c << " vs 0.0065758 +-35%";
        return in_window(f.beta, 1.7, 2.3) && within_rel(f.c, 0.0065758, 0.35);
    });

    // 8. Truncated second moment grows linearly in ln R.
    criterion(8, "truncated moment growth", [&](Detail& d) {
        MomentCurve mc = truncated_second_moment(
            tail_eng, 10000000, log_grid(1.0, 1e4, 8), 5, workers);
        LineFit lf = fit_moment_log(mc, 1e2, 1e4);
        d << "slope = " << lf.slope << " vs 0.21146 +-15%, R2 = " << lf.r2;
        return lf.r2 >= 0.99 && within_rel(lf.slope, 0.21146, 0.15);
    });

    // 9. Neutral-run window counts fall off as 1/n; runs are exactly flat.
    criterion(9, "neutral-run law", [&](Detail& d) {
        NeutralRunStats ns =
            neutral_run_stats(tail_eng, 2000, 10000, 10.0, 4, 7, workers);
        double w1 = double(ns.window_count(1));
        double r2 = ns.window_count(2) / w1;
        double r3 = ns.window_count(3) / w1;
        d << "windows " << ns.window_count(1) << "/" << ns.window_count(2)
          << "/" << ns.window_count(3) << ", ratios " << r2 << ", " << r3
          << " vs 1/2, 1/3 +-30%, spread " << ns.max_spread;
        return ns.window_count(2) >= 200 && ns.window_count(3) >= 200 &&
               std::abs(r2 - 0.5) <= 0.15 &&
               std::abs(r3 - 1.0 / 3.0) <= 0.10 && ns.max_spread < 1e-10;
    });

    // 10. Partial correlation sums against (ln N)^2 along one long orbit.
    criterion(10, "correlation growth", [&](Detail& d) {
        CorrResult cr = correlation(tail_eng, 100000000, 100000, 1000.0, 7);
        const LineFit& lf = cr.lnn2_fit;
        d << "slope = " << lf.slope << " +- " << lf.slope_err
          << " (want > 0), R2 = " << lf.r2 << " (want >= 0.95), "
          << lf.n_points << " points";
        return lf.slope > 0.0 && lf.r2 >= 0.95;
    });

    // 11. MSD growth-model selection separates the three regimes.
    criterion(11, "regime discrimination", [&](Detail& d) {
        const char* names[] = {"constant", "log n", "(log n)^2"};
        struct Want {
            const char* preset;
            GrowthModel model;
            uint64_t seed;
        } runs[] = {{"finite", GrowthModel::Constant, 11},
                    {"lorentz", GrowthModel::LogN, 12},
                    {"tail", GrowthModel::LogN2, 13}};
        bool ok = true;
        for (const Want& w : runs) {
            Engine eng(*ModelParams::preset(w.preset));
            MsdResult res = msd(eng, 10000, 10000, w.seed, workers);
            GrowthModel got = res.models.best;
            ok = ok && got == w.model;
            d << w.preset << " -> " << names[int(got)]
              << (got == w.model ? "" : " (WRONG)") << "; ";
        }
        d << "K = 1e4, n_max = 1e4";
        return ok;
    });

    // 12. Continuous-time rescaling through the mean free path.
    criterion(12, "continuous-time rescaling", [&](Detail& d) {
        CTimeResult ct = ctime_rescale(tail_eng, 1500, 1e5, 17, workers);
        double ratio = ct.c_cont * ct.eta_hat / ct.c_disc;
        d << "eta = " << ct.eta_hat << " vs 1.44765 +-1%, "
          << "cont/disc coefficient ratio x eta = " << ratio
          << " (window [0.8, 1.2])";
        return within_rel(ct.eta_hat, 1.44765, 0.01) &&
               in_window(ratio, 0.8, 1.2);
    });

    // 13. Byte-identical outputs across worker counts (whole binary).
    criterion(13, "determinism across workers", [&](Detail& d) {
        if (exe.empty()) {
            d << "no windtree binary path given";
            return false;
        }
        fs::path dir = fs::temp_directory_path() / "windtree-acceptance";
        fs::create_directories(dir);
        auto runcmd = [&](const std::string& args) {
            std::string cmd =
                "\"" + exe + "\" " + args + " >/dev/null 2>&1";
            return std::system(cmd.c_str());
        };
        struct Job {
            std::string head;
            const char* tag;
        } jobs[] = {{"tail --preset tail --n 1000000 --seed 5", "tail"},
                    {"msd --preset lorentz --k 400 --nmax 500 --seed 9",
                     "msd"}};
        bool ok = true;
        for (const Job& j : jobs) {
            fs::path c1 = dir / (std::string(j.tag) + "_w1.csv");
            fs::path s1 = dir / (std::string(j.tag) + "_w1.json");
            fs::path c3 = dir / (std::string(j.tag) + "_w3.csv");
            fs::path s3 = dir / (std::string(j.tag) + "_w3.json");
            int r1 = runcmd(j.head + " --workers 1 --out " + c1.string() +
                            " --summary-out " + s1.string());
            int r3 = runcmd(j.head + " --workers 3 --out " + c3.string() +
                            " --summary-out " + s3.string());
            bool same =
                r1 == 0 && r3 == 0 && slurp(c1) == slurp(c3) &&
                slurp(s1) == slurp(s3);
            d << j.tag << (same ? " identical; " : " DIFFERS; ");
            ok = ok && same;
        }
        return ok;
    });

    std::printf("%d of 13 criteria failed\n", failures);
    return failures;
}
