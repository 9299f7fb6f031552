#include "windtree/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace windtree {

int resolve_workers(int requested) {
    if (requested > 0) return std::min(requested, 256);
    if (const char* env = std::getenv("WINDTREE_WORKERS")) {
        int v = std::atoi(env);
        if (v > 0) return std::min(v, 256);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

/// Fixed-size chunks claimed atomically, folded in chunk order.  The fold
/// order and the per-item randomness are both independent of scheduling,
/// so results are bit-identical for any worker count.
template <class Accum, class Make, class Fn>
Accum run_chunked(uint64_t n, uint64_t chunk, int workers, Make make, Fn fn) {
    uint64_t n_chunks = n ? (n + chunk - 1) / chunk : 0;
    std::vector<Accum> slots(n_chunks);
    std::atomic<uint64_t> next{0};
    auto work = [&] {
        for (;;) {
            uint64_t c = next.fetch_add(1);
            if (c >= n_chunks) break;
            Accum acc = make();
            fn(c * chunk, std::min(n, (c + 1) * chunk), acc);
            slots[c] = std::move(acc);
        }
    };
    uint64_t cap = n_chunks ? n_chunks : 1;
    int nw = int(std::min<uint64_t>(uint64_t(std::max(workers, 1)), cap));
    if (nw == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(nw - 1);
        for (int i = 1; i < nw; ++i) threads.emplace_back(work);
        work();
        for (auto& t : threads) t.join();
    }
    Accum total = make();
    for (auto& s : slots) total.merge(s);
    return total;
}

} // namespace

// ---------------------------------------------------------------------------
// TailHistogram

int TailHistogram::n_bins() const {
    int b = int(std::ceil(std::log10(lmax / lmin) * bins_per_decade));
    return std::max(b, 1) + 1;  // top bin collects lengths >= lmax
}

int TailHistogram::bin_of(double len) const {
    if (len < lmin) return -1;
    int b = int(std::floor(std::log10(len / lmin) * bins_per_decade));
    return std::min(b, n_bins() - 1);
}

double TailHistogram::bin_lo(int b) const {
    return lmin * std::pow(10.0, double(b) / bins_per_decade);
}

void TailHistogram::add(CorridorClass cls, double len, bool was_censored) {
    if (counts[0].empty())
        for (auto& c : counts) c.assign(n_bins(), 0);
    ++n_samples;
    if (was_censored) ++censored;
    int b = bin_of(len);
    if (b >= 0) ++counts[size_t(cls)][b];
}

void TailHistogram::merge(const TailHistogram& o) {
    if (o.counts[0].empty()) {
        n_samples += o.n_samples;
        censored += o.censored;
        return;
    }
    if (counts[0].empty())
        for (auto& c : counts) c.assign(n_bins(), 0);
    n_samples += o.n_samples;
    censored += o.censored;
    for (size_t k = 0; k < counts.size(); ++k)
        for (size_t b = 0; b < counts[k].size(); ++b)
            counts[k][b] += o.counts[k][b];
}

double TailHistogram::ccdf(CorridorClass cls, double L) const {
    if (n_samples == 0 || counts[0].empty()) return 0.0;
    int b = std::max(bin_of(L), 0);
    uint64_t tail = 0;
    const auto& c = counts[size_t(cls)];
    for (size_t k = size_t(b); k < c.size(); ++k) tail += c[k];
    return double(tail) / double(n_samples);
}

TailHistogram flight_tail(const Engine& eng, uint64_t n, double max_len,
                          uint64_t seed, int workers) {
    auto make = [&] {
        TailHistogram h;
        h.lmax = max_len;
        for (auto& c : h.counts) c.assign(h.n_bins(), 0);
        return h;
    };
    return run_chunked<TailHistogram>(
        n, 1 << 16, workers, make,
        [&](uint64_t b, uint64_t e, TailHistogram& h) {
            for (uint64_t i = b; i < e; ++i) {
                CounterRng rng(seed, i);
                PhasePoint x = eng.sample_liouville(rng);
                StepResult st = eng.map(x, max_len);
                h.add(st.flight.corridor_class, st.flight.length,
                      st.end == FlightEnd::EscapedMaxLen);
            }
        });
}

namespace {

PowerLawFit fit_ccdf_counts(const TailHistogram& h,
                            const std::vector<uint64_t>& cnt, double lmin_fit,
                            double lmax_fit) {
    std::vector<double> xs, ys, ws;
    uint64_t tail = 0;
    for (size_t b = cnt.size(); b-- > 0;) {
        tail += cnt[b];
        double lo = h.bin_lo(int(b));
        if (cnt[b] == 0 || lo < lmin_fit || lo > lmax_fit) continue;
        xs.push_back(std::log(lo));
        ys.push_back(std::log(double(tail) / double(h.n_samples)));
        ws.push_back(double(cnt[b]));
    }
    if (xs.size() < 5)
        throw InsufficientData("fit_powerlaw_ccdf: fewer than 5 nonempty bins");
    auto lf = fit_line(xs, ys, ws);
    if (!lf) throw InsufficientData("fit_powerlaw_ccdf: degenerate fit");
    PowerLawFit f;
    f.beta = -lf->slope;
    f.c = std::exp(lf->intercept);
    f.beta_err = lf->slope_err;
    f.r2 = lf->r2;
    f.n_bins = lf->n_points;
    return f;
}

} // namespace

PowerLawFit fit_powerlaw_ccdf(const TailHistogram& h, CorridorClass cls,
                              double lmin_fit, double lmax_fit) {
    if (h.n_samples == 0 || h.counts[0].empty())
        throw InsufficientData("fit_powerlaw_ccdf: empty histogram");
    return fit_ccdf_counts(h, h.counts[size_t(cls)], lmin_fit, lmax_fit);
}

PowerLawFit fit_powerlaw_ccdf_pooled_oblique(const TailHistogram& h,
                                             double lmin_fit,
                                             double lmax_fit) {
    if (h.n_samples == 0 || h.counts[0].empty())
        throw InsufficientData("fit_powerlaw_ccdf: empty histogram");
    std::vector<uint64_t> cnt = h.counts[size_t(CorridorClass::ObliquePlus)];
    const auto& cm = h.counts[size_t(CorridorClass::ObliqueMinus)];
    for (size_t b = 0; b < cnt.size(); ++b) cnt[b] += cm[b];
    return fit_ccdf_counts(h, cnt, lmin_fit, lmax_fit);
}

// ---------------------------------------------------------------------------
// MomentCurve

std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
    std::vector<double> g;
    int k = 0;
    for (;;) {
        double v = lo * std::pow(10.0, double(k) / points_per_decade);
        if (v > hi * (1 + 1e-12)) break;
        g.push_back(v);
        ++k;
    }
    if (g.empty() || g.back() < hi * (1 - 1e-12)) g.push_back(hi);
    return g;
}

std::vector<double> MomentCurve::phi_mean() const {
    std::vector<double> out(R.size(), 0.0);
    double acc = 0;
    for (size_t k = 0; k < R.size(); ++k) {
        acc += slot2[k];
        out[k] = n_samples ? acc / double(n_samples) : 0.0;
    }
    return out;
}

std::vector<double> MomentCurve::phi_err() const {
    std::vector<double> out(R.size(), 0.0);
    double acc2 = 0, acc4 = 0;
    for (size_t k = 0; k < R.size(); ++k) {
        acc2 += slot2[k];
        acc4 += slot4[k];
        if (n_samples > 1) {
            double m = acc2 / double(n_samples);
            double var = std::max(acc4 / double(n_samples) - m * m, 0.0);
            out[k] = std::sqrt(var / double(n_samples));
        }
    }
    return out;
}

void MomentCurve::merge(const MomentCurve& o) {
    if (o.R.empty()) return;
    if (R.empty()) {
        *this = o;
        return;
    }
    n_samples += o.n_samples;
    for (size_t k = 0; k < R.size(); ++k) {
        slot2[k] += o.slot2[k];
        slot4[k] += o.slot4[k];
        slot_cnt[k] += o.slot_cnt[k];
    }
}

MomentCurve truncated_second_moment(const Engine& eng, uint64_t n,
                                    std::vector<double> r_grid, uint64_t seed,
                                    int workers) {
    auto make = [&] {
        MomentCurve mc;
        mc.R = r_grid;
        mc.slot2.assign(r_grid.size(), 0.0);
        mc.slot4.assign(r_grid.size(), 0.0);
        mc.slot_cnt.assign(r_grid.size(), 0);
        return mc;
    };
    double max_len = r_grid.empty() ? 1e4 : r_grid.back();
    return run_chunked<MomentCurve>(
        n, 1 << 16, workers, make,
        [&](uint64_t b, uint64_t e, MomentCurve& mc) {
            for (uint64_t i = b; i < e; ++i) {
                CounterRng rng(seed, i);
                PhasePoint x = eng.sample_liouville(rng);
                StepResult st = eng.map(x, max_len);
                ++mc.n_samples;
                if (st.end == FlightEnd::EscapedMaxLen) continue;
                double len = st.flight.length;
                auto it = std::upper_bound(mc.R.begin(), mc.R.end(), len);
                if (it == mc.R.end()) continue;
                size_t k = size_t(it - mc.R.begin());
                double l2 = len * len;
                mc.slot2[k] += l2;
                mc.slot4[k] += l2 * l2;
                ++mc.slot_cnt[k];
            }
        });
}

LineFit fit_moment_log(const MomentCurve& mc, double rmin, double rmax) {
    auto mean = mc.phi_mean();
    auto err = mc.phi_err();
    std::vector<double> xs, ys, ws;
    for (size_t k = 0; k < mc.R.size(); ++k) {
        if (mc.R[k] < rmin * (1 - 1e-9) || mc.R[k] > rmax * (1 + 1e-9))
            continue;
        if (!(err[k] > 0)) continue;
        xs.push_back(std::log(mc.R[k]));
        ys.push_back(mean[k]);
        ws.push_back(1.0 / (err[k] * err[k]));
    }
    auto lf = fit_line(xs, ys, ws);
    if (!lf)
        throw InsufficientData("fit_moment_log: too few usable grid points");
    return *lf;
}

// ---------------------------------------------------------------------------
// Neutral runs

void NeutralRunStats::merge(const NeutralRunStats& o) {
    total_flights += o.total_flights;
    frozen += o.frozen;
    if (windows.size() < o.windows.size()) windows.resize(o.windows.size(), 0);
    for (size_t i = 0; i < o.windows.size(); ++i) windows[i] += o.windows[i];
    max_spread = std::max(max_spread, o.max_spread);
    if (o.runs_ge2 > 0) {
        if (runs_ge2 == 0) {
            min_exit_excess = o.min_exit_excess;
            max_exit_excess = o.max_exit_excess;
        } else {
            min_exit_excess = std::min(min_exit_excess, o.min_exit_excess);
            max_exit_excess = std::max(max_exit_excess, o.max_exit_excess);
        }
    }
    runs_ge2 += o.runs_ge2;
}

NeutralRunStats neutral_run_stats(const Engine& eng, uint64_t n_traj,
                                  uint64_t steps, double min_len, int n_max,
                                  uint64_t seed, int workers) {
    auto make = [&] {
        NeutralRunStats st;
        st.min_len = min_len;
        st.windows.assign(size_t(std::max(n_max, 1)), 0);
        st.min_exit_excess = kInfD;
        st.max_exit_excess = -kInfD;
        return st;
    };
    return run_chunked<NeutralRunStats>(
        n_traj, 4, workers, make,
        [&](uint64_t b, uint64_t e, NeutralRunStats& acc) {
            for (uint64_t traj = b; traj < e; ++traj) {
                CounterRng rng(seed, traj);
                PhasePoint x = eng.sample_liouville(rng);
                uint64_t q = 0;          // length of the current run
                double first_len = 0, prev_len = 0;
                auto close_run = [&](bool complete) {
                    if (q >= 2 && complete) {
                        ++acc.runs_ge2;
                        double excess = prev_len - first_len;
                        acc.min_exit_excess =
                            std::min(acc.min_exit_excess, excess);
                        acc.max_exit_excess =
                            std::max(acc.max_exit_excess, excess);
                    }
                    q = 0;
                };
                for (uint64_t n = 0; n < steps; ++n) {
                    StepResult st = eng.map(x, kOrbitMaxLen);
                    ++acc.total_flights;
                    auto cc = st.flight.corridor_class;
                    bool qual = st.flight.start_kind == SurfaceKind::Flat &&
                                st.flight.length > min_len &&
                                (cc == CorridorClass::ObliquePlus ||
                                 cc == CorridorClass::ObliqueMinus);
                    if (qual) {
                        if (q >= 2)
                            // prev flight is now known to be interior to the
                            // run: both endpoints neutral, equal crossing.
                            acc.max_spread = std::max(
                                acc.max_spread, std::abs(prev_len - first_len));
                        if (q == 0) first_len = st.flight.length;
                        prev_len = st.flight.length;
                        ++q;
                        for (uint64_t k = 1; k < q && k <= uint64_t(n_max); ++k)
                            ++acc.windows[k - 1];
                    } else {
                        close_run(true);
                    }
                    if (st.end != FlightEnd::Collision) {
                        ++acc.frozen;
                        break;
                    }
                    x = st.hit;
                }
                close_run(false);  // run cut by the step budget: no exit info
            }
        });
}

// ---------------------------------------------------------------------------
// Correlation (single orbit, single thread)

CorrResult correlation(const Engine& eng, uint64_t m, uint64_t j_max,
                       double truncation, uint64_t seed) {
    CorrResult out;
    out.truncation = truncation;
    std::vector<Vec2> rt(m);
    std::vector<uint8_t> cls(m);
    CounterRng rng(seed, 0);
    PhasePoint x = eng.sample_liouville(rng);
    uint64_t used = 0;
    for (uint64_t i = 0; i < m; ++i) {
        StepResult st = eng.map(x, kOrbitMaxLen);
        if (st.end != FlightEnd::Collision) {
            ++out.frozen;
            break;
        }
        rt[i] = st.flight.length < truncation ? st.flight.displacement
                                              : Vec2{0, 0};
        cls[i] = uint8_t(st.flight.corridor_class);
        x = st.hit;
        ++used;
    }
    rt.resize(used);
    cls.resize(used);
    out.m = used;
    if (used < 16) throw InsufficientData("correlation: orbit too short");
    j_max = std::min<uint64_t>(j_max, used / 2);

    // Exact (1/(M-j))-normalized curve at log-spaced lags.
    std::vector<uint64_t> lags{0};
    for (double v : log_grid(1.0, double(j_max), 8)) {
        uint64_t j = uint64_t(std::llround(v));
        if (j >= 1 && j <= j_max && j != lags.back()) lags.push_back(j);
    }
    for (uint64_t j : lags) {
        double s1 = 0, s2 = 0;
        uint64_t cnt = used - j;
        for (uint64_t i = 0; i < cnt; ++i) {
            double d = dot(rt[i], rt[i + j]);
            s1 += d;
            s2 += d * d;
        }
        CorrPoint p;
        p.j = j;
        p.c_j = s1 / double(cnt);
        double var = std::max(s2 / double(cnt) - p.c_j * p.c_j, 0.0);
        p.stderr_ = std::sqrt(var / double(cnt));
        out.curve.push_back(p);
    }

    // Partial sums S(N) = (1/M) sum_{k=1..N} sum_i <r_i, r_{i+k}> via a
    // sliding suffix window W_i = sum of v[i+1 .. min(i+N, M-1)]; one O(M)
    // pass per horizon, no quadratic work and no prefix table.
    for (uint64_t j : lags)
        if (j >= 1) out.n_grid.push_back(j);
    // value(i) selects the i-th term without materializing masked copies
    // (the orbit itself is the memory budget).
    auto sliding = [&](auto&& value) {
        std::vector<double> res;
        for (uint64_t N : out.n_grid) {
            Vec2 w{0, 0};
            uint64_t hi = std::min<uint64_t>(N, used - 1);
            for (uint64_t l = 1; l <= hi; ++l) w += value(l);
            double U = 0;
            // i = M-1 has an empty window and contributes exactly zero.
            for (uint64_t i = 0; i + 1 < used; ++i) {
                U += dot(value(i), w);
                w -= value(i + 1);
                uint64_t add = i + 1 + N;
                if (add < used) w += value(add);
            }
            res.push_back(U / double(used));
        }
        return res;
    };
    out.s_of_n = sliding([&](uint64_t i) { return rt[i]; });

    auto masked = [&](CorridorClass c) {
        return sliding([&, m8 = uint8_t(c)](uint64_t i) {
            return cls[i] == m8 ? rt[i] : Vec2{0, 0};
        });
    };
    auto sp = masked(CorridorClass::ObliquePlus);
    auto sm = masked(CorridorClass::ObliqueMinus);
    out.s_oblique.resize(out.n_grid.size());
    for (size_t k = 0; k < out.n_grid.size(); ++k)
        out.s_oblique[k] = sp[k] + sm[k];

    // Ordinary regression of S(N) on (ln N)^2; horizons below 100 are still
    // dominated by the short-range part of the correlation and are excluded.
    std::vector<double> g, y, w;
    for (size_t k = 0; k < out.n_grid.size(); ++k) {
        if (out.n_grid[k] < 100) continue;
        double l = std::log(double(out.n_grid[k]));
        g.push_back(l * l);
        y.push_back(out.s_of_n[k]);
        w.push_back(1.0);
    }
    if (auto lf = fit_line(g, y, w)) out.lnn2_fit = *lf;
    return out;
}

std::vector<std::pair<double, double>> flight_pairs(const Engine& eng,
                                                    uint64_t m, int gap,
                                                    uint64_t seed) {
    std::vector<std::pair<double, double>> out;
    std::vector<double> ring(size_t(gap) + 1, 0.0);
    CounterRng rng(seed, 0);
    PhasePoint x = eng.sample_liouville(rng);
    for (uint64_t i = 0; i < m; ++i) {
        StepResult st = eng.map(x, kOrbitMaxLen);
        if (st.end != FlightEnd::Collision) break;
        ring[i % ring.size()] = st.flight.length;
        if (i >= uint64_t(gap))
            out.emplace_back(ring[(i - gap) % ring.size()],
                             st.flight.length);
        x = st.hit;
    }
    return out;
}

// ---------------------------------------------------------------------------
// MSD ensemble

std::vector<MsdPoint> MsdCurve::points() const {
    std::vector<MsdPoint> out;
    for (size_t i = 0; i < grid.size(); ++i) {
        MsdPoint p;
        p.n = grid[i];
        p.k_samples = k;
        if (k > 0) {
            p.msd = sum2[i] / double(k);
            double var = std::max(sum4[i] / double(k) - p.msd * p.msd, 0.0);
            p.stderr_ = k > 1 ? std::sqrt(var / double(k)) : 0.0;
        }
        out.push_back(p);
    }
    return out;
}

void MsdCurve::merge(const MsdCurve& o) {
    if (o.grid.empty()) return;
    if (grid.empty()) {
        *this = o;
        return;
    }
    k += o.k;
    frozen += o.frozen;
    for (size_t i = 0; i < grid.size(); ++i) {
        sum2[i] += o.sum2[i];
        sum4[i] += o.sum4[i];
        sumx[i] += o.sumx[i];
        sumy[i] += o.sumy[i];
    }
}

namespace {

std::vector<uint64_t> int_log_grid(uint64_t lo, uint64_t hi, int ppd) {
    std::vector<uint64_t> g;
    for (double v : log_grid(double(lo), double(hi), ppd)) {
        uint64_t n = uint64_t(std::llround(v));
        n = std::max<uint64_t>(std::min(n, hi), lo);
        if (g.empty() || n > g.back()) g.push_back(n);
    }
    return g;
}

} // namespace

MsdResult msd(const Engine& eng, uint64_t k, uint64_t n_max, uint64_t seed,
              int workers) {
    std::vector<uint64_t> grid = int_log_grid(1, n_max, 8);
    auto make = [&] {
        MsdCurve c;
        c.grid = grid;
        c.sum2.assign(grid.size(), 0.0);
        c.sum4.assign(grid.size(), 0.0);
        c.sumx.assign(grid.size(), 0.0);
        c.sumy.assign(grid.size(), 0.0);
        return c;
    };
    MsdResult res;
    res.curve = run_chunked<MsdCurve>(
        k, 16, workers, make, [&](uint64_t b, uint64_t e, MsdCurve& acc) {
            for (uint64_t traj = b; traj < e; ++traj) {
                CounterRng rng(seed, traj);
                PhasePoint x = eng.sample_liouville(rng);
                Vec2 disp{0, 0};
                size_t gi = 0;
                bool alive = true;
                for (uint64_t n = 1; n <= n_max && gi < grid.size(); ++n) {
                    if (alive) {
                        StepResult st = eng.map(x, kOrbitMaxLen);
                        if (st.end != FlightEnd::Collision) {
                            alive = false;
                            ++acc.frozen;
                        } else {
                            disp += st.flight.displacement;
                            x = st.hit;
                        }
                    }
                    if (n == grid[gi]) {
                        double d2 = norm2(disp);
                        acc.sum2[gi] += d2;
                        acc.sum4[gi] += d2 * d2;
                        acc.sumx[gi] += disp.x;
                        acc.sumy[gi] += disp.y;
                        ++gi;
                    }
                }
                ++acc.k;
            }
        });

    auto pts = res.curve.points();
    std::vector<double> n, y, w;
    for (const auto& p : pts) {
        if (p.n < 8 || p.msd <= 0) continue;
        n.push_back(double(p.n));
        y.push_back(p.msd / double(p.n));
        double err = p.stderr_ > 0 ? p.stderr_ / double(p.n) : 0.0;
        w.push_back(err > 0 ? 1.0 / (err * err) : 0.0);
    }
    res.models = select_growth_model(n, y, w);
    return res;
}

// ---------------------------------------------------------------------------
// Continuous time

namespace {

struct CTimeAccum {
    std::vector<double> t_grid;
    std::vector<uint64_t> n_grid;
    std::vector<double> t2, t4;      // |x(t)-x(0)|^2 moments
    std::vector<double> n2, n4;
    double total_time = 0.0;
    uint64_t total_collisions = 0;
    uint64_t k = 0;
    uint64_t frozen = 0;

    void merge(const CTimeAccum& o) {
        if (o.t_grid.empty()) return;
        if (t_grid.empty()) {
            *this = o;
            return;
        }
        for (size_t i = 0; i < t2.size(); ++i) {
            t2[i] += o.t2[i];
            t4[i] += o.t4[i];
        }
        for (size_t i = 0; i < n2.size(); ++i) {
            n2[i] += o.n2[i];
            n4[i] += o.n4[i];
        }
        total_time += o.total_time;
        total_collisions += o.total_collisions;
        k += o.k;
        frozen += o.frozen;
    }
};

} // namespace

CTimeResult ctime_rescale(const Engine& eng, uint64_t k, double t_max,
                          uint64_t seed, int workers) {
    GeometrySummary gs = geometry_summary(eng.params());
    uint64_t n_top = uint64_t(std::llround(t_max / gs.mean_free_path));
    std::vector<double> t_grid = log_grid(1.0, t_max, 8);
    std::vector<uint64_t> n_grid = int_log_grid(1, std::max<uint64_t>(n_top, 2), 8);
    const uint64_t step_cap = uint64_t(64.0 * t_max) + 1024;

    auto make = [&] {
        CTimeAccum a;
        a.t_grid = t_grid;
        a.n_grid = n_grid;
        a.t2.assign(t_grid.size(), 0.0);
        a.t4.assign(t_grid.size(), 0.0);
        a.n2.assign(n_grid.size(), 0.0);
        a.n4.assign(n_grid.size(), 0.0);
        return a;
    };
    CTimeAccum acc = run_chunked<CTimeAccum>(
        k, 16, workers, make, [&](uint64_t b, uint64_t e, CTimeAccum& a) {
            for (uint64_t traj = b; traj < e; ++traj) {
                CounterRng rng(seed, traj);
                PhasePoint x = eng.sample_liouville(rng);
                Vec2 disp{0, 0};
                double t = 0.0;
                size_t ti = 0, ni = 0;
                uint64_t n = 0;
                while ((ti < t_grid.size() || ni < n_grid.size()) &&
                       n < step_cap) {
                    StepResult st = eng.map(x, kOrbitMaxLen);
                    double len = st.flight.length;
                    Vec2 dir = st.flight.displacement * (1.0 / len);
                    while (ti < t_grid.size() && t + len >= t_grid[ti]) {
                        Vec2 at = disp + (t_grid[ti] - t) * dir;
                        double d2 = norm2(at);
                        a.t2[ti] += d2;
                        a.t4[ti] += d2 * d2;
                        ++ti;
                    }
                    if (st.end != FlightEnd::Collision) {
                        ++a.frozen;
                        // Freeze so merges stay aligned: collision-count
                        // grid pins to the last collision point, remaining
                        // time grid (corner stops only) to the endpoint.
                        double dn = norm2(disp);
                        for (; ni < n_grid.size(); ++ni) {
                            a.n2[ni] += dn;
                            a.n4[ni] += dn * dn;
                        }
                        double dt = norm2(disp + st.flight.displacement);
                        for (; ti < t_grid.size(); ++ti) {
                            a.t2[ti] += dt;
                            a.t4[ti] += dt * dt;
                        }
                        break;
                    }
                    disp += st.flight.displacement;
                    t += len;
                    ++n;
                    if (t <= t_max) {
                        a.total_time += len;
                        ++a.total_collisions;
                    }
                    if (ni < n_grid.size() && n == n_grid[ni]) {
                        double d2 = norm2(disp);
                        a.n2[ni] += d2;
                        a.n4[ni] += d2 * d2;
                        ++ni;
                    }
                    x = st.hit;
                }
                ++a.k;
            }
        });

    CTimeResult res;
    res.t_grid = acc.t_grid;
    res.frozen = acc.frozen;
    res.total_collisions = acc.total_collisions;
    res.total_time = acc.total_time;
    res.msd_t.resize(t_grid.size());
    res.msd_t_err.resize(t_grid.size());
    for (size_t i = 0; i < t_grid.size(); ++i) {
        double m = acc.k ? acc.t2[i] / double(acc.k) : 0.0;
        res.msd_t[i] = m;
        double var = acc.k ? std::max(acc.t4[i] / double(acc.k) - m * m, 0.0)
                           : 0.0;
        res.msd_t_err[i] = acc.k > 1 ? std::sqrt(var / double(acc.k)) : 0.0;
    }
    for (size_t i = 0; i < n_grid.size(); ++i) {
        MsdPoint p;
        p.n = n_grid[i];
        p.k_samples = acc.k;
        p.msd = acc.k ? acc.n2[i] / double(acc.k) : 0.0;
        double var =
            acc.k ? std::max(acc.n4[i] / double(acc.k) - p.msd * p.msd, 0.0)
                  : 0.0;
        p.stderr_ = acc.k > 1 ? std::sqrt(var / double(acc.k)) : 0.0;
        res.msd_n.push_back(p);
    }
    res.eta_hat = acc.total_collisions
                      ? acc.total_time / double(acc.total_collisions)
                      : 0.0;
    double ts = t_grid.back();
    double lt = std::log(ts);
    res.c_cont = res.msd_t.back() / (ts * lt * lt);
    if (!res.msd_n.empty()) {
        double ns = double(res.msd_n.back().n);
        double ln = std::log(ns);
        res.c_disc = res.msd_n.back().msd / (ns * ln * ln);
    }
    return res;
}

} // namespace windtree
