#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "windtree/engine.hpp"
#include "windtree/fits.hpp"

namespace windtree {

/// Effective worker count: `requested` if positive, else the
/// WINDTREE_WORKERS environment variable, else the hardware concurrency.
/// Estimator output never depends on this value: work is split into
/// fixed-size chunks folded in chunk order, and each trajectory draws its
/// randomness from its own (seed, stream-index) generator.
int resolve_workers(int requested);

/// Flights an orbit-following estimator is willing to trace before
/// censoring; long enough that censoring is a ~1e-9 probability event.
inline constexpr double kOrbitMaxLen = 1e7;

// ---------------------------------------------------------------------------
// Free-flight tail

struct TailHistogram {
    double lmin = 1.0, lmax = 1e4;
    int bins_per_decade = 16;
    uint64_t n_samples = 0;
    uint64_t censored = 0;  // flights longer than lmax (kept in the top bin)
    // counts[class][bin], class indexing CorridorClass.
    std::array<std::vector<uint64_t>, 5> counts;

    int n_bins() const;
    int bin_of(double len) const;      // -1 if len < lmin
    double bin_lo(int b) const;
    /// Fraction of all samples with the given class and length >= L
    /// (L is snapped to the nearest bin edge at or below).
    double ccdf(CorridorClass cls, double L) const;
    void add(CorridorClass cls, double len, bool was_censored);
    void merge(const TailHistogram& o);
};

/// Draw n states from the collision measure and record one flight each.
TailHistogram flight_tail(const Engine& eng, uint64_t n, double max_len,
                          uint64_t seed, int workers);

/// Power-law fit of the per-class CCDF over bin edges in [lmin_fit,
/// lmax_fit], weighted by bin counts.  Throws InsufficientData when fewer
/// than 5 nonempty bins fall in the window.
PowerLawFit fit_powerlaw_ccdf(const TailHistogram& h, CorridorClass cls,
                              double lmin_fit, double lmax_fit);

/// Same fit on the merged ObliquePlus + ObliqueMinus counts.
PowerLawFit fit_powerlaw_ccdf_pooled_oblique(const TailHistogram& h,
                                             double lmin_fit, double lmax_fit);

// ---------------------------------------------------------------------------
// Truncated second moment of the flight length

struct MomentCurve {
    std::vector<double> R;            // truncation grid, increasing
    std::vector<double> slot2;        // sum of |r|^2 with |r| in [R_{k-1}, R_k)
    std::vector<double> slot4;        // sum of |r|^4, same slots
    std::vector<uint64_t> slot_cnt;
    uint64_t n_samples = 0;

    std::vector<double> phi_mean() const;  // <|r|^2 1{|r| < R_k}>
    std::vector<double> phi_err() const;
    void merge(const MomentCurve& o);
};

MomentCurve truncated_second_moment(const Engine& eng, uint64_t n,
                                    std::vector<double> r_grid, uint64_t seed,
                                    int workers);

/// Line fit of the truncated moment against ln R over [rmin, rmax].
LineFit fit_moment_log(const MomentCurve& mc, double rmin, double rmax);

/// Log-spaced grid with points_per_decade points per decade.
std::vector<double> log_grid(double lo, double hi, int points_per_decade);

// ---------------------------------------------------------------------------
// Runs of neutral (flat) reflections along an edge-parallel corridor

struct NeutralRunStats {
    double min_len = 10.0;
    uint64_t total_flights = 0;
    /// windows[k] = number of positions starting k+2 consecutive
    /// qualifying flights, i.e. the order-n window count lives at
    /// windows[n-1]: a window of order n needs flights i..i+n to qualify.
    std::vector<uint64_t> windows;
    double max_spread = 0.0;  // worst within-run flight-length disagreement
    double min_exit_excess = 0.0, max_exit_excess = 0.0;
    uint64_t runs_ge2 = 0;    // completed runs feeding the excess stats
    uint64_t frozen = 0;      // trajectories stopped early (censor/corner)

    uint64_t window_count(int n) const {
        return n >= 1 && n <= int(windows.size()) ? windows[n - 1] : 0;
    }
    void merge(const NeutralRunStats& o);
};

/// Follows n_traj orbits for steps collisions each and counts windows of
/// consecutive flights that start on a flat piece, run along a named
/// oblique corridor and exceed min_len.
NeutralRunStats neutral_run_stats(const Engine& eng, uint64_t n_traj,
                                  uint64_t steps, double min_len, int n_max,
                                  uint64_t seed, int workers);

// ---------------------------------------------------------------------------
// Displacement autocorrelation along one orbit

struct CorrPoint {
    uint64_t j = 0;
    double c_j = 0.0;    // (1/(M-j)) sum_i <r_i, r_{i+j}>, truncated flights
    double stderr_ = 0.0;
};

struct CorrResult {
    uint64_t m = 0;             // orbit length actually used
    double truncation = 0.0;
    std::vector<CorrPoint> curve;      // at log-spaced lags
    std::vector<uint64_t> n_grid;      // partial-sum horizons
    std::vector<double> s_of_n;        // S(N) = (1/M) sum_{k<=N} sum_i <r_i, r_{i+k}>
    std::vector<double> s_oblique;     // same, both flights same oblique class
    LineFit lnn2_fit;                  // S(N) regressed on (ln N)^2, N >= 100
    uint64_t frozen = 0;
};

/// Single-orbit estimator (inherently sequential; runs on one thread).
CorrResult correlation(const Engine& eng, uint64_t m, uint64_t j_max,
                       double truncation, uint64_t seed);

/// Pairs (|r_i|, |r_{i+gap}|) from one orbit, for symmetry tests.
std::vector<std::pair<double, double>> flight_pairs(const Engine& eng,
                                                    uint64_t m, int gap,
                                                    uint64_t seed);

// ---------------------------------------------------------------------------
// Mean squared displacement over a trajectory ensemble

struct MsdPoint {
    uint64_t n = 0;
    double msd = 0.0;
    double stderr_ = 0.0;
    uint64_t k_samples = 0;
};

struct MsdCurve {
    std::vector<uint64_t> grid;
    std::vector<double> sum2, sum4;   // per grid point
    std::vector<double> sumx, sumy;   // mean displacement components
    uint64_t k = 0;
    uint64_t frozen = 0;

    std::vector<MsdPoint> points() const;
    void merge(const MsdCurve& o);
};

struct MsdResult {
    MsdCurve curve;
    ModelSelection models;  // fits of MSD/n for n >= 8
};

MsdResult msd(const Engine& eng, uint64_t k, uint64_t n_max, uint64_t seed,
              int workers);

// ---------------------------------------------------------------------------
// Continuous-time rescaling

struct CTimeResult {
    std::vector<double> t_grid;
    std::vector<double> msd_t, msd_t_err;
    std::vector<MsdPoint> msd_n;
    double eta_hat = 0.0;          // total path length / total collisions
    double c_cont = 0.0;           // MSD(t*) / (t* (ln t*)^2)
    double c_disc = 0.0;           // MSD(n*) / (n* (ln n*)^2)
    uint64_t total_collisions = 0;
    double total_time = 0.0;
    uint64_t frozen = 0;
};

CTimeResult ctime_rescale(const Engine& eng, uint64_t k, double t_max,
                          uint64_t seed, int workers);

} // namespace windtree
