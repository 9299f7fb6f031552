#include "windtree/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "windtree/corridors.hpp"
#include "windtree/engine.hpp"
#include "windtree/experiments.hpp"
#include "windtree/model.hpp"

namespace windtree {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const char* class_name(CorridorClass c) {
    switch (c) {
        case CorridorClass::Horizontal: return "horizontal";
        case CorridorClass::Vertical: return "vertical";
        case CorridorClass::ObliquePlus: return "oblique_plus";
        case CorridorClass::ObliqueMinus: return "oblique_minus";
        default: return "none";
    }
}

const char* label_name(CorridorLabel l) {
    switch (l) {
        case CorridorLabel::Horizontal: return "horizontal";
        case CorridorLabel::Vertical: return "vertical";
        case CorridorLabel::ObliquePlus: return "oblique_plus";
        case CorridorLabel::ObliqueMinus: return "oblique_minus";
        default: return "oblique_other";
    }
}

const char* end_name(FlightEnd e) {
    switch (e) {
        case FlightEnd::Collision: return "collision";
        case FlightEnd::EscapedMaxLen: return "escaped";
        default: return "corner";
    }
}

const char* regime_name(HorizonRegime r) {
    switch (r) {
        case HorizonRegime::FiniteHorizon: return "finite";
        case HorizonRegime::InfiniteTypeIOnly: return "infinite_type1_only";
        default: return "infinite_with_type2";
    }
}

const char* growth_name(GrowthModel m) {
    switch (m) {
        case GrowthModel::Constant: return "constant";
        case GrowthModel::LogN: return "log_n";
        default: return "log_n_sq";
    }
}

// --- model selection ------------------------------------------------------

struct ModelOpts {
    std::string preset;
    std::string kind = "windtree";
    std::string theta_tan;  // "m/n"
    double theta = 0.0;
    double a = 0.0;
    double r = 0.0;
    double disk_radius = 0.0;
};

void add_model_options(CLI::App* sub, ModelOpts& mo) {
    sub->add_option("--preset", mo.preset,
                    "Named configuration: tail, canonical, finite, lorentz");
    sub->add_option("--kind", mo.kind, "Scatterer kind: windtree | lorentz");
    sub->add_option("--tan", mo.theta_tan,
                    "Rhombus half-angle as a rational tangent m/n");
    sub->add_option("--theta", mo.theta, "Rhombus half-angle in radians");
    sub->add_option("--a", mo.a, "Rhombus side length");
    sub->add_option("--r", mo.r, "Moving-disk radius");
    sub->add_option("--disk-radius", mo.disk_radius,
                    "Lorentz scatterer radius");
}

ModelParams build_params(const ModelOpts& mo) {
    if (!mo.preset.empty()) {
        auto p = ModelParams::preset(mo.preset);
        if (!p) throw CliError("unknown preset: " + mo.preset);
        return *p;
    }
    if (mo.kind == "lorentz") {
        if (mo.disk_radius <= 0)
            throw CliError("lorentz kind needs --disk-radius > 0");
        return ModelParams::lorentz(mo.disk_radius, mo.r);
    }
    if (mo.kind != "windtree")
        throw CliError("unknown kind: " + mo.kind);
    if (mo.a <= 0) throw CliError("windtree kind needs --a > 0");
    if (!mo.theta_tan.empty()) {
        long m = 0, n = 0;
        if (std::sscanf(mo.theta_tan.c_str(), "%ld/%ld", &m, &n) != 2 ||
            m <= 0 || n <= 0)
            throw CliError("--tan expects m/n with positive integers");
        return ModelParams::wind_tree_tan(m, n, mo.a, mo.r);
    }
    if (mo.theta <= 0)
        throw CliError("windtree kind needs --tan m/n or --theta > 0");
    return ModelParams::wind_tree(mo.theta, mo.a, mo.r);
}

json model_json(const ModelParams& p) {
    json j;
    if (p.kind == ScattererKind::WindTree) {
        j["kind"] = "windtree";
        j["theta"] = p.theta;
        if (p.theta_tan)
            j["theta_tan"] = {p.theta_tan->first, p.theta_tan->second};
        j["a"] = p.a;
    } else {
        j["kind"] = "lorentz";
        j["disk_radius"] = p.disk_radius;
    }
    j["r"] = p.r;
    return j;
}

ModelParams validated_params(const ModelOpts& mo) {
    ModelParams p = build_params(mo);
    ValidationReport rep = validate_params(p);
    if (!rep.ok) {
        for (const auto& is : rep.issues)
            std::cerr << "error: " << is.code << ": " << is.message << "\n";
        throw CliError("configuration rejected");
    }
    return p;
}

// --- output plumbing ------------------------------------------------------

struct OutputOpts {
    std::string out;          // CSV destination; stdout when empty
    std::string summary_out;  // optional JSON copy
    bool timing = false;
};

void add_output_options(CLI::App* sub, OutputOpts& oo) {
    sub->add_option("--out", oo.out, "Write the CSV table to this file");
    sub->add_option("--summary-out", oo.summary_out,
                    "Also write the JSON summary to this file");
    sub->add_flag("--timing", oo.timing,
                  "Include wall-clock runtime in the summary (makes the "
                  "summary non-reproducible byte for byte)");
}

std::ofstream open_file(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw CliError("cannot open output file: " + path);
    return f;
}

void emit_summary(json j, const OutputOpts& oo, Clock::time_point t0) {
    if (oo.timing)
        j["runtime_seconds"] =
            std::chrono::duration<double>(Clock::now() - t0).count();
    std::string text = j.dump(2);
    text += '\n';
    std::cout << text;
    if (!oo.summary_out.empty()) open_file(oo.summary_out) << text;
}

json fit_json(const PowerLawFit& f) {
    return json{{"beta", f.beta},
                {"beta_err", f.beta_err},
                {"c", f.c},
                {"r2", f.r2},
                {"n_bins", f.n_bins}};
}

json fit_json(const LineFit& f) {
    return json{{"slope", f.slope},         {"slope_err", f.slope_err},
                {"intercept", f.intercept}, {"intercept_err", f.intercept_err},
                {"r2", f.r2},               {"n_points", f.n_points}};
}

json fit_json(const ScalingFit& f) {
    return json{{"c", f.c},
                {"c_err", f.c_err},
                {"rss", f.rss},
                {"aic", f.aic},
                {"r2", f.r2}};
}

// --- subcommand bodies ----------------------------------------------------

int cmd_validate(const ModelOpts& mo, const OutputOpts& oo,
                 Clock::time_point t0) {
    ModelParams p = build_params(mo);
    ValidationReport rep = validate_params(p);
    json j;
    j["command"] = "validate";
    j["model"] = model_json(p);
    j["ok"] = rep.ok;
    j["edge_corridor_regime"] = rep.edge_corridor_regime;
    j["issues"] = json::array();
    for (const auto& is : rep.issues)
        j["issues"].push_back({{"code", is.code}, {"message", is.message}});
    if (rep.ok) {
        GeometrySummary gs = geometry_summary(p);
        j["geometry"] = {{"perimeter", gs.perimeter},
                         {"area", gs.area},
                         {"mean_free_path", gs.mean_free_path}};
    }
    emit_summary(j, oo, t0);
    return rep.ok ? 0 : 2;
}

int cmd_corridors(const ModelOpts& mo, int max_denom, bool as_json,
                  const OutputOpts& oo, Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    auto specs = enumerate_corridors(p, max_denom);
    HorizonRegime regime = classify_regime(p, max_denom);
    if (!as_json) {
        std::cout << "regime: " << regime_name(regime) << "\n";
        std::cout << "open corridors (max denom " << max_denom
                  << "): " << specs.size() << "\n";
        for (const auto& c : specs) {
            std::printf("  (%3d,%3d)  %s  %-13s  width %s  eff %s\n", c.px,
                        c.py, c.type == CorridorType::TypeII ? "II" : "I ",
                        label_name(c.label), g17(c.width_math).c_str(),
                        g17(c.width_eff).c_str());
        }
        return 0;
    }
    json j;
    j["command"] = "corridors";
    j["model"] = model_json(p);
    j["max_denom"] = max_denom;
    j["regime"] = regime_name(regime);
    j["corridors"] = json::array();
    for (const auto& c : specs)
        j["corridors"].push_back(
            {{"p", {c.px, c.py}},
             {"type", c.type == CorridorType::TypeII ? "II" : "I"},
             {"label", label_name(c.label)},
             {"width_math", c.width_math},
             {"width_eff", c.width_eff}});
    if (p.kind == ScattererKind::WindTree && p.theta_tan &&
        p.theta_tan->first == p.theta_tan->second && max_denom >= 3) {
        SuppressionSup sup = type1_suppression_sup(max_denom);
        j["skew_suppression"] = {{"value", sup.value},
                                 {"m", sup.m},
                                 {"n", sup.n}};
    }
    emit_summary(j, oo, t0);
    return 0;
}

int cmd_trace(const ModelOpts& mo, uint64_t n, double max_len, uint64_t seed,
              const OutputOpts& oo, Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    Engine eng(p);
    CounterRng rng(seed, 0);
    PhasePoint x = eng.sample_liouville(rng);

    std::ofstream file;
    bool to_file = !oo.out.empty();
    if (to_file) file = open_file(oo.out);
    std::ostream& os = to_file ? file : std::cout;

    os << "n,cell_x,cell_y,x,y,t,s,phi,end_kind,corridor_class\n";
    double t = 0.0;
    uint64_t flights = 0;
    FlightEnd last = FlightEnd::Collision;
    for (uint64_t i = 0; i < n; ++i) {
        StepResult st = eng.map(x, max_len);
        Vec2 pos = eng.position_local(x);
        os << i << ',' << x.cx << ',' << x.cy << ','
           << g17(pos.x + double(x.cx)) << ',' << g17(pos.y + double(x.cy))
           << ',' << g17(t) << ',' << g17(x.s) << ',' << g17(x.phi) << ','
           << end_name(st.end) << ',' << class_name(st.flight.corridor_class)
           << '\n';
        ++flights;
        t += st.flight.length;
        last = st.end;
        if (st.end != FlightEnd::Collision) break;
        x = st.hit;
    }
    if (to_file) {
        json j;
        j["command"] = "trace";
        j["model"] = model_json(p);
        j["seed"] = seed;
        j["flights"] = flights;
        j["total_time"] = t;
        j["end"] = end_name(last);
        emit_summary(j, oo, t0);
    }
    return 0;
}

int cmd_tail(const ModelOpts& mo, double n, double max_len, double fit_lmin,
             double fit_lmax, uint64_t seed, int workers, const OutputOpts& oo,
             Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    Engine eng(p);
    TailHistogram h = flight_tail(eng, uint64_t(n), max_len, seed,
                                  resolve_workers(workers));
    if (fit_lmax <= 0) fit_lmax = max_len / 10;

    if (!oo.out.empty()) {
        auto f = open_file(oo.out);
        f << "class,bin_lo,bin_hi,count,ccdf\n";
        for (size_t k = 0; k < h.counts.size(); ++k)
            for (int b = 0; b < h.n_bins(); ++b) {
                if (h.counts[k][b] == 0) continue;
                f << class_name(CorridorClass(k)) << ',' << g17(h.bin_lo(b))
                  << ',' << g17(h.bin_lo(b + 1)) << ',' << h.counts[k][b]
                  << ',' << g17(h.ccdf(CorridorClass(k), h.bin_lo(b))) << '\n';
            }
    }

    json j;
    j["command"] = "tail";
    j["model"] = model_json(p);
    j["seed"] = seed;
    j["n"] = h.n_samples;
    j["max_len"] = max_len;
    j["censored"] = h.censored;
    j["fit_window"] = {fit_lmin, fit_lmax};
    int fits_ok = 0;
    auto put = [&](const char* key, auto&& attempt) {
        try {
            j["classes"][key]["fit"] = fit_json(attempt());
            ++fits_ok;
        } catch (const InsufficientData&) {
            j["classes"][key]["fit"] = nullptr;
        }
    };
    for (auto cls : {CorridorClass::Horizontal, CorridorClass::Vertical,
                     CorridorClass::ObliquePlus, CorridorClass::ObliqueMinus}) {
        uint64_t events = 0;
        for (auto c : h.counts[size_t(cls)]) events += c;
        j["classes"][class_name(cls)]["events"] = events;
        put(class_name(cls),
            [&] { return fit_powerlaw_ccdf(h, cls, fit_lmin, fit_lmax); });
    }
    put("oblique_pooled",
        [&] { return fit_powerlaw_ccdf_pooled_oblique(h, fit_lmin, fit_lmax); });
    if (fits_ok == 0)
        throw InsufficientData("tail: no class had enough binned events");
    emit_summary(j, oo, t0);
    return 0;
}

int cmd_moment(const ModelOpts& mo, double n, double rmin, double rmax,
               int ppd, uint64_t seed, int workers, const OutputOpts& oo,
               Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    Engine eng(p);
    MomentCurve mc = truncated_second_moment(eng, uint64_t(n),
                                             log_grid(1.0, rmax, ppd), seed,
                                             resolve_workers(workers));
    if (!oo.out.empty()) {
        auto f = open_file(oo.out);
        f << "R,phi_mean,stderr\n";
        auto mean = mc.phi_mean();
        auto err = mc.phi_err();
        for (size_t k = 0; k < mc.R.size(); ++k)
            f << g17(mc.R[k]) << ',' << g17(mean[k]) << ',' << g17(err[k])
              << '\n';
    }
    LineFit lf = fit_moment_log(mc, rmin, rmax);
    json j;
    j["command"] = "moment";
    j["model"] = model_json(p);
    j["seed"] = seed;
    j["n"] = mc.n_samples;
    j["fit_window"] = {rmin, rmax};
    j["fit"] = fit_json(lf);
    emit_summary(j, oo, t0);
    return 0;
}

int cmd_corr(const ModelOpts& mo, double m, double jmax, double trunc,
             uint64_t seed, const OutputOpts& oo, Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    Engine eng(p);
    CorrResult res = correlation(eng, uint64_t(m), uint64_t(jmax), trunc, seed);
    if (!oo.out.empty()) {
        auto f = open_file(oo.out);
        f << "j,c_j,stderr,partial_sum\n";
        for (size_t k = 0; k < res.curve.size(); ++k) {
            const auto& pt = res.curve[k];
            f << pt.j << ',' << g17(pt.c_j) << ',' << g17(pt.stderr_) << ',';
            if (pt.j >= 1) f << g17(res.s_of_n[k - 1]);
            f << '\n';
        }
    }
    json j;
    j["command"] = "corr";
    j["model"] = model_json(p);
    j["seed"] = seed;
    j["m"] = res.m;
    j["truncation"] = res.truncation;
    j["frozen"] = res.frozen;
    j["c0"] = res.curve.empty() ? 0.0 : res.curve.front().c_j;
    j["lnn2_fit"] = fit_json(res.lnn2_fit);
    j["s_top"] = res.s_of_n.empty() ? 0.0 : res.s_of_n.back();
    j["s_oblique_top"] = res.s_oblique.empty() ? 0.0 : res.s_oblique.back();
    emit_summary(j, oo, t0);
    return 0;
}

int cmd_msd(const ModelOpts& mo, double k, double nmax, uint64_t seed,
            int workers, const OutputOpts& oo, Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    Engine eng(p);
    MsdResult res =
        msd(eng, uint64_t(k), uint64_t(nmax), seed, resolve_workers(workers));
    if (!oo.out.empty()) {
        auto f = open_file(oo.out);
        f << "n,msd,stderr,k_samples\n";
        for (const auto& pt : res.curve.points())
            f << pt.n << ',' << g17(pt.msd) << ',' << g17(pt.stderr_) << ','
              << pt.k_samples << '\n';
    }
    json j;
    j["command"] = "msd";
    j["model"] = model_json(p);
    j["seed"] = seed;
    j["k"] = res.curve.k;
    j["frozen"] = res.curve.frozen;
    j["models"]["best"] = growth_name(res.models.best);
    j["models"]["constant"] = fit_json(res.models.fits[0]);
    j["models"]["log_n"] = fit_json(res.models.fits[1]);
    j["models"]["log_n_sq"] = fit_json(res.models.fits[2]);
    if (!res.curve.grid.empty() && res.curve.k > 0) {
        size_t last = res.curve.grid.size() - 1;
        j["mean_final_displacement"] = {
            res.curve.sumx[last] / double(res.curve.k),
            res.curve.sumy[last] / double(res.curve.k)};
    }
    emit_summary(j, oo, t0);
    return 0;
}

int cmd_ctime(const ModelOpts& mo, double k, double tmax, uint64_t seed,
              int workers, const OutputOpts& oo, Clock::time_point t0) {
    ModelParams p = validated_params(mo);
    Engine eng(p);
    CTimeResult res =
        ctime_rescale(eng, uint64_t(k), tmax, seed, resolve_workers(workers));
    if (!oo.out.empty()) {
        auto f = open_file(oo.out);
        f << "t,msd_t,stderr\n";
        for (size_t i = 0; i < res.t_grid.size(); ++i)
            f << g17(res.t_grid[i]) << ',' << g17(res.msd_t[i]) << ','
              << g17(res.msd_t_err[i]) << '\n';
    }
    json j;
    j["command"] = "ctime";
    j["model"] = model_json(p);
    j["seed"] = seed;
    j["k"] = k;
    j["t_max"] = tmax;
    j["eta_hat"] = res.eta_hat;
    j["c_cont"] = res.c_cont;
    j["c_disc"] = res.c_disc;
    j["ratio_cont_disc_eta"] =
        res.c_disc != 0 ? res.c_cont * res.eta_hat / res.c_disc : 0.0;
    j["total_collisions"] = res.total_collisions;
    j["total_time"] = res.total_time;
    j["frozen"] = res.frozen;
    if (!res.msd_n.empty())
        j["msd_n_top"] = {{"n", res.msd_n.back().n},
                          {"msd", res.msd_n.back().msd}};
    emit_summary(j, oo, t0);
    return 0;
}

int cmd_report(uint64_t seed, int workers, bool full, const OutputOpts& oo,
               Clock::time_point t0) {
    int w = resolve_workers(workers);
    double scale = full ? 10.0 : 1.0;
    json j;
    j["command"] = "report";
    j["seed"] = seed;
    j["scale"] = full ? "full" : "quick";

    for (const char* name : {"tail", "canonical", "finite", "lorentz"}) {
        ModelParams p = *ModelParams::preset(name);
        json e;
        e["model"] = model_json(p);
        ValidationReport rep = validate_params(p);
        e["ok"] = rep.ok;
        e["edge_corridor_regime"] = rep.edge_corridor_regime;
        GeometrySummary gs = geometry_summary(p);
        e["geometry"] = {{"perimeter", gs.perimeter},
                         {"area", gs.area},
                         {"mean_free_path", gs.mean_free_path}};
        e["regime"] = regime_name(classify_regime(p));
        auto specs = enumerate_corridors(p, 64);
        e["open_corridors"] = specs.size();
        Engine eng(p);
        MsdResult mres = msd(eng, uint64_t(200 * scale), 1000, seed, w);
        e["msd_best_model"] = growth_name(mres.models.best);
        if (std::string(name) == "tail") {
            TailHistogram h =
                flight_tail(eng, uint64_t(200000 * scale), 1e4, seed, w);
            e["tail_censored"] = h.censored;
            try {
                e["tail_fit_pooled_oblique"] =
                    fit_json(fit_powerlaw_ccdf_pooled_oblique(h, 10, 1000));
            } catch (const InsufficientData&) {
                e["tail_fit_pooled_oblique"] = nullptr;
            }
            MomentCurve mc = truncated_second_moment(
                eng, uint64_t(200000 * scale), log_grid(1.0, 1e3, 8), seed, w);
            try {
                e["moment_fit"] = fit_json(fit_moment_log(mc, 10, 1e3));
            } catch (const InsufficientData&) {
                e["moment_fit"] = nullptr;
            }
            CorrResult cres =
                correlation(eng, uint64_t(200000 * scale), 20000, 1e3, seed);
            e["corr_lnn2_fit"] = fit_json(cres.lnn2_fit);
            CTimeResult ct =
                ctime_rescale(eng, uint64_t(64 * scale), 2000, seed, w);
            e["eta_hat"] = ct.eta_hat;
            e["ratio_cont_disc_eta"] =
                ct.c_disc != 0 ? ct.c_cont * ct.eta_hat / ct.c_disc : 0.0;
        }
        j["presets"][name] = e;
    }
    emit_summary(j, oo, t0);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Billiard in a periodic field of rounded-rhombus scatterers: "
                 "corridor structure and diffusion statistics"};
    app.require_subcommand(1);
    Clock::time_point t0 = Clock::now();
    int rc = 0;

    // validate ---------------------------------------------------------
    auto mo_validate = std::make_shared<ModelOpts>();
    auto oo_validate = std::make_shared<OutputOpts>();
    {
        auto* sub = app.add_subcommand("validate",
                                       "Check a configuration and print its "
                                       "geometry summary");
        add_model_options(sub, *mo_validate);
        add_output_options(sub, *oo_validate);
        sub->callback(
            [&, mo_validate, oo_validate] {
                rc = cmd_validate(*mo_validate, *oo_validate, t0);
            });
    }

    // corridors ----------------------------------------------------------
    auto mo_cor = std::make_shared<ModelOpts>();
    auto oo_cor = std::make_shared<OutputOpts>();
    auto cor_md = std::make_shared<int>(64);
    auto cor_json = std::make_shared<bool>(false);
    {
        auto* sub = app.add_subcommand("corridors",
                                       "List the open corridors of the "
                                       "configuration");
        add_model_options(sub, *mo_cor);
        add_output_options(sub, *oo_cor);
        sub->add_option("--max-denom", *cor_md,
                        "Bound on corridor direction components");
        sub->add_flag("--json", *cor_json, "Emit JSON instead of a table");
        sub->callback([&, mo_cor, oo_cor, cor_md, cor_json] {
            rc = cmd_corridors(*mo_cor, *cor_md, *cor_json, *oo_cor, t0);
        });
    }

    // trace --------------------------------------------------------------
    auto mo_tr = std::make_shared<ModelOpts>();
    auto oo_tr = std::make_shared<OutputOpts>();
    auto tr_n = std::make_shared<double>(100);
    auto tr_maxlen = std::make_shared<double>(1e4);
    auto tr_seed = std::make_shared<uint64_t>(0);
    {
        auto* sub = app.add_subcommand("trace",
                                       "Write one orbit as CSV: each row is "
                                       "a departure state plus the flight's "
                                       "outcome");
        add_model_options(sub, *mo_tr);
        add_output_options(sub, *oo_tr);
        sub->add_option("--n", *tr_n, "Number of flights");
        sub->add_option("--max-len", *tr_maxlen, "Censoring length");
        sub->add_option("--seed", *tr_seed, "RNG seed")->required();
        sub->callback([&, mo_tr, oo_tr, tr_n, tr_maxlen, tr_seed] {
            rc = cmd_trace(*mo_tr, uint64_t(*tr_n), *tr_maxlen, *tr_seed,
                           *oo_tr, t0);
        });
    }

    // tail -----------------------------------------------------------------
    auto mo_tail = std::make_shared<ModelOpts>();
    auto oo_tail = std::make_shared<OutputOpts>();
    auto tl_n = std::make_shared<double>(1e6);
    auto tl_maxlen = std::make_shared<double>(1e4);
    auto tl_lmin = std::make_shared<double>(10.0);
    auto tl_lmax = std::make_shared<double>(0.0);
    auto tl_seed = std::make_shared<uint64_t>(0);
    auto tl_workers = std::make_shared<int>(0);
    {
        auto* sub = app.add_subcommand("tail",
                                       "Free-flight length distribution from "
                                       "the collision measure");
        add_model_options(sub, *mo_tail);
        add_output_options(sub, *oo_tail);
        sub->add_option("--n", *tl_n, "Number of sampled flights");
        sub->add_option("--max-len", *tl_maxlen, "Censoring length");
        sub->add_option("--fit-lmin", *tl_lmin, "Fit window lower edge");
        sub->add_option("--fit-lmax", *tl_lmax,
                        "Fit window upper edge (default max-len/10)");
        sub->add_option("--seed", *tl_seed, "RNG seed")->required();
        sub->add_option("--workers", *tl_workers,
                        "Worker threads (default: WINDTREE_WORKERS or "
                        "hardware)");
        sub->callback([&, mo_tail, oo_tail, tl_n, tl_maxlen, tl_lmin, tl_lmax,
                       tl_seed, tl_workers] {
            rc = cmd_tail(*mo_tail, *tl_n, *tl_maxlen, *tl_lmin, *tl_lmax,
                          *tl_seed, *tl_workers, *oo_tail, t0);
        });
    }

    // moment -----------------------------------------------------------
    auto mo_mom = std::make_shared<ModelOpts>();
    auto oo_mom = std::make_shared<OutputOpts>();
    auto mm_n = std::make_shared<double>(1e6);
    auto mm_rmin = std::make_shared<double>(1e2);
    auto mm_rmax = std::make_shared<double>(1e4);
    auto mm_ppd = std::make_shared<int>(8);
    auto mm_seed = std::make_shared<uint64_t>(0);
    auto mm_workers = std::make_shared<int>(0);
    {
        auto* sub = app.add_subcommand("moment",
                                       "Truncated second moment of the "
                                       "flight length against ln R");
        add_model_options(sub, *mo_mom);
        add_output_options(sub, *oo_mom);
        sub->add_option("--n", *mm_n, "Number of sampled flights");
        sub->add_option("--rmin", *mm_rmin, "Fit window lower edge");
        sub->add_option("--rmax", *mm_rmax, "Truncation grid top");
        sub->add_option("--ppd", *mm_ppd, "Grid points per decade");
        sub->add_option("--seed", *mm_seed, "RNG seed")->required();
        sub->add_option("--workers", *mm_workers, "Worker threads");
        sub->callback([&, mo_mom, oo_mom, mm_n, mm_rmin, mm_rmax, mm_ppd,
                       mm_seed, mm_workers] {
            rc = cmd_moment(*mo_mom, *mm_n, *mm_rmin, *mm_rmax, *mm_ppd,
                            *mm_seed, *mm_workers, *oo_mom, t0);
        });
    }

    // corr -----------------------------------------------------------
    auto mo_corr = std::make_shared<ModelOpts>();
    auto oo_corr = std::make_shared<OutputOpts>();
    auto cr_m = std::make_shared<double>(1e6);
    auto cr_jmax = std::make_shared<double>(1e4);
    auto cr_trunc = std::make_shared<double>(1e3);
    auto cr_seed = std::make_shared<uint64_t>(0);
    {
        auto* sub = app.add_subcommand("corr",
                                       "Displacement autocorrelation and its "
                                       "partial sums along one orbit");
        add_model_options(sub, *mo_corr);
        add_output_options(sub, *oo_corr);
        sub->add_option("--m", *cr_m, "Orbit length in collisions");
        sub->add_option("--jmax", *cr_jmax, "Largest lag / horizon");
        sub->add_option("--trunc", *cr_trunc,
                        "Flight-length truncation for the correlands");
        sub->add_option("--seed", *cr_seed, "RNG seed")->required();
        sub->callback([&, mo_corr, oo_corr, cr_m, cr_jmax, cr_trunc, cr_seed] {
            rc = cmd_corr(*mo_corr, *cr_m, *cr_jmax, *cr_trunc, *cr_seed,
                          *oo_corr, t0);
        });
    }

    // msd ------------------------------------------------------------
    auto mo_msd = std::make_shared<ModelOpts>();
    auto oo_msd = std::make_shared<OutputOpts>();
    auto md_k = std::make_shared<double>(1000);
    auto md_nmax = std::make_shared<double>(1e4);
    auto md_seed = std::make_shared<uint64_t>(0);
    auto md_workers = std::make_shared<int>(0);
    {
        auto* sub = app.add_subcommand("msd",
                                       "Mean squared displacement over an "
                                       "ensemble, with growth-model "
                                       "selection");
        add_model_options(sub, *mo_msd);
        add_output_options(sub, *oo_msd);
        sub->add_option("--k", *md_k, "Number of trajectories");
        sub->add_option("--nmax", *md_nmax, "Collisions per trajectory");
        sub->add_option("--seed", *md_seed, "RNG seed")->required();
        sub->add_option("--workers", *md_workers, "Worker threads");
        sub->callback([&, mo_msd, oo_msd, md_k, md_nmax, md_seed, md_workers] {
            rc = cmd_msd(*mo_msd, *md_k, *md_nmax, *md_seed, *md_workers,
                         *oo_msd, t0);
        });
    }

    // ctime ------------------------------------------------------------
    auto mo_ct = std::make_shared<ModelOpts>();
    auto oo_ct = std::make_shared<OutputOpts>();
    auto ct_k = std::make_shared<double>(200);
    auto ct_tmax = std::make_shared<double>(1e4);
    auto ct_seed = std::make_shared<uint64_t>(0);
    auto ct_workers = std::make_shared<int>(0);
    {
        auto* sub = app.add_subcommand("ctime",
                                       "Continuous-time MSD and the "
                                       "collision-count rescaling check");
        add_model_options(sub, *mo_ct);
        add_output_options(sub, *oo_ct);
        sub->add_option("--k", *ct_k, "Number of trajectories");
        sub->add_option("--tmax", *ct_tmax, "Time horizon");
        sub->add_option("--seed", *ct_seed, "RNG seed")->required();
        sub->add_option("--workers", *ct_workers, "Worker threads");
        sub->callback([&, mo_ct, oo_ct, ct_k, ct_tmax, ct_seed, ct_workers] {
            rc = cmd_ctime(*mo_ct, *ct_k, *ct_tmax, *ct_seed, *ct_workers,
                           *oo_ct, t0);
        });
    }

    // report -----------------------------------------------------------
    auto oo_rep = std::make_shared<OutputOpts>();
    auto rp_seed = std::make_shared<uint64_t>(0);
    auto rp_workers = std::make_shared<int>(0);
    auto rp_full = std::make_shared<bool>(false);
    {
        auto* sub = app.add_subcommand("report",
                                       "Small-budget summary across the "
                                       "built-in presets");
        add_output_options(sub, *oo_rep);
        sub->add_option("--seed", *rp_seed, "RNG seed")->required();
        sub->add_option("--workers", *rp_workers, "Worker threads");
        sub->add_flag("--full", *rp_full, "10x the sample budgets");
        sub->callback([&, oo_rep, rp_seed, rp_workers, rp_full] {
            rc = cmd_report(*rp_seed, *rp_workers, *rp_full, *oo_rep, t0);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InsufficientData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return rc;
}

} // namespace windtree
