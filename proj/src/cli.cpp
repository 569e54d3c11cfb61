#include "deconv/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deconv/asymptotics.hpp"
#include "deconv/bandwidth.hpp"
#include "deconv/errors.hpp"
#include "deconv/estimators.hpp"
#include "deconv/simlab.hpp"

namespace deconv {

namespace {

std::string fmt(double v, int digits = 10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("malformed ") + what + " list: '" + text + "'");
        }
        if (pos != item.size())
            throw std::invalid_argument(std::string("malformed ") + what + " list: '" + text + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument(std::string("empty ") + what + " list");
    return out;
}

Kernel parse_kernel_spec(std::string s) {
    if (s.rfind("kernel:", 0) == 0) s = s.substr(7);
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("kernel spec must be 'R,S': '" + s + "'");
    try {
        const int r = std::stoi(s.substr(0, comma));
        const int ssm = std::stoi(s.substr(comma + 1));
        return Kernel(r, ssm);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("kernel spec must be 'R,S': '" + s + "'");
    }
}

std::vector<double> read_data_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open data file: " + path);
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        const std::string tok = line.substr(a, b - a + 1);
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            pos = std::string::npos;
        }
        if (pos != tok.size())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": not a number: '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("data file has no observations: " + path);
    return out;
}

//! Output sink: --out FILE or stdout.
class Out {
public:
    explicit Out(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::invalid_argument("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct CommonOpts {
    std::string out_path;
    double rel_tol = 1e-8;
    int panels = 4;

    QuadratureSpec spec() const {
        QuadratureSpec s;
        s.rel_tol = rel_tol;
        s.panels_per_period = panels;
        return s;
    }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--out", c.out_path, "write output to a file instead of stdout");
    cmd->add_option("--rel-tol", c.rel_tol, "quadrature relative tolerance");
    cmd->add_option("--panels", c.panels, "quadrature panels per oscillation period");
}

double resolve_bandwidth(const std::string& text, const std::vector<double>& data,
                         const ErrorModel& error, const Kernel& kernel,
                         const QuadratureSpec& spec) {
    if (text == "auto") {
        MisePlan plan;
        plan.error = error;
        plan.kernel = kappa2(kernel) != 0.0 ? kernel : Kernel{2, 2};
        plan.n = data.size();
        plan.roughness = RoughnessSource::OneStep;
        plan.data = data;
        plan.spec = spec;
        return select_bandwidth(plan).h_opt;
    }
    std::size_t pos = 0;
    double h = 0.0;
    try {
        h = std::stod(text, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != text.size() || h < 0.0)
        throw std::invalid_argument("bandwidth must be a nonnegative number or 'auto'");
    return h;
}

const char* estimand_arg_name(EstimandKind kind) {
    switch (kind) {
        case EstimandKind::Cdf: return "x";
        case EstimandKind::Quantile: return "u";
        case EstimandKind::AbsMoment: return "q";
        default: return "arg";
    }
}

int dispatch(CLI::App& app, int argc, const char* const* argv) {
    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"nonparametric deconvolution of errors-in-variables data"};
    app.require_subcommand(1);
    app.set_config("--config");

    // ---- estimate -------------------------------------------------------
    auto* est = app.add_subcommand("estimate", "distribution/density estimate on a grid");
    struct {
        std::string data, error, kernel = "4,2", bandwidth = "auto", quantity = "cdf", grid_list;
        std::size_t grid_n = 201;
        CommonOpts c;
    } eo;
    est->add_option("--data", eo.data, "input file, one float per line")->required();
    est->add_option("--error", eo.error, "error model spec")->required();
    est->add_option("--kernel", eo.kernel, "kernel spec R,S");
    est->add_option("--bandwidth", eo.bandwidth, "bandwidth value or 'auto'");
    est->add_option("--quantity", eo.quantity, "cdf | density")
        ->check(CLI::IsMember({"cdf", "density"}));
    est->add_option("--grid", eo.grid_n, "number of grid points over the default span");
    est->add_option("--grid-list", eo.grid_list, "explicit comma-separated grid");
    add_common(est, eo.c);
    est->callback([&]() {
        const auto data = read_data_file(eo.data);
        const auto error = parse_error_spec(eo.error);
        const auto kernel = parse_kernel_spec(eo.kernel);
        const auto spec = eo.c.spec();
        const double h = resolve_bandwidth(eo.bandwidth, data, error, kernel, spec);
        WeightContext ctx(kernel, error, h, spec);
        DeconvFit fit(data, ctx);
        std::vector<double> grid = eo.grid_list.empty() ? default_grid(fit, eo.grid_n)
                                                        : parse_list(eo.grid_list, "grid");
        Out out(eo.c.out_path);
        if (eo.quantity == "cdf") {
            const CdfCurve curve = evaluate_curve(fit, grid);
            out.stream() << "x,Fhat\n";
            for (std::size_t i = 0; i < grid.size(); ++i)
                out.stream() << fmt(grid[i]) << ',' << fmt(curve.values[i]) << '\n';
        } else {
            out.stream() << "x,fhat\n";
            for (double x : grid) out.stream() << fmt(x) << ',' << fmt(density_at(fit, x)) << '\n';
        }
    });

    // ---- quantile -------------------------------------------------------
    auto* qt = app.add_subcommand("quantile", "quantile estimates");
    struct {
        std::string data, error, kernel = "4,2", bandwidth = "auto", u_list;
        CommonOpts c;
    } qo;
    qt->add_option("--data", qo.data)->required();
    qt->add_option("--error", qo.error)->required();
    qt->add_option("--kernel", qo.kernel);
    qt->add_option("--bandwidth", qo.bandwidth);
    qt->add_option("--u", qo.u_list, "comma-separated quantile levels in (0,1)")->required();
    add_common(qt, qo.c);
    qt->callback([&]() {
        const auto data = read_data_file(qo.data);
        const auto error = parse_error_spec(qo.error);
        const auto kernel = parse_kernel_spec(qo.kernel);
        const auto spec = qo.c.spec();
        const double h = resolve_bandwidth(qo.bandwidth, data, error, kernel, spec);
        WeightContext ctx(kernel, error, h, spec);
        DeconvFit fit(data, ctx);
        Out out(qo.c.out_path);
        out.stream() << "u,xi\n";
        for (double u : parse_list(qo.u_list, "u"))
            out.stream() << fmt(u) << ',' << fmt(quantile(fit, u)) << '\n';
    });

    // ---- moments --------------------------------------------------------
    auto* mo = app.add_subcommand("moments", "polynomial and absolute moment estimates");
    struct {
        std::string data, error, kernel = "4,2", bandwidth, r_list, q_list;
        CommonOpts c;
    } mop;
    mo->add_option("--data", mop.data)->required();
    mo->add_option("--error", mop.error)->required();
    mo->add_option("--kernel", mop.kernel);
    mo->add_option("--bandwidth", mop.bandwidth, "required for --q");
    mo->add_option("--r", mop.r_list, "polynomial moment orders");
    mo->add_option("--q", mop.q_list, "absolute moment exponents");
    add_common(mo, mop.c);
    mo->callback([&]() {
        if (mop.r_list.empty() && mop.q_list.empty())
            throw std::invalid_argument("moments needs --r and/or --q");
        const auto data = read_data_file(mop.data);
        const auto error = parse_error_spec(mop.error);
        Out out(mop.c.out_path);
        out.stream() << "kind,order,value\n";
        if (!mop.r_list.empty()) {
            for (double r : parse_list(mop.r_list, "r")) {
                const int ri = static_cast<int>(std::llround(r));
                if (std::abs(r - ri) > 0.0 || ri < 1)
                    throw std::invalid_argument("--r orders must be positive integers");
                out.stream() << "poly," << ri << ',' << fmt(poly_moment(data, error, ri)) << '\n';
            }
        }
        if (!mop.q_list.empty()) {
            if (mop.bandwidth.empty())
                throw std::invalid_argument("--q requires --bandwidth");
            const auto kernel = parse_kernel_spec(mop.kernel);
            const auto spec = mop.c.spec();
            const double h = resolve_bandwidth(mop.bandwidth, data, error, kernel, spec);
            WeightContext ctx(kernel, error, h, spec);
            DeconvFit fit(data, ctx);
            AbsMomentEvaluator ev(fit);
            for (double q : parse_list(mop.q_list, "q"))
                out.stream() << "abs," << fmt(q) << ',' << fmt(ev(q)) << '\n';
        }
    });

    // ---- resample -------------------------------------------------------
    auto* rs = app.add_subcommand("resample", "inverse-transform draws from the monotonized fit");
    struct {
        std::string data, error, kernel = "4,2", bandwidth = "auto";
        std::size_t m = 0;
        std::uint64_t seed = 0;
        CommonOpts c;
    } ro;
    rs->add_option("--data", ro.data)->required();
    rs->add_option("--error", ro.error)->required();
    rs->add_option("--kernel", ro.kernel);
    rs->add_option("--bandwidth", ro.bandwidth);
    rs->add_option("--m", ro.m, "number of draws")->required();
    rs->add_option("--seed", ro.seed, "rng seed")->required();
    add_common(rs, ro.c);
    rs->callback([&]() {
        const auto data = read_data_file(ro.data);
        const auto error = parse_error_spec(ro.error);
        const auto kernel = parse_kernel_spec(ro.kernel);
        const auto spec = ro.c.spec();
        const double h = resolve_bandwidth(ro.bandwidth, data, error, kernel, spec);
        WeightContext ctx(kernel, error, h, spec);
        DeconvFit fit(data, ctx);
        RngStream rng(ro.seed);
        Out out(ro.c.out_path);
        for (double v : resample(fit, ro.m, rng)) out.stream() << fmt(v, 17) << '\n';
    });

    // ---- bandwidth ------------------------------------------------------
    auto* bw = app.add_subcommand("bandwidth", "plug-in bandwidth selection");
    struct {
        std::string error, data, target, roughness = "exact", kernel = "2,2", curve_path;
        std::size_t n = 0;
        CommonOpts c;
    } bo;
    bw->add_option("--error", bo.error)->required();
    bw->add_option("--n", bo.n, "sample size for the variance term")->required();
    bw->add_option("--data", bo.data, "data file (normal/onestep roughness)");
    bw->add_option("--target", bo.target, "target model (exact roughness)");
    bw->add_option("--roughness", bo.roughness, "exact | normal | onestep")
        ->check(CLI::IsMember({"exact", "normal", "onestep"}));
    bw->add_option("--kernel", bo.kernel);
    bw->add_option("--curve", bo.curve_path, "write the (h, M(h)) search curve as CSV");
    add_common(bw, bo.c);
    bw->callback([&]() {
        MisePlan plan;
        plan.error = parse_error_spec(bo.error);
        plan.kernel = parse_kernel_spec(bo.kernel);
        plan.n = bo.n;
        plan.spec = bo.c.spec();
        std::vector<double> data;
        TargetModel target = TargetModel::std_normal();
        if (bo.roughness == "exact") {
            if (bo.target.empty())
                throw std::invalid_argument("exact roughness requires --target");
            target = parse_target_spec(bo.target);
            plan.roughness = RoughnessSource::Exact;
            plan.target = &target;
        } else {
            if (bo.data.empty())
                throw std::invalid_argument("data-driven roughness requires --data");
            data = read_data_file(bo.data);
            plan.data = data;
            plan.roughness = bo.roughness == "normal" ? RoughnessSource::NormalReference
                                                      : RoughnessSource::OneStep;
        }
        const BandwidthResult res = select_bandwidth(plan);
        Out out(bo.c.out_path);
        out.stream() << "h_opt,mise_min\n"
                     << fmt(res.h_opt) << ',' << fmt(res.mise_min) << '\n';
        if (!bo.curve_path.empty()) {
            std::ofstream curve(bo.curve_path);
            if (!curve) throw std::invalid_argument("cannot open " + bo.curve_path);
            curve << "h,M\n";
            for (const auto& [h, m] : res.curve) curve << fmt(h) << ',' << fmt(m) << '\n';
        }
    });

    // ---- simulate -------------------------------------------------------
    auto* sim = app.add_subcommand("simulate", "seeded Monte Carlo experiment");
    struct {
        std::string target = "normal", error, estimand = "cdf", kernel = "4,2";
        std::string x_list, u_list, q_list, h_grid, dump_path;
        std::size_t n = 100, runs = 500;
        std::uint64_t seed = 0;
        int threads = 0;
        CommonOpts c;
    } so;
    sim->add_option("--target", so.target);
    sim->add_option("--error", so.error)->required();
    sim->add_option("--n", so.n)->required();
    sim->add_option("--estimand", so.estimand, "cdf | quantile | absmoment | ise | bandwidth")
        ->check(CLI::IsMember({"cdf", "quantile", "absmoment", "ise", "bandwidth"}));
    sim->add_option("--x", so.x_list, "cdf arguments");
    sim->add_option("--u", so.u_list, "quantile levels");
    sim->add_option("--q", so.q_list, "absolute-moment exponents");
    sim->add_option("--h-grid", so.h_grid, "comma-separated bandwidths");
    sim->add_option("--runs", so.runs);
    sim->add_option("--seed", so.seed, "rng seed (required: no wall-clock seeding)")->required();
    sim->add_option("--kernel", so.kernel);
    sim->add_option("--threads", so.threads, "worker threads (0 = library default)");
    sim->add_option("--dump-runs", so.dump_path, "per-run JSONL dump");
    add_common(sim, so.c);
    sim->callback([&]() {
        ExperimentConfig cfg;
        cfg.target = parse_target_spec(so.target);
        cfg.error = parse_error_spec(so.error);
        cfg.n = so.n;
        cfg.runs = so.runs;
        cfg.seed = so.seed;
        cfg.kernel = parse_kernel_spec(so.kernel);
        cfg.spec = so.c.spec();
        cfg.threads = so.threads;
        if (!so.h_grid.empty()) cfg.h_grid = parse_list(so.h_grid, "h-grid");
        const std::map<std::string, EstimandKind> kinds{
            {"cdf", EstimandKind::Cdf},
            {"quantile", EstimandKind::Quantile},
            {"absmoment", EstimandKind::AbsMoment},
            {"ise", EstimandKind::Ise},
            {"bandwidth", EstimandKind::Bandwidth}};
        cfg.estimand = kinds.at(so.estimand);
        if (cfg.estimand == EstimandKind::Cdf) cfg.args = parse_list(so.x_list, "x");
        if (cfg.estimand == EstimandKind::Quantile) cfg.args = parse_list(so.u_list, "u");
        if (cfg.estimand == EstimandKind::AbsMoment) cfg.args = parse_list(so.q_list, "q");

        std::unique_ptr<std::ofstream> dump;
        RunSink sink;
        if (!so.dump_path.empty()) {
            dump = std::make_unique<std::ofstream>(so.dump_path);
            if (!*dump) throw std::invalid_argument("cannot open " + so.dump_path);
            sink = [&dump](std::size_t run, double h, double arg, double value) {
                *dump << "{\"run\":" << run << ",\"h\":" << fmt(h, 17) << ",\"arg\":" << fmt(arg, 17)
                      << ",\"value\":";
                if (std::isnan(value))
                    *dump << "null";
                else
                    *dump << fmt(value, 17);
                *dump << "}\n";
            };
        }

        Out out(so.c.out_path);
        if (cfg.estimand == EstimandKind::Ise || cfg.estimand == EstimandKind::Bandwidth) {
            const IseSummary s = run_ise_experiment(cfg, sink);
            out.stream() << "# span=[" << fmt(s.span_lo) << ',' << fmt(s.span_hi)
                         << "] simpson_points=2049 h_opt_theoretical=" << fmt(s.h_opt_theoretical)
                         << " mise_min_theoretical=" << fmt(s.mise_min_theoretical)
                         << " failures=" << s.failures << '\n';
            out.stream() << "quantity,mean,bias,variance,mse,mc_se\n";
            auto row = [&](const char* name, const CellStats& cs) {
                out.stream() << name << ',' << fmt(cs.mean) << ',' << fmt(cs.bias) << ','
                             << fmt(cs.variance) << ',' << fmt(cs.mse) << ',' << fmt(cs.mc_se)
                             << '\n';
            };
            row("ise", s.ise);
            row("h_hat", s.h_hat);
        } else {
            const McSummary s = run_mse_experiment(cfg, sink);
            std::size_t total_failures = 0;
            for (const auto& c : s.cells) total_failures += c.failures;
            out.stream() << "h," << estimand_arg_name(cfg.estimand)
                         << ",bias,variance,mse,mc_se\n";
            for (std::size_t ih = 0; ih < s.h_grid.size(); ++ih)
                for (std::size_t a = 0; a < s.args.size(); ++a) {
                    const CellStats& cs = s.cell(ih, a);
                    out.stream() << fmt(s.h_grid[ih]) << ',' << fmt(s.args[a]) << ','
                                 << fmt(cs.bias) << ',' << fmt(cs.variance) << ',' << fmt(cs.mse)
                                 << ',' << fmt(cs.mc_se) << '\n';
                }
            if (total_failures > 0)
                std::cerr << "note: " << total_failures << " per-cell estimator failures\n";
        }
    });

    // ---- rates ----------------------------------------------------------
    auto* rt = app.add_subcommand("rates", "optimal rates and bandwidth orders");
    struct {
        double alpha = 1.0, beta = 0.0, C = 1.0, q = 0.0;
        bool has_q = false;
        std::size_t n = 0;
        CommonOpts c;
    } rto;
    rt->add_option("--alpha", rto.alpha)->required();
    rt->add_option("--beta", rto.beta)->required();
    rt->add_option("--n", rto.n)->required();
    rt->add_option("--C", rto.C, "bandwidth constant");
    rt->add_option("--q", rto.q, "absolute-moment exponent for rho4");
    add_common(rt, rto.c);
    rt->callback([&]() {
        std::optional<double> q;
        if (rt->count("--q") > 0) q = rto.q;
        const RateBundle rb = rates(rto.alpha, rto.beta, rto.n, rto.C, q);
        Out out(rto.c.out_path);
        out.stream() << "rho1,rho2,rho3,rho4,h1,h2,h3,ell\n"
                     << fmt(rb.rho1) << ',' << fmt(rb.rho2) << ',' << fmt(rb.rho3) << ','
                     << fmt(rb.rho4) << ',' << fmt(rb.h1) << ',' << fmt(rb.h2) << ','
                     << fmt(rb.h3) << ',' << fmt(rb.ell) << '\n';
    });

    // ---- asymp ----------------------------------------------------------
    auto* as = app.add_subcommand("asymp", "limit-theorem bias/variance constants");
    struct {
        double x = 0.0, alpha = 1.0, beta = 0.0, z = 1.0, a = 0.0, b = 0.0, h = 0.0, fx = -1.0;
        std::string kernel = "4,2", target, error;
        CommonOpts c;
    } ao;
    as->add_option("--x", ao.x)->required();
    as->add_option("--alpha", ao.alpha)->required();
    as->add_option("--beta", ao.beta)->required();
    as->add_option("--z", ao.z);
    as->add_option("--a", ao.a);
    as->add_option("--b", ao.b);
    as->add_option("--h", ao.h, "bandwidth for B2 (x != 0)");
    as->add_option("--fx", ao.fx, "f_X(x) for the variance constant");
    as->add_option("--target", ao.target, "compute f_X(x) by convolution");
    as->add_option("--error", ao.error);
    as->add_option("--kernel", ao.kernel);
    add_common(as, ao.c);
    as->callback([&]() {
        TailProfile prof;
        prof.alpha = ao.alpha;
        prof.beta = ao.beta;
        prof.z = ao.z;
        prof.a = ao.a;
        prof.b = ao.b;
        const Kernel kernel = parse_kernel_spec(ao.kernel);
        const auto spec = ao.c.spec();
        double fx = ao.fx;
        if (fx < 0.0 && !ao.target.empty() && !ao.error.empty())
            fx = fx_density(parse_target_spec(ao.target), parse_error_spec(ao.error), ao.x, spec);
        Out out(ao.c.out_path);
        out.stream() << "quantity,value\n";
        if (ao.x == 0.0)
            out.stream() << "B1," << fmt(bias_b1(kernel, prof)) << '\n';
        else if (ao.h > 0.0)
            out.stream() << "B2," << fmt(bias_b2(ao.h, ao.x, prof)) << '\n';
        if (fx >= 0.0)
            out.stream() << "V," << fmt(variance_v(ao.x, prof, kernel, fx, spec)) << '\n';
    });

    // ---- check-smoothness -----------------------------------------------
    auto* cs = app.add_subcommand("check-smoothness", "root-n feasibility of an error law");
    struct {
        std::string error;
        double q = 0.0;
        CommonOpts c;
    } co;
    cs->add_option("--error", co.error)->required();
    cs->add_option("--q", co.q, "moment-mode exponent");
    add_common(cs, co.c);
    cs->callback([&]() {
        std::optional<double> q;
        if (cs->count("--q") > 0) q = co.q;
        const auto rep = smoothness_class(parse_error_spec(co.error), q);
        Out out(co.c.out_path);
        out.stream() << to_string(rep.verdict) << ',' << fmt(rep.partial_integral) << '\n';
    });

    return dispatch(app, argc, argv);
}

}  // namespace deconv
