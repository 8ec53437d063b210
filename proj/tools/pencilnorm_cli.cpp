#include "pencilnorm/apps.hpp"
#include "pencilnorm/io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

using namespace pn;
using io::Json;

namespace {

// Exit-code contract: 0 ok, 1 I/O or config error, 2 infeasible input,
// 3 solver failure, 4 certificate violation.
constexpr int kOk = 0, kIoError = 1, kInfeasible = 2, kSolverFailure = 3, kCertViolation = 4;

struct Options {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> eps;
};

std::string out_path(const Options& opt, const std::string& name) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / name).string();
}

conic::SolveSettings settings_from(const Json& cfg, const Options& opt) {
    conic::SolveSettings st;
    st.eps = cfg.value("eps", 1e-7);
    if (opt.eps) st.eps = *opt.eps;
    if (cfg.contains("max_iter")) st.max_iter = cfg.at("max_iter").get<Eigen::Index>();
    return st;
}

std::uint64_t seed_from(const Json& cfg, const Options& opt) {
    if (opt.seed) return *opt.seed;
    return cfg.value("seed", std::uint64_t(0));
}

void reject_unknown(const Json& cfg, std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : cfg.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw std::runtime_error("config: unknown key '" + key + "'");
    }
}

apps::LineSpectrumModel model_from(const Json& cfg) {
    apps::LineSpectrumModel model;
    const Json& lines = cfg.at("lines");
    model.omegas.resize(Eigen::Index(lines.size()));
    model.coeffs.resize(Eigen::Index(lines.size()));
    for (Eigen::Index k = 0; k < model.omegas.size(); ++k) {
        const Json& ln = lines.at(std::size_t(k));
        model.omegas(k) = ln.at("omega").get<double>();
        model.coeffs(k) = Complex(ln.value("re", 1.0), ln.value("im", 0.0));
    }
    model.sigma = cfg.value("sigma", 0.0);
    return model;
}

std::vector<Eigen::Index> spread_indices(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
    std::vector<Eigen::Index> all(std::size_t(n), Eigen::Index(0));
    std::iota(all.begin(), all.end(), Eigen::Index(0));
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::size_t(k));
    std::sort(all.begin(), all.end());
    return all;
}

void print_atoms(const RVec& loc, const RVec& mag, const char* label) {
    std::printf("  %-14s magnitude\n", label);
    for (Eigen::Index k = 0; k < loc.size(); ++k)
        std::printf("  %-14.8f %.8f\n", loc(k), mag(k));
}

void write_spectrum(const Options& opt, const std::string& name, const RVec& loc,
                    const RVec& mag) {
    std::vector<std::pair<double, double>> rows;
    for (Eigen::Index k = 0; k < loc.size(); ++k) rows.emplace_back(loc(k), mag(k));
    io::write_csv(out_path(opt, name), "omega_or_theta,magnitude", rows);
}

// ---------------------------------------------------------------------------

int cmd_decompose(const Options& opt) {
    Json cfg = io::load_json(opt.config);
    reject_unknown(cfg, {"matrix", "matrix_file", "pencil", "curve", "tol"});
    CMat X = cfg.contains("matrix_file")
                 ? io::matrix_from_json(io::load_json(cfg.at("matrix_file").get<std::string>()))
                 : io::matrix_from_json(cfg.at("matrix"));
    pencil::PencilSpec pen = io::pencil_from_json(cfg.at("pencil"));
    region::CurveSpec curve = io::curve_from_json(cfg.at("curve"));
    const double tol = cfg.value("tol", 1e-6);
    pencil::AtomSet aset(pen, curve);
    decomp::AtomicDecomposition dec;
    try {
        dec = decomp::decompose_psd(X, aset, tol);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "infeasible input: %s\n", e.what());
        return kInfeasible;
    }
    io::save_json(out_path(opt, "decomposition.json"), io::decomposition_to_json(dec));
    std::printf("atoms: %zu  residual: %.3e\n", dec.atoms.size(), dec.residual);
    return kOk;
}

// ---------------------------------------------------------------------------

int run_covfit(const Json& cfg, const Options& opt) {
    reject_unknown(cfg, {"kind", "n", "N", "sigma", "gamma", "lines", "seed", "eps", "max_iter"});
    const Eigen::Index n = cfg.at("n").get<Eigen::Index>();
    const Eigen::Index N = cfg.at("N").get<Eigen::Index>();
    apps::LineSpectrumModel model = model_from(cfg);
    CVec y = apps::synth_signal(model, N, std::nullopt, seed_from(cfg, opt));
    CMat Rm = apps::sample_covariance(y, n);
    apps::RecoveryResult res =
        apps::covfit(Rm, cfg.at("gamma").get<double>(), settings_from(cfg, opt));
    Json out;
    out["objective"] = res.objective;
    out["noise_estimate"] = res.noise_estimate ? Json(*res.noise_estimate) : Json();
    out["omegas"] = io::vector_to_json(res.omegas);
    out["magnitudes"] = io::vector_to_json(res.magnitudes);
    io::save_json(out_path(opt, "result.json"), out);
    write_spectrum(opt, "spectrum.csv", res.omegas, res.magnitudes);
    std::printf("objective: %.8f  noise estimate: %.6f\n", res.objective,
                res.noise_estimate.value_or(0.0));
    print_atoms(res.omegas, res.magnitudes, "omega");
    return kOk;
}

int run_linespec(const Json& cfg, const Options& opt) {
    reject_unknown(cfg, {"kind", "n", "gamma", "delta", "omega_c", "variant", "lines", "sigma",
                         "corrupt_count", "corrupt_magnitude", "n1", "seed", "eps", "max_iter"});
    const Eigen::Index n = cfg.at("n").get<Eigen::Index>();
    apps::LineSpectrumModel model = model_from(cfg);
    std::optional<apps::Corruption> corr;
    if (cfg.value("corrupt_count", Eigen::Index(0)) > 0)
        corr = apps::Corruption{cfg.at("corrupt_count").get<Eigen::Index>(),
                                cfg.at("corrupt_magnitude").get<double>()};
    CVec ym = apps::synth_signal(model, n, corr, seed_from(cfg, opt));
    const std::string variant = cfg.value("variant", "vector");
    if (variant != "vector" && variant != "hankel")
        throw std::runtime_error("config: variant must be 'vector' or 'hankel'");
    apps::RecoveryResult res = apps::linespec_huber(
        ym, cfg.at("gamma").get<double>(), cfg.value("delta", 1.0),
        cfg.at("omega_c").get<double>(),
        variant == "vector" ? apps::HuberVariant::Vector : apps::HuberVariant::HankelMatrix,
        cfg.value("n1", Eigen::Index(0)), settings_from(cfg, opt));
    Json out;
    out["objective"] = res.objective;
    out["omegas"] = io::vector_to_json(res.omegas);
    out["magnitudes"] = io::vector_to_json(res.magnitudes);
    out["y"] = io::matrix_to_json(res.y);
    io::save_json(out_path(opt, "result.json"), out);
    write_spectrum(opt, "spectrum.csv", res.omegas, res.magnitudes);
    std::printf("objective: %.8f\n", res.objective);
    print_atoms(res.omegas, res.magnitudes, "omega");
    return kOk;
}

int run_doa(const Json& cfg, const Options& opt) {
    reject_unknown(cfg, {"kind", "n", "alpha", "sectors", "sources", "m1", "m2", "seed", "eps",
                         "max_iter"});
    const Eigen::Index n = cfg.at("n").get<Eigen::Index>();
    const double alpha = cfg.value("alpha", M_PI);
    std::vector<apps::Sector> sectors;
    for (const Json& s : cfg.at("sectors"))
        sectors.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    const std::size_t ns = sectors.size();
    if (ns != 1 && ns != 3) throw std::runtime_error("config: need 1 or 3 sectors");
    auto sector_of = [&](double th) {
        for (std::size_t j = 0; j + 1 < ns; ++j)
            if (th <= sectors[j].hi) return j;
        return ns - 1;
    };
    std::vector<CVec> ycomp(ns, CVec::Zero(n));
    for (const Json& src : cfg.at("sources")) {
        const double th = src.at("theta").get<double>();
        const Complex c(src.value("re", 1.0), src.value("im", 0.0));
        const double w = alpha * std::sin(th);
        CVec a(n);
        for (Eigen::Index t = 0; t < n; ++t) a(t) = std::exp(Complex(0.0, w * double(t)));
        ycomp[sector_of(th)] += c * a;
    }
    std::mt19937_64 rng(seed_from(cfg, opt));
    const Eigen::Index m1 = cfg.at("m1").get<Eigen::Index>();
    const Eigen::Index m2 = ns == 3 ? cfg.at("m2").get<Eigen::Index>() : 0;
    std::vector<Eigen::Index> I1 = spread_indices(n, m1, rng);
    std::vector<Eigen::Index> I2 = spread_indices(n, m2, rng);
    CVec b1(m1), b2(m2);
    for (Eigen::Index p = 0; p < m1; ++p) {
        b1(p) = ycomp[0](I1[std::size_t(p)]);
        if (ns == 3) b1(p) += ycomp[1](I1[std::size_t(p)]);
    }
    for (Eigen::Index p = 0; p < m2; ++p)
        b2(p) = ycomp[1](I2[std::size_t(p)]) + ycomp[2](I2[std::size_t(p)]);
    apps::RecoveryResult res =
        apps::doa_intervals(b1, b2, I1, I2, sectors, n, alpha, settings_from(cfg, opt));
    Json out;
    out["objective"] = res.objective;
    out["thetas"] = io::vector_to_json(res.thetas);
    out["magnitudes"] = io::vector_to_json(res.magnitudes);
    Json secs = Json::array();
    for (Eigen::Index s : res.sector) secs.push_back(s);
    out["sector"] = std::move(secs);
    io::save_json(out_path(opt, "result.json"), out);
    write_spectrum(opt, "spectrum.csv", res.thetas, res.magnitudes);
    std::printf("objective: %.8f\n", res.objective);
    print_atoms(res.thetas, res.magnitudes, "theta");
    return kOk;
}

int run_mmv(const Json& cfg, const Options& opt) {
    reject_unknown(cfg, {"kind", "n", "m", "alpha", "theta_c", "sources", "measurements", "seed",
                         "eps", "max_iter", "dual_grid"});
    const Eigen::Index n = cfg.at("n").get<Eigen::Index>();
    const Eigen::Index m = cfg.at("m").get<Eigen::Index>();
    const double alpha = cfg.value("alpha", 2.0);
    const double theta_c = cfg.at("theta_c").get<double>();
    std::mt19937_64 rng(seed_from(cfg, opt));
    CMat Y = CMat::Zero(n, m);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
    for (const Json& src : cfg.at("sources")) {
        const double th = src.at("theta").get<double>();
        const double w = alpha * std::sin(th);
        CVec a(n);
        for (Eigen::Index t = 0; t < n; ++t) a(t) = std::exp(Complex(0.0, w * double(t)));
        CVec c(m);
        if (src.contains("coeffs"))
            c = CMat(io::matrix_from_json(src.at("coeffs"))).reshaped(m, 1);
        else
            for (Eigen::Index jj = 0; jj < m; ++jj)
                c(jj) = src.value("scale", 1.0) * std::exp(Complex(0.0, ph(rng)));
        Y += a * c.transpose();
    }
    const Eigen::Index mc = cfg.at("measurements").get<Eigen::Index>();
    std::vector<Eigen::Index> I = spread_indices(n, mc, rng);
    CMat B(mc, m);
    for (Eigen::Index p = 0; p < mc; ++p) B.row(p) = Y.row(I[std::size_t(p)]);
    apps::RecoveryResult res = apps::doa_mmv(B, I, theta_c, alpha, n, settings_from(cfg, opt));
    Json out;
    out["objective"] = res.objective;
    out["thetas"] = io::vector_to_json(res.thetas);
    out["magnitudes"] = io::vector_to_json(res.magnitudes);
    io::save_json(out_path(opt, "result.json"), out);
    write_spectrum(opt, "spectrum.csv", res.thetas, res.magnitudes);
    if (res.certificate) {
        const Eigen::Index grid = cfg.value("dual_grid", Eigen::Index(512));
        const double wc = alpha * std::sin(theta_c);
        RVec omg(grid);
        for (Eigen::Index k = 0; k < grid; ++k)
            omg(k) = -wc + 2.0 * wc * double(k) / double(grid - 1);
        pencil::PencilSpec pen = pencil::toeplitz_with_free_block(n, m);
        pen.block->E1 = CMat::Identity(n, n) / std::sqrt(double(n));
        pencil::AtomSet aset(pen, region::unit_circle_arc(0.0, wc));
        RVec poly = gauge::dual_polynomial(*res.certificate, aset, omg);
        std::vector<std::pair<double, double>> rows;
        for (Eigen::Index k = 0; k < grid; ++k) rows.emplace_back(omg(k), poly(k));
        io::write_csv(out_path(opt, "dualpoly.csv"), "omega_or_theta,magnitude", rows);
    }
    std::printf("objective: %.8f\n", res.objective);
    print_atoms(res.thetas, res.magnitudes, "theta");
    return kOk;
}

int run_rate(const Json& cfg, const Options& opt) {
    reject_unknown(cfg, {"kind", "n", "sources", "measurement_counts", "trials", "alpha", "seed",
                         "eps", "max_iter"});
    apps::RateConfig rc;
    rc.n = cfg.at("n").get<Eigen::Index>();
    rc.sources = cfg.at("sources").get<Eigen::Index>();
    for (const Json& c : cfg.at("measurement_counts"))
        rc.measurement_counts.push_back(c.get<Eigen::Index>());
    rc.trials = cfg.at("trials").get<Eigen::Index>();
    rc.alpha = cfg.value("alpha", M_PI);
    if (cfg.contains("eps")) rc.solver_eps = cfg.at("eps").get<double>();
    if (opt.eps) rc.solver_eps = *opt.eps;
    if (cfg.contains("max_iter")) rc.solver_max_iter = cfg.at("max_iter").get<Eigen::Index>();
    const std::uint64_t seed = seed_from(cfg, opt);
    rc.with_intervals = true;
    std::vector<apps::RatePoint> with = apps::recovery_rate(rc, seed);
    rc.with_intervals = false;
    std::vector<apps::RatePoint> without = apps::recovery_rate(rc, seed);
    Json out;
    Json table = Json::array();
    std::ofstream csv(out_path(opt, "rate.csv"));
    csv << "measurement_count,rate_with,rate_without\n";
    char buf[96];
    for (std::size_t i = 0; i < with.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%ld,%.12g,%.12g", long(with[i].count), with[i].rate,
                      without[i].rate);
        csv << buf << '\n';
        table.push_back(Json{{"count", with[i].count},
                             {"rate_with", with[i].rate},
                             {"rate_without", without[i].rate}});
        std::printf("count %3ld: with intervals %.2f, without %.2f\n", long(with[i].count),
                    with[i].rate, without[i].rate);
    }
    out["table"] = std::move(table);
    io::save_json(out_path(opt, "result.json"), out);
    return kOk;
}

int cmd_experiment(const Options& opt) {
    Json cfg = io::load_json(opt.config);
    const std::string kind = cfg.at("kind").get<std::string>();
    const auto t0 = std::chrono::steady_clock::now();
    int rc;
    if (kind == "covfit")
        rc = run_covfit(cfg, opt);
    else if (kind == "linespec")
        rc = run_linespec(cfg, opt);
    else if (kind == "doa")
        rc = run_doa(cfg, opt);
    else if (kind == "mmv")
        rc = run_mmv(cfg, opt);
    else if (kind == "rate")
        rc = run_rate(cfg, opt);
    else
        throw std::runtime_error("config: unknown experiment kind '" + kind + "'");
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("elapsed: %.2f s\n", dt);
    return rc;
}

// ---------------------------------------------------------------------------

int cmd_certcheck(const Options& opt) {
    Json cfg = io::load_json(opt.config);
    reject_unknown(cfg, {"certificate", "certificate_file", "pencil", "curve", "grid"});
    gauge::DualCertificate cert =
        cfg.contains("certificate_file")
            ? io::certificate_from_json(io::load_json(cfg.at("certificate_file").get<std::string>()))
            : io::certificate_from_json(cfg.at("certificate"));
    pencil::PencilSpec pen = io::pencil_from_json(cfg.at("pencil"));
    region::CurveSpec curve = io::curve_from_json(cfg.at("curve"));
    pencil::AtomSet aset(pen, curve);
    const Eigen::Index grid = cfg.value("grid", Eigen::Index(512));
    gauge::CertificateReport rep = gauge::certificate_check(cert, aset, grid);
    std::printf("max violation: %.6e\n", rep.max_violation);
    std::printf("active points: %zu\n", rep.active_points.size());
    for (const region::HomPoint& p : rep.active_points)
        std::printf("  mu = %+.8f%+.8fi  nu = %+.8f%+.8fi\n", p.mu.real(), p.mu.imag(),
                    p.nu.real(), p.nu.imag());
    Json out;
    out["max_violation"] = rep.max_violation;
    Json pts = Json::array();
    for (const region::HomPoint& p : rep.active_points)
        pts.push_back(Json::array({Json::array({p.mu.real(), p.mu.imag()}),
                                   Json::array({p.nu.real(), p.nu.imag()})}));
    out["active_points"] = std::move(pts);
    io::save_json(out_path(opt, "certcheck.json"), out);
    return rep.max_violation <= 1e-5 ? kOk : kCertViolation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gauge functions and atomic decompositions for matrix-pencil atom sets"};
    app.require_subcommand(1);

    Options opt;
    const char* env_out = std::getenv("PENCILNORM_OUT");
    opt.out_dir = env_out ? env_out : ".";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--seed", [&opt](const std::vector<std::string>& v) {
            opt.seed = std::stoull(v.at(0));
            return true;
        }, "override the config seed");
        sub->add_option("--eps", [&opt](const std::vector<std::string>& v) {
            opt.eps = std::stod(v.at(0));
            return true;
        }, "override solver tolerance");
    };
    CLI::App* dec = app.add_subcommand("decompose", "atomic decomposition of a PSD matrix");
    CLI::App* exp = app.add_subcommand("experiment", "run a signal-processing experiment");
    CLI::App* cert = app.add_subcommand("certcheck", "verify a dual certificate on a grid");
    add_common(dec);
    add_common(exp);
    add_common(cert);

    CLI11_PARSE(app, argc, argv);

    try {
        if (dec->parsed()) return cmd_decompose(opt);
        if (exp->parsed()) return cmd_experiment(opt);
        return cmd_certcheck(opt);
    } catch (const Json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kIoError;
    } catch (const std::runtime_error& e) {
        const std::string msg = e.what();
        std::fprintf(stderr, "error: %s\n", msg.c_str());
        if (msg.find("infeasible") != std::string::npos) return kInfeasible;
        if (msg.find("did not converge") != std::string::npos) return kSolverFailure;
        return kIoError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kIoError;
    }
}
