#include "checks/suite.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "checks/oracles.hpp"
#include "dsqft/ds_geometry.hpp"
#include "dsqft/errors.hpp"
#include "dsqft/euclid_field.hpp"
#include "dsqft/one_particle.hpp"
#include "dsqft/so12_group.hpp"
#include "dsqft/special_functions.hpp"
#include "dsqft/uir_circle.hpp"

namespace dsqft::checks {

namespace {

using cplx = std::complex<double>;
using std::numbers::pi;
namespace op = oneparticle;
namespace grp = group;

const std::vector<std::pair<double, double>> kMuR = {{0.5, 1.0}, {1.0, 1.0}, {2.0, 0.7}, {0.3, 1.0}};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Measurement upper(std::string name, double measured, double tol) { return {std::move(name), measured, tol, true}; }
Measurement lower(std::string name, double measured, double tol) { return {std::move(name), measured, tol, false}; }

grp::GroupElement random_element(std::mt19937_64& rng, double tmax = 2.0) {
    std::uniform_real_distribution<double> ang(0.0, 2 * pi), rap(0.0, tmax);
    return grp::rotate0(ang(rng)) * grp::boost1(rap(rng)) * grp::rotate0(ang(rng));
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= double(x.size());
    my /= double(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
    return sxy / sxx;
}

struct MeanSe {
    double mean = 0, se = 0;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = double(v.size());
    MeanSe m;
    for (double x : v) m.mean += x;
    m.mean /= n;
    double var = 0;
    for (double x : v) var += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(var / (n - 1) / n);
    return m;
}

double bump1(double x) { return std::exp(-(x - 0.3) * (x - 0.3) / 0.04); }
double bump2(double x) { return std::exp(-(x + 0.2) * (x + 0.2) / 0.06); }

std::function<cplx(double)> periodic(double (*f)(double)) {
    return [f](double x) { return cplx(f(std::remainder(x, 2 * pi)), 0.0); };
}

// -------------------------------------------------------------------------------------------

std::vector<Measurement> dispersion_identities() {
    std::vector<Measurement> out;
    for (auto [mu, r] : kMuR) {
        auto p = op::ModelParams::make(mu, r);
        double prod = 0, avg = 0;
        for (int k = -100; k <= 100; ++k) {
            double w = op::dispersion(p, k), wp = op::dispersion(p, k + 1), wm = op::dispersion(p, k - 1);
            prod = std::max(prod, rel(w * wp, k * (k + 1.0) / (r * r) + mu * mu));
            avg = std::max(avg, rel(0.5 * (w * wp + w * wm), double(k) * k / (r * r) + mu * mu));
        }
        char tag[64];
        std::snprintf(tag, sizeof tag, "mu=%g r=%g", mu, r);
        out.push_back(upper(std::string("product identity, ") + tag, prod, 1e-11));
        out.push_back(upper(std::string("average identity, ") + tag, avg, 1e-11));
    }
    return out;
}

std::vector<Measurement> casimir_constancy() {
    std::vector<Measurement> out;
    for (auto [mu, r] : kMuR) {
        auto p = op::ModelParams::make(mu, r);
        double worst = 0;
        for (int k = -100; k <= 100; ++k) {
            double w = op::dispersion(p, k);
            double c = -double(k) * k + 0.5 * r * r * (w * op::dispersion(p, k - 1) + w * op::dispersion(p, k + 1));
            worst = std::max(worst, std::abs(c - mu * mu * r * r));
        }
        char tag[64];
        std::snprintf(tag, sizeof tag, "mu=%g r=%g", mu, r);
        out.push_back(upper(std::string("|Casimir - mu^2 r^2|, ") + tag, worst, 1e-11));
    }
    return out;
}

std::vector<Measurement> legendre_two_routes() {
    std::vector<Measurement> out;
    for (cplx nu : {cplx(0.4), cplx(1.3), cplx(0, 0.3)}) {
        auto d = special::ComplexDegree::from_nu(nu);
        double worst = 0, sym = 0;
        for (int k = 0; k <= 40; ++k) {
            cplx a = special::legendre_coeff(d, k), b = oracle::legendre_coeff_product(d, k);
            worst = std::max(worst, std::abs(a - b) / std::abs(b));
            sym = std::max(sym, std::abs(special::legendre_coeff(d, k) - special::legendre_coeff(d, -k)));
        }
        char tag[64];
        std::snprintf(tag, sizeof tag, "nu=%g%+gi", nu.real(), nu.imag());
        out.push_back(upper(std::string("Gamma form vs product form, ") + tag, worst, 1e-11));
        out.push_back(upper(std::string("p(k) - p(-k), ") + tag, sym, 1e-12));
    }
    return out;
}

std::vector<Measurement> kernel_vs_modes(const SuiteOptions& o) {
    auto p = op::ModelParams::make(o.mu, o.r);
    std::mt19937_64 rng(o.seed + 4);
    std::normal_distribution<double> g;
    double worst = 0;
    for (int trial = 0; trial < 10; ++trial) {
        op::TrigPoly h1, h2;
        h1.K = h2.K = 20;
        for (int k = -20; k <= 20; ++k) {
            h1.c.push_back(cplx(g(rng), g(rng)) / (1.0 + 0.1 * k * k));
            h2.c.push_back(cplx(g(rng), g(rng)) / (1.0 + 0.1 * k * k));
        }
        cplx mode = op::hhat_inner(p, h1, h2);
        cplx quad = oracle::hhat_kernel_quadrature(p, h1, h2, 2048);
        worst = std::max(worst, std::abs(mode - quad) / std::abs(mode));
    }
    return {upper("relative error over 10 random pairs", worst, 1e-6)};
}

std::vector<Measurement> c0_two_routes(const SuiteOptions& o) {
    auto p = op::ModelParams::make(o.mu, o.r);
    double ref = op::hhat_inner(p, op::TrigPoly::from_function(periodic(bump1), 400, 8192),
                                op::TrigPoly::from_function(periodic(bump2), 400, 8192)).real();
    auto e512 = op::build_epsilon(p, 512);
    auto e1024 = op::build_epsilon(p, 1024);
    double a = std::abs(op::sharp_time_covariance(e512, 0.0, bump1, bump2) - ref);
    double b = std::abs(op::sharp_time_covariance(e1024, 0.0, bump1, bump2) - ref);
    return {upper("abs error at M=1024", b, 5e-4), upper("|log2(err512/err1024) - 2|", std::abs(std::log2(a / b) - 2), 0.3)};
}

std::vector<Measurement> magic_formula(const SuiteOptions& o) {
    auto p = op::ModelParams::make(o.mu, o.r);
    double r256 = op::omega_magic_residual(op::build_epsilon(p, 256), 32);
    double r512 = op::omega_magic_residual(op::build_epsilon(p, 512), 32);
    double r1024 = op::omega_magic_residual(op::build_epsilon(p, 1024), 32);
    return {upper("residual at M=1024, K=32", r1024, 1.5e-3),
            upper("residual ratio M=512/M=256", r512 / r256, 1.0 - 1e-12),
            upper("residual ratio M=1024/M=512", r1024 / r512, 1.0 - 1e-12)};
}

std::vector<Measurement> kms(const SuiteOptions& o) {
    auto e = op::build_epsilon(op::ModelParams::make(o.mu, o.r), 512);
    op::CauchyData f{bump1, bump2}, g{[](double x) { return std::exp(-x * x / 0.05); }, bump1};
    double worst = 0;
    for (double t = -3.0; t <= 3.0 + 1e-12; t += 0.125) worst = std::max(worst, op::kms_residual(e, t, f, g));
    double control = op::kms_residual(e, 0.7, f, g, 5.0);
    return {upper("2pi-KMS residual on [-3,3]", worst, 1e-8), lower("beta=5 control residual", control, 1e-3)};
}

std::vector<Measurement> group_decompositions(const SuiteOptions& o) {
    std::mt19937_64 rng(o.seed + 8);
    std::uniform_real_distribution<double> ang(0.0, 2 * pi);
    double iw = 0, ca = 0, ha = 0, co = 0;
    int used = 0;
    for (int i = 0; i < 1000; ++i) {
        auto g = random_element(rng);
        iw = std::max(iw, (grp::compose(grp::iwasawa_decompose(g)).m - g.m).norm());
        ca = std::max(ca, (grp::compose(grp::cartan_decompose(g)).m - g.m).norm());
        if (std::abs(std::cos(grp::iwasawa_decompose(g).alpha)) >= 1e-3) {
            ++used;
            ha = std::max(ha, (grp::compose(grp::hannabuss_decompose(g)).m - g.m).norm());
        }
        auto g1 = random_element(rng, 1.5), g2 = random_element(rng, 1.5);
        double a = ang(rng);
        double lhs = grp::radon_nikodym(g1 * g2, a);
        double rhs = grp::radon_nikodym(g1, grp::move_base_angle(g2, a)) * grp::radon_nikodym(g2, a);
        co = std::max(co, std::abs(lhs - rhs) / lhs);
    }
    return {upper("Iwasawa round trip", iw, 1e-11), upper("Cartan round trip", ca, 1e-11),
            upper("Hannabuss round trip (|cos alpha| >= 1e-3)", ha, 1e-10),
            lower("Hannabuss elements used", used, 900), upper("Radon-Nikodym cocycle (relative)", co, 1e-11)};
}

std::vector<Measurement> propagation(const SuiteOptions& o) {
    double worst = 0;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            double psi = -1.5 + 3.0 * i / 19, tau = -3.0 + 6.0 * j / 19;
            auto [lo, hi] = oracle::shadow_by_ray_tracing(psi, tau, o.r);
            auto d = geometry::dependence_interval(psi, tau, o.r);
            worst = std::max({worst, std::abs(std::remainder(d.lo() - lo, 2 * pi)), std::abs(std::remainder(d.hi() - hi, 2 * pi))});
        }
    return {upper("endpoint error vs ray tracing, 20x20 grid", worst, 1e-8)};
}

std::vector<Measurement> intertwiner(const SuiteOptions& o) {
    using namespace uir;
    std::vector<Measurement> out;
    for (double nu : {0.5, 1.1}) {
        double worst = 0;
        for (int k = 0; k <= 64; ++k) worst = std::max(worst, std::abs(std::norm(rho_tilde(nu, k)) - 2 * pi));
        char tag[64];
        std::snprintf(tag, sizeof tag, "||rho~|^2 - 2pi|, nu=%g", nu);
        out.push_back(upper(tag, worst, 1e-12));
    }
    std::mt19937_64 rng(o.seed + 10);
    std::normal_distribution<double> g;
    const int N = 2048, K = 24;
    std::vector<cplx> c(N, 0.0);
    for (int k = -K; k <= K; ++k) c[std::size_t((k + N) % N)] = cplx(g(rng), g(rng)) / (1.0 + 0.2 * k * k);
    auto h = CircleFunction::from_coefficients(c);
    double worst = 0;
    for (auto lab : {SeriesLabel::principal(0.5), SeriesLabel::principal(1.1)}) {
        auto s = grp::boost2(0.5);
        worst = std::max(worst, intertwine(lab, act(lab.flipped(), s, h)).sup_distance(act(lab, s, intertwine(lab, h))));
    }
    out.push_back(upper("intertwining sup error, Lambda2(0.5), N=2048", worst, 1e-6));
    return out;
}

std::vector<Measurement> brackets() {
    const int K = 64;
    const cplx I(0, 1);
    double worst = 0;
    for (auto [mu, r] : kMuR) {
        auto p = op::ModelParams::make(mu, r);
        Eigen::MatrixXcd K0 = op::k0_modes(K), L1 = op::boost_generator_modes(p, K), L2 = op::l2_modes(p, K);
        auto interior = [&](const Eigen::MatrixXcd& m) { return m.block(2, 2, 2 * K - 3, 2 * K - 3).cwiseAbs().maxCoeff(); };
        worst = std::max({worst, interior(K0 * L1 - L1 * K0 - I * L2), interior(L2 * K0 - K0 * L2 - I * L1),
                          interior(L1 * L2 - L2 * L1 + I * K0)});
    }
    return {upper("bracket defect on |k| <= K-2, K=64", worst, 1e-9)};
}

std::vector<Measurement> flat_contraction() {
    std::vector<Measurement> out;
    for (auto [m, t, q, p1] : {std::array{1.0, 0.7, 0.4, 0.5}, std::array{0.5, -1.2, 0.3, 2.0}, std::array{2.0, 0.3, -0.9, -1.0}}) {
        std::vector<double> lx, ly;
        for (double r = 10; r <= 10240; r *= 2) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(uir::flat_contraction_error(m, r, t, q, p1)));
        }
        char tag[96];
        std::snprintf(tag, sizeof tag, "|slope + 1|, (t,q,p1,m)=(%g,%g,%g,%g)", t, q, p1, m);
        out.push_back(upper(tag, std::abs(slope_fit(lx, ly) + 1), 0.1));
    }
    return out;
}

std::vector<Measurement> gaussian_statistics(const SuiteOptions& o) {
    using namespace euclid;
    auto p = op::ModelParams::make(o.mu, o.r);
    SampleBatchSpec spec;
    spec.L = 64;
    spec.L_int = 0;
    spec.P.coeffs = {0};
    spec.observables = {vmf_bump(sphere_point(1.0, 0.6, 1.0), 6.0, 64)};
    spec.n_samples = 100000;
    spec.seed = o.seed + 13;
    spec.threads = o.threads;
    auto rec = run_samples(p, spec);
    const double c = covariance(p, spec.observables[0], spec.observables[0]);
    std::vector<double> x, x2, x4;
    for (auto& s : rec) {
        double v = s.phi[0];
        x.push_back(v);
        x2.push_back(v * v);
        x4.push_back(v * v * v * v);
    }
    auto m1 = mean_se(x), m2 = mean_se(x2), m4 = mean_se(x4);
    return {upper("|mean| (tolerance 3 stderr)", std::abs(m1.mean), 3 * m1.se),
            upper("|Var - C(f,f)| (tolerance 3 stderr)", std::abs(m2.mean - c), 3 * m2.se),
            upper("|4th moment - 3C(f,f)^2| (tolerance 3 stderr)", std::abs(m4.mean - 3 * c * c), 3 * m4.se)};
}

std::vector<Measurement> reflection_positivity(const SuiteOptions& o) {
    using namespace euclid;
    auto p = op::ModelParams::make(o.mu, o.r);
    std::mt19937_64 rng(o.seed + 14);
    std::uniform_real_distribution<double> th(0, pi / 4), ps(0, 2 * pi), kap(80, 200);
    double worst = -1e300;  // min over bases of lambda_min / ||M||
    for (int basis = 0; basis < 50; ++basis) {
        std::vector<SphereModes> fns;
        for (int i = 0; i < 20; ++i) fns.push_back(vmf_bump(sphere_point(1.0, th(rng), ps(rng)), kap(rng), 200));
        auto rep = reflection_positivity_gram(p, fns, 200);
        double ratio = rep.lambda_min / rep.gram_norm;
        worst = basis == 0 ? ratio : std::min(worst, ratio);
    }
    return {lower("min over 50 bases of lambda_min / ||M||", worst, -1e-9)};
}

std::vector<Measurement> interacting_sanity(const SuiteOptions& o) {
    using namespace euclid;
    auto p = op::ModelParams::make(o.mu, o.r);
    std::mt19937_64 rng(o.seed + 15);
    std::normal_distribution<double> g;
    Eigen::Matrix3d R = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix();
    Vec3 n1 = sphere_point(1.0, 0.5, 0.3), n2 = sphere_point(1.0, 1.4, 2.0);
    SampleBatchSpec spec;
    spec.L = 16;
    spec.L_int = 16;
    spec.P.coeffs = {0, 0, 0, 0, 0.1};
    spec.observables = {vmf_bump(n1, 3.0, 16), vmf_bump(n2, 3.0, 16), vmf_bump(R * n1, 3.0, 16), vmf_bump(R * n2, 3.0, 16)};
    spec.n_samples = 10000;
    spec.seed = o.seed + 150;
    spec.threads = o.threads;
    auto rec = run_samples(p, spec);
    std::vector<double> V, two, diff;
    for (auto& s : rec) {
        V.push_back(s.V);
        two.push_back(s.phi[0] * s.phi[1]);
        diff.push_back(s.phi[0] * s.phi[1] - s.phi[2] * s.phi[3]);
    }
    auto mv = mean_se(V);
    auto z = reweighted_expectation(V, two);
    auto d = reweighted_expectation(V, diff);
    return {upper("|E[V]| (tolerance 3 stderr)", std::abs(mv.mean), 3 * mv.se),
            lower("Z_hat (lower bound 1 - 3 stderr)", z.z_hat, 1 - 3 * z.z_stderr), lower("ESS", z.ess, 10),
            upper("|rotated two-point difference| (tolerance 3 stderr)", std::abs(d.value), 3 * d.stderr_)};
}

struct Spec {
    int id;
    const char* suite;
    const char* title;
    double budget;
    std::function<std::vector<Measurement>(const SuiteOptions&)> run;
};

const std::vector<Spec>& specs() {
    static const std::vector<Spec> s = {
        {1, "oneparticle", "Dispersion identities", 1, [](const SuiteOptions&) { return dispersion_identities(); }},
        {2, "oneparticle", "Casimir constancy on the time-zero modes", 1, [](const SuiteOptions&) { return casimir_constancy(); }},
        {3, "specfun", "Legendre coefficients, two derivations", 1, [](const SuiteOptions&) { return legendre_two_routes(); }},
        {4, "oneparticle", "Kernel quadrature vs mode formula for the time-zero inner product", 10, kernel_vs_modes},
        {5, "oneparticle", "Sharp-time covariance, spectral route vs Legendre route", 60, c0_two_routes},
        {6, "oneparticle", "Operator identity for omega, residual and refinement", 60, magic_formula},
        {7, "oneparticle", "2pi-KMS condition of the boost flow", 30, kms},
        {8, "group", "Group decompositions and the Radon-Nikodym cocycle", 2, group_decompositions},
        {9, "geometry", "Finite speed of propagation", 5, propagation},
        {10, "rep", "Intertwiner unitarity and intertwining", 10, intertwiner},
        {11, "oneparticle", "so(1,2) brackets in the mode representation", 2, [](const SuiteOptions&) { return brackets(); }},
        {12, "rep", "Flat contraction rate", 2, [](const SuiteOptions&) { return flat_contraction(); }},
        {13, "euclid", "Gaussian field statistics", 120, gaussian_statistics},
        {14, "euclid", "Reflection positivity", 120, reflection_positivity},
        {15, "euclid", "Interacting measure sanity", 300, interacting_sanity},
    };
    return s;
}

}  // namespace

bool CriterionResult::accurate() const {
    return !parts.empty() && std::all_of(parts.begin(), parts.end(), [](const Measurement& m) { return m.pass(); });
}

const Measurement& CriterionResult::headline() const {
    auto bad = std::find_if(parts.begin(), parts.end(), [](const Measurement& m) { return !m.pass(); });
    return bad != parts.end() ? *bad : parts.front();
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> n = {"group", "geometry", "specfun", "rep", "oneparticle", "euclid", "all"};
    return n;
}

std::vector<CriterionResult> run_suite(const std::string& name, const SuiteOptions& opt) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) throw ContractError("unknown suite '" + name + "'");
    std::vector<CriterionResult> out;
    for (const auto& s : specs()) {
        if (name != "all" && name != s.suite) continue;
        CriterionResult r;
        r.id = s.id;
        r.suite = s.suite;
        r.criterion = s.title;
        r.budget_seconds = s.budget;
        auto t0 = std::chrono::steady_clock::now();
        try {
            r.parts = s.run(opt);
        } catch (const std::exception& e) {
            r.parts = {upper(std::string("raised: ") + e.what(), 1.0, 0.0)};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace dsqft::checks
