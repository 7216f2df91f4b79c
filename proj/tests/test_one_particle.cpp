#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "checks/oracles.hpp"
#include "doctest.h"
#include "dsqft/errors.hpp"
#include "dsqft/one_particle.hpp"

using namespace dsqft::oneparticle;
using std::numbers::pi;
namespace oracle = dsqft::oracle;

namespace {

const std::vector<std::pair<double, double>> kMuR = {{0.5, 1.0}, {1.0, 1.0}, {2.0, 0.7}, {0.3, 1.0}};

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Eigen decompositions at M = 1024 are the slow part; share them between test cases.
const EpsilonOperator& eps_op(int M) {
    static std::map<int, EpsilonOperator> cache;
    auto it = cache.find(M);
    if (it == cache.end()) it = cache.emplace(M, build_epsilon(ModelParams::make(1.0, 1.0), M)).first;
    return it->second;
}

double bump1(double x) { return std::exp(-(x - 0.3) * (x - 0.3) / 0.04); }
double bump2(double x) { return std::exp(-(x + 0.2) * (x + 0.2) / 0.06); }

std::function<cplx(double)> periodic(double (*f)(double)) {
    return [f](double x) { return cplx(f(std::remainder(x, 2 * pi)), 0.0); };
}

TrigPoly random_poly(std::mt19937_64& rng, int K) {
    std::normal_distribution<double> g;
    TrigPoly h;
    h.K = K;
    for (int k = -K; k <= K; ++k) h.c.push_back(cplx(g(rng), g(rng)) / (1.0 + 0.1 * k * k));
    return h;
}

// trapezoid on a fine grid over I+, independent of the finite-volume grid
double integrate_half(const std::function<double(double)>& f, int n = 20000) {
    double h = pi / n, s = 0;
    for (int i = 1; i < n; ++i) s += f(-pi / 2 + i * h);
    return s * h;
}

}  // namespace

TEST_CASE("model parameters on both branches") {
    for (auto [mu, r] : kMuR) {
        auto p = ModelParams::make(mu, r);
        CHECK(std::abs(p.s_plus + p.s_minus + 1.0) < 1e-15);
        CHECK(std::abs(-p.s_plus * (p.s_plus + 1.0) - mu * mu * r * r) < 1e-13);
        CHECK(p.c_nu > 0);
        CHECK(p.complementary() == (mu * r < 0.5));
    }
    // c_nu is even in nu: the complementary value 1/(2 cos(pi kappa)) is cosh at nu = i kappa
    auto q = ModelParams::make(0.3, 1.0);
    CHECK(q.c_nu == doctest::Approx(1.0 / (2 * std::cosh(pi * q.nu).real())));
    CHECK(q.c_nu == doctest::Approx(1.0 / (2 * std::cosh(-pi * q.nu).real())));
    CHECK_THROWS_AS(ModelParams::make(-1.0, 1.0), dsqft::ContractError);
    CHECK_THROWS_AS(ModelParams::make(1.0, 0.0), dsqft::ContractError);
}

TEST_CASE("dispersion identities") {
    auto p = ModelParams::make(1.0, 1.0);
    CHECK(dispersion(p, 3) * dispersion(p, 4) == doctest::Approx(13.0).epsilon(1e-13));

    for (auto [mu, r] : kMuR) {
        auto q = ModelParams::make(mu, r);
        double worst_prod = 0, worst_avg = 0, worst_diff = 0, worst_cas = 0;
        for (int k = -100; k <= 100; ++k) {
            double w = dispersion(q, k), wp = dispersion(q, k + 1), wm = dispersion(q, k - 1);
            // absolute: the two products are ~k^2 and cancel, so this needs omega to the last bit
            worst_cas = std::max(worst_cas, std::abs(-double(k) * k + 0.5 * r * r * (w * wm + w * wp) - mu * mu * r * r));
            worst_prod = std::max(worst_prod, rel(w * wp, k * (k + 1.0) / (r * r) + mu * mu));
            worst_avg = std::max(worst_avg, rel(0.5 * (w * wp + w * wm), k * double(k) / (r * r) + mu * mu));
            if (k >= 1) worst_diff = std::max(worst_diff, std::abs(w * (wm - wp) + 2.0 * k / (r * r)) * r * r / (2.0 * k));
            CHECK(w > 0);
            CHECK(w == doctest::Approx(dispersion(q, -k)).epsilon(1e-13));
        }
        CHECK(worst_prod < 1e-11);
        CHECK(worst_avg < 1e-12);
        CHECK(worst_diff < 1e-11);
        CHECK(worst_cas < 1e-11);
    }
}

TEST_CASE("dispersion closed form, flat limit and scaling") {
    for (double mu : {0.5, 1.0, 3.0}) {
        auto p = ModelParams::make(mu, 1.0);
        for (int k = -30; k <= 30; ++k) CHECK(rel(dispersion_principal(p, k), dispersion(p, k)) < 1e-12);
    }
    CHECK_THROWS_AS(dispersion_principal(ModelParams::make(0.3, 1.0), 2), dsqft::ContractError);

    // ratio to the flat dispersion tends to 1 monotonically once k is past mu r
    for (auto [mu, r] : kMuR) {
        auto p = ModelParams::make(mu, r);
        double prev = 0;
        const int k0 = int(std::ceil(mu * r)) + 1;
        for (int k = k0; k <= 2000; k += 7) {
            double gap = std::abs(dispersion(p, k) / flat_dispersion(p, k) - 1);
            // compare only while the gap is well above rounding of the ratio
            if (k > k0 && prev > 1e-12) CHECK(gap <= prev * (1 + 1e-9));
            prev = gap;
        }
        CHECK(prev < 1e-12);
    }

    // r omega~ depends only on mu r
    auto a = ModelParams::make(2.0, 0.7), b = ModelParams::make(1.4, 1.0), c = ModelParams::make(0.14, 10.0);
    for (int k = 0; k <= 50; ++k) {
        CHECK(rel(0.7 * dispersion(a, k), dispersion(b, k)) < 1e-13);
        CHECK(rel(10.0 * dispersion(c, k), dispersion(b, k)) < 1e-13);
    }

    auto s = ModeSpectrum::build(ModelParams::make(1.0, 2.0), 40);
    for (int k = -40; k <= 40; ++k) CHECK(s.at(k) == doctest::Approx(s.at(-k)));
}

TEST_CASE("dispersion against the Legendre coefficients") {
    // omega~(k) = 1 / (2 pi c_nu r p(k)): the mode multiplier is the inverse of the kernel coefficient
    for (auto [mu, r] : kMuR) {
        auto p = ModelParams::make(mu, r);
        for (int k = 0; k <= 40; ++k) {
            double pk = dsqft::special::legendre_coeff(p.degree(), k).real();
            CHECK(rel(dispersion(p, k), 1.0 / (2 * pi * p.c_nu * r * pk)) < 1e-12);
        }
    }
}

TEST_CASE("hhat inner product") {
    auto p = ModelParams::make(1.0, 1.3);
    // diagonal multiplier on exponentials
    for (int k = -5; k <= 5; ++k)
        for (int j = -5; j <= 5; ++j) {
            TrigPoly a{5, std::vector<cplx>(11, 0.0)}, b = a;
            a.c[std::size_t(k + 5)] = 1.0;
            b.c[std::size_t(j + 5)] = 1.0;
            cplx v = hhat_inner(p, a, b);
            if (j != k) CHECK(std::abs(v) == 0.0);
            else CHECK(rel(v.real(), 2 * pi * p.r / (2 * dispersion(p, k))) < 1e-14);
        }

    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        auto h1 = random_poly(rng, 12), h2 = random_poly(rng, 12);
        cplx a = hhat_inner(p, h1, h2), b = hhat_inner(p, h2, h1);
        CHECK(std::abs(a - std::conj(b)) < 1e-13 * std::abs(a));
        CHECK(std::abs(a - hhat_inner_legendre(p, h1, h2)) < 1e-12 * std::abs(a));
        CHECK(hhat_inner(p, h1, h1).real() > 0);
    }
}

TEST_CASE("hhat inner product against real-space kernel quadrature") {
    std::mt19937_64 rng(2024);
    for (auto [mu, r] : {std::pair{1.0, 1.0}, std::pair{0.3, 1.0}}) {
        auto p = ModelParams::make(mu, r);
        double worst = 0;
        for (int trial = 0; trial < 5; ++trial) {
            auto h1 = random_poly(rng, 20), h2 = random_poly(rng, 20);
            cplx mode = hhat_inner(p, h1, h2);
            cplx quad = oracle::hhat_kernel_quadrature(p, h1, h2, 2048);
            worst = std::max(worst, std::abs(mode - quad) / std::abs(mode));
        }
        CHECK(worst < 1e-6);
    }
    // smooth non-polynomial pair
    auto p = ModelParams::make(1.0, 1.0);
    auto f1 = periodic(bump1), f2 = periodic(bump2);
    cplx mode = hhat_inner(p, TrigPoly::from_function(f1, 300, 8192), TrigPoly::from_function(f2, 300, 8192));
    cplx quad = oracle::hhat_kernel_quadrature(p, f1, f2, 2048);
    CHECK(std::abs(mode - quad) < 1e-6 * std::abs(mode));
}

TEST_CASE("derivative inner product, two routes") {
    auto p = ModelParams::make(1.0, 1.3);
    for (int k = -4; k <= 4; ++k) {
        TrigPoly e{4, std::vector<cplx>(9, 0.0)};
        e.c[std::size_t(k + 4)] = 1.0;
        double expect = 2 * pi * p.r * p.r * p.r * dispersion(p, k) / 2;
        CHECK(rel(hhat_derivative_inner(p, e, e).real(), expect) < 1e-13);
    }
    std::mt19937_64 rng(5);
    for (auto [mu, r] : kMuR) {
        auto q = ModelParams::make(mu, r);
        for (int trial = 0; trial < 4; ++trial) {
            auto h1 = random_poly(rng, 15), h2 = random_poly(rng, 15);
            cplx a = hhat_derivative_inner(q, h1, h2), b = hhat_derivative_inner_kernel(q, h1, h2);
            CHECK(std::abs(a - b) < 1e-6 * std::abs(a));
        }
    }
    // p^1(k) = (s+k)(s-k) p_{s-1}(k) chained against the mode multiplier: p^1(k) = c1 r omega~(k)
    auto d = p.degree();
    double c1 = dsqft::special::tail_constant(d).real();
    for (int k = 0; k <= 30; ++k)
        CHECK(rel(dsqft::special::legendre_prime_coeff(d, k).real(), c1 * p.r * dispersion(p, k)) < 1e-11);
}

TEST_CASE("epsilon operator") {
    auto p = ModelParams::make(1.0, 1.0);
    CHECK_THROWS_AS(build_epsilon(p, 8), dsqft::DomainError);

    const auto& e128 = eps_op(128);
    CHECK(e128.symmetry_defect() < 1e-10);
    CHECK(e128.lowest_eigenvalue() > -1e-8);
    // Rayleigh quotient of a flat-ish trial function
    Eigen::VectorXd v = e128.sample([](double x) { return 1.0 + 0.1 * x; });
    CHECK(v.dot(e128.weights().asDiagonal() * e128.apply_eps2(v)) >= 0);

    // no gap: the bottom of the discrete spectrum keeps moving down
    double prev = 1e300;
    for (int M : {128, 256, 512, 1024}) {
        double low = eps_op(M).lowest_eigenvalue();
        CHECK(low > 0);
        CHECK(low < prev);
        prev = low;
        CHECK(eps_op(M).floored_count() == 0);
    }

    // eps^2 cos = cos cos 2psi + mu^2 r^2 cos^3 away from the ends, second order
    double err[2];
    int idx = 0;
    for (int M : {256, 512}) {
        const auto& e = eps_op(M);
        Eigen::VectorXd out = e.apply_eps2(e.sample([](double x) { return std::cos(x); }));
        double worst = 0;
        for (int i = 0; i < M; ++i) {
            double x = e.grid()(i);
            if (std::abs(x) > 1.2) continue;
            double c = std::cos(x);
            worst = std::max(worst, std::abs(out(i) - (c * std::cos(2 * x) + c * c * c)));
        }
        err[idx++] = worst;
    }
    CHECK(err[1] < 1e-4);
    CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("sharp-time covariance") {
    // Poisson summation of the lattice Green function on the circle
    const double lam = 2.5, theta = 1.0;
    double tail = 0;
    for (int l = 200000; l >= 1; --l) tail += std::cos(l * theta) / (double(l) * l * (l * double(l) + lam));
    double clausen = pi * pi / 6 - pi * theta / 2 + theta * theta / 4;
    double direct = (1.0 / lam + 2 * (clausen - lam * tail)) / (2 * pi);
    CHECK(std::abs(direct - sharp_time_kernel(theta, std::sqrt(lam))) < 1e-10);

    const auto& e = eps_op(256);
    for (double th : {0.0, 0.4, 1.7, 3.0}) {
        double a = sharp_time_covariance(e, th, bump1, bump2);
        CHECK(a == doctest::Approx(sharp_time_covariance(e, 2 * pi - th, bump1, bump2)).epsilon(1e-14));
        CHECK(a == doctest::Approx(sharp_time_covariance(e, th, bump2, bump1)).epsilon(1e-12));
        CHECK(a == doctest::Approx(sharp_time_covariance(e, th + 2 * pi, bump1, bump2)).epsilon(1e-12));
    }
    // decays with the Euclidean time separation
    CHECK(sharp_time_covariance(e, 0.5, bump1, bump1) < sharp_time_covariance(e, 0.0, bump1, bump1));
}

TEST_CASE("sharp-time covariance against the Legendre kernel") {
    auto p = ModelParams::make(1.0, 1.0);
    double ref = hhat_inner(p, TrigPoly::from_function(periodic(bump1), 400, 8192),
                            TrigPoly::from_function(periodic(bump2), 400, 8192)).real();
    double e512 = std::abs(sharp_time_covariance(eps_op(512), 0.0, bump1, bump2) - ref);
    double e1024 = std::abs(sharp_time_covariance(eps_op(1024), 0.0, bump1, bump2) - ref);
    CHECK(e1024 < 5e-4);
    CHECK(e512 < 5e-4);
    CHECK(std::log2(e512 / e1024) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("magic formula") {
    double r256 = omega_magic_residual(eps_op(256), 32);
    double r512 = omega_magic_residual(eps_op(512), 32);
    double r1024 = omega_magic_residual(eps_op(1024), 32);
    CHECK(r256 < 1e-2);
    CHECK(r1024 < 1.5e-3);
    CHECK(r512 < r256);
    CHECK(r1024 < r512);

    const int K = 16;
    Eigen::MatrixXcd B = omega_magic_matrix(eps_op(512), K);
    auto p = eps_op(512).params();
    CHECK((B - B.adjoint()).norm() < 1e-10 * B.norm());
    // diagonal entries reproduce omega~(k) within the residual
    double amax = dispersion(p, K);
    for (int k = -K; k <= K; ++k) CHECK(std::abs(B(k + K, k + K) - dispersion(p, k)) < r512 * amax);
    // the reflection psi -> pi - psi sends e_k to (-1)^k e_{-k}; an even vector stays even
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
    for (int k = -K; k <= K; ++k) J(-k + K, k + K) = (k % 2) ? -1.0 : 1.0;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::VectorXcd h(2 * K + 1);
    for (int i = 0; i < 2 * K + 1; ++i) h(i) = cplx(g(rng), g(rng));
    Eigen::VectorXcd even = 0.5 * (h + J * h);
    Eigen::VectorXcd out = B * even;
    CHECK((out - J * out).norm() < 1e-10 * out.norm());
}

TEST_CASE("commutator function") {
    const auto& e = eps_op(512);
    const double r = e.params().r;
    for (auto [f, g] : {std::pair{bump1, bump2}, std::pair{bump1, bump1}}) {
        CHECK(commutator_kernel(e, 0.0, f, g) == 0.0);
        for (double t : {0.3, 1.1, 2.5})
            CHECK(commutator_kernel(e, -t, f, g) == doctest::Approx(-commutator_kernel(e, t, f, g)).epsilon(1e-13));
        const double dt = 1e-3;
        double fd = (commutator_kernel(e, dt, f, g) - commutator_kernel(e, -dt, f, g)) / (2 * dt);
        double exact = -integrate_half([&](double x) { return f(x) * g(x) * std::cos(x); }) / r;
        CHECK(rel(fd, exact) < 1e-4);
    }
}

TEST_CASE("KMS condition of the boost flow") {
    const auto& e = eps_op(512);
    CauchyData f{bump1, bump2}, g{[](double x) { return std::exp(-x * x / 0.05); }, bump1};
    CHECK(kms_residual(e, 0.0, f, f) < 1e-10);
    double worst = 0;
    for (double t = -3.0; t <= 3.0; t += 0.25) worst = std::max(worst, kms_residual(e, t, f, g));
    CHECK(worst < 1e-8);
    // the identity picks out beta = 2 pi
    CHECK(kms_residual(e, 0.7, f, g, 5.0) > 1e-3);
    CHECK(kms_residual(e, 0.7, f, g, 5.0, 5.0) < 1e-8);

    // the 2 pi state restricted to time-zero momenta is the sharp-time covariance
    CauchyData m{[](double) { return 0.0; }, bump1};
    double F0 = kms_two_point(e, 0.0, m, m).real();
    CHECK(F0 == doctest::Approx(sharp_time_covariance(e, 0.0, bump1, bump1) / e.params().r).epsilon(1e-12));
    // F is positive and Hermitian at t = 0
    cplx Ffg = kms_two_point(e, 0.0, f, g), Fgf = kms_two_point(e, 0.0, g, f);
    CHECK(std::abs(Ffg - std::conj(Fgf)) < 1e-12 * std::abs(Ffg));
    CHECK(kms_two_point(e, 0.0, g, g).real() > 0);
}

TEST_CASE("boost generator in the mode basis") {
    CHECK_THROWS_AS(boost_generator_modes(ModelParams::make(1.0, 1.0), 1), dsqft::ContractError);
    const int K = 64;
    for (auto [mu, r] : kMuR) {
        auto p = ModelParams::make(mu, r);
        Eigen::MatrixXcd K0 = k0_modes(K), L1 = boost_generator_modes(p, K), L2 = l2_modes(p, K);
        CHECK(L1.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK((L1 - L1.transpose()).norm() == 0.0);
        CHECK((L2 - L2.adjoint()).norm() < 1e-12);

        double worst_cas = 0;
        for (int k = -K + 1; k <= K - 1; ++k) {
            double w = dispersion(p, k);
            double cas = -double(k) * k + 0.5 * r * r * (w * dispersion(p, k - 1) + w * dispersion(p, k + 1));
            worst_cas = std::max(worst_cas, std::abs(cas - mu * mu * r * r));
        }
        CHECK(worst_cas < 1e-11 * std::max(1.0, mu * mu * r * r));

        const cplx I(0, 1);
        auto interior = [&](const Eigen::MatrixXcd& m) { return m.block(2, 2, 2 * K - 3, 2 * K - 3).cwiseAbs().maxCoeff(); };
        CHECK(interior(K0 * L1 - L1 * K0 - I * L2) < 1e-9);
        CHECK(interior(L2 * K0 - K0 * L2 - I * L1) < 1e-9);
        CHECK(interior(L1 * L2 - L2 * L1 + I * K0) < 1e-9);
        Eigen::MatrixXcd Lp = L1 + I * L2, Lm = L1 - I * L2;
        CHECK(interior(Lp * Lm - Lm * Lp + 2.0 * K0) < 1e-9);
    }
}
