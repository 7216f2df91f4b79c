#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dsqft/errors.hpp"
#include "dsqft/so12_group.hpp"

using namespace dsqft::group;
using std::numbers::pi;

namespace {

// scaling and squaring with a plain Taylor series
Mat3 expm_oracle(const Mat3& a) {
    int squarings = 0;
    double n = a.norm();
    while (n > 0.25) {
        n *= 0.5;
        ++squarings;
    }
    Mat3 b = a / std::pow(2.0, squarings);
    Mat3 term = Mat3::Identity(), sum = Mat3::Identity();
    for (int k = 1; k < 30; ++k) {
        term = term * b / k;
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

GroupElement random_element(std::mt19937_64& rng, double tmax = 2.0) {
    std::uniform_real_distribution<double> ang(0.0, 2 * pi), rap(0.0, tmax);
    return rotate0(ang(rng)) * boost1(rap(rng)) * rotate0(ang(rng));
}

double frob(const Mat3& a, const Mat3& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("constructors preserve the metric and satisfy group laws") {
    CHECK(frob(boost1(0).m, Mat3::Identity()) == 0.0);
    for (double x : {-2.3, -0.4, 0.0, 0.7, 1.9}) {
        CHECK(boost1(x).metric_defect() < 1e-12);
        CHECK(boost2(x).metric_defect() < 1e-12);
        CHECK(rotate0(x).metric_defect() < 1e-12);
        CHECK(horo(x).metric_defect() < 1e-12);
    }
    CHECK(frob((boost1(0.3) * boost1(0.9)).m, boost1(1.2).m) < 1e-12);
    CHECK(frob((rotate0(2.0) * rotate0(-0.5)).m, rotate0(1.5).m) < 1e-12);
    CHECK(frob((horo(0.4) * horo(-1.1)).m, horo(-0.7).m) < 1e-12);
    // conjugating the horospheric translation by L1(t) rescales q by e^{-t} for these matrices;
    // e^{+t} would need D(q) built from L2 + K0 instead
    double t = 0.7, q = 1.3;
    CHECK(frob((boost1(t) * horo(q) * boost1(-t)).m, horo(std::exp(-t) * q).m) < 1e-12);
    CHECK(frob((boost1(t) * horo(q) * boost1(-t)).m, horo(std::exp(t) * q).m) > 1.0);
    CHECK_THROWS_AS(boost1(NAN), dsqft::DomainError);
    CHECK_THROWS_AS(rotate0(INFINITY), dsqft::DomainError);
}

TEST_CASE("one-parameter subgroups are exponentials of the generators") {
    CHECK(frob(boost1(0.5).m, expm_oracle(0.5 * gen_L1())) < 1e-12);
    CHECK(frob(boost2(-0.8).m, expm_oracle(-0.8 * gen_L2())) < 1e-12);
    CHECK(frob(rotate0(1.2).m, expm_oracle(1.2 * gen_K0())) < 1e-12);
    CHECK(frob(horo(0.9).m, expm_oracle(0.9 * (gen_L2() - gen_K0()))) < 1e-12);
}

TEST_CASE("casimir and brackets") {
    Mat3 c = casimir_matrix();
    CHECK(c == 2.0 * Mat3::Identity());
    CHECK(c.trace() == 6.0);
    const Mat3 &k = gen_K0(), &l1 = gen_L1(), &l2 = gen_L2();
    // structure constants by direct multiplication
    CHECK(frob(k * l1 - l1 * k, -l2) == 0.0);
    CHECK(frob(l2 * k - k * l2, -l1) == 0.0);
    CHECK(frob(l1 * l2 - l2 * l1, k) == 0.0);
}

TEST_CASE("reflections") {
    CHECK(reflection(Reflection::T).det_sign == -1);
    CHECK(reflection(Reflection::T).time_orientation == -1);
    CHECK(reflection(Reflection::P1).time_orientation == 1);
    CHECK(frob(reflection(Reflection::P).m, rotate0(pi).m) < 1e-15);
    CHECK(frob((reflection(Reflection::P1) * reflection(Reflection::P2)).m, reflection(Reflection::P).m) == 0.0);
    CHECK_THROWS_AS(iwasawa_decompose(reflection(Reflection::T)), dsqft::ContractError);
}

TEST_CASE("from_matrix rejects non-isometries") {
    Mat3 m = boost1(0.3).m;
    CHECK_NOTHROW(GroupElement::from_matrix(m));
    m(0, 1) += 1e-3;
    CHECK_THROWS_AS(GroupElement::from_matrix(m), dsqft::ContractError);
}

TEST_CASE("Iwasawa decomposition") {
    auto id = iwasawa_decompose(GroupElement{});
    CHECK(id.alpha == 0.0);
    CHECK(id.k == 0);
    CHECK(std::abs(id.t) == 0.0);
    CHECK(std::abs(id.q) == 0.0);

    auto f = iwasawa_decompose(rotate0(1.1) * boost1(0.4) * horo(-2.0));
    CHECK(std::abs(f.alpha - 1.1) < 1e-12);
    CHECK(std::abs(f.t - 0.4) < 1e-12);
    CHECK(std::abs(f.q + 2.0) < 1e-12);

    std::mt19937_64 rng(11);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        auto g = random_element(rng);
        worst = std::max(worst, frob(compose(iwasawa_decompose(g)).m, g.m));
    }
    CHECK(worst < 1e-11);

    // decompose after compose is the identity on canonical factors
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
        IwasawaFactors in{wrap_2pi(3 * u(rng)), 0, u(rng), u(rng)};
        auto out = iwasawa_decompose(compose(in));
        CHECK(std::abs(out.t - in.t) < 1e-11);
        CHECK(std::abs(out.q - in.q) < 1e-11);
        double da = std::abs(out.alpha - in.alpha);
        CHECK(std::min(da, 2 * pi - da) < 1e-11);
    }
}

TEST_CASE("Cartan decomposition") {
    auto id = cartan_decompose(GroupElement{});
    CHECK(id.alpha == 0.0);
    CHECK(id.t == 0.0);
    CHECK(id.alpha_prime == 0.0);
    auto rot = cartan_decompose(rotate0(2.5));
    CHECK(rot.t == 0.0);
    CHECK(std::abs(rot.alpha_prime - 2.5) < 1e-14);

    std::mt19937_64 rng(12);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        auto g = random_element(rng) * horo(0.3);
        auto f = cartan_decompose(g);
        CHECK(f.t >= 0.0);
        worst = std::max(worst, frob(compose(f).m, g.m));
    }
    CHECK(worst < 1e-11);
}

TEST_CASE("Hannabuss decomposition") {
    auto id = hannabuss_decompose(GroupElement{});
    CHECK(std::abs(id.s) == 0.0);
    CHECK(id.k == 0);
    CHECK(std::abs(id.t) == 0.0);
    CHECK(std::abs(id.q) == 0.0);

    CHECK_THROWS_AS(hannabuss_decompose(rotate0(pi / 2)), dsqft::ExceptionalSetError);
    CHECK_THROWS_AS(hannabuss_decompose(rotate0(3 * pi / 2) * boost1(0.2)), dsqft::ExceptionalSetError);

    std::mt19937_64 rng(13);
    double worst = 0;
    int used = 0;
    for (int i = 0; i < 1000; ++i) {
        auto g = random_element(rng);
        auto iw = iwasawa_decompose(g);
        if (std::abs(std::cos(iw.alpha)) < 1e-3) continue;
        ++used;
        auto f = hannabuss_decompose(g);
        worst = std::max(worst, frob(compose(f).m, g.m));
    }
    CHECK(used > 900);
    CHECK(worst < 1e-10);

    // compose agrees with the naive matrix product up to that product's own rounding
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        HannabussFactors h{u(rng), i % 2, u(rng), 5 * u(rng)};
        Mat3 naive = boost2(h.s).m * (h.k ? reflection(Reflection::P).m : Mat3::Identity()) * boost1(h.t).m * horo(h.q).m;
        double scale = boost2(h.s).m.norm() * (boost1(h.t).m * horo(h.q).m).norm();
        CHECK((compose(h).m - naive).norm() < 1e-14 * scale);
        auto back = hannabuss_decompose(compose(h));
        CHECK(back.k == h.k);
        CHECK(std::abs(back.s - h.s) < 1e-10);
        CHECK(std::abs(back.t - h.t) < 1e-10);
        CHECK(std::abs(back.q - h.q) < 1e-10 * std::max(1.0, std::abs(h.q)));
    }

    // pure rotation R0(a) = L2(s) P^k L1(t) D(q), worked out by hand from g (1,0,-1) and g (0,1,0)
    for (double a : {0.3, 1.2, 2.0, 2.9, 3.5, 4.4, 5.0, 6.0}) {
        auto f = hannabuss_decompose(rotate0(a));
        double c = std::cos(a), s = std::sin(a);
        CHECK(f.k == (c > 0 ? 0 : 1));
        CHECK(std::abs(std::cosh(f.s) - 1 / std::abs(c)) < 1e-10);
        CHECK(std::abs(std::sinh(f.s) - s / std::abs(c)) < 1e-10);
        CHECK(std::abs(std::exp(f.t) - 1 / std::abs(c)) < 1e-10);
        CHECK(std::abs(f.q - (c > 0 ? -1.0 : 1.0) * s / std::abs(c)) < 1e-10);
    }
}

TEST_CASE("action on the light cone") {
    std::mt19937_64 rng(14);
    for (double a : {0.0, 0.5, 2.0, 4.0}) {
        auto r = act_on_lightcone(rotate0(0.9), {a, 2.0});
        double d = std::abs(wrap_2pi(r.alpha - a - 0.9));
        CHECK(std::min(d, 2 * pi - d) < 1e-13);
        CHECK(std::abs(r.p0 - 2.0) < 1e-13);
        double t = 0.6;
        auto b = act_on_lightcone(boost1(t), {a, 2.0});
        CHECK(std::abs(b.p0 - 2.0 * (std::cosh(t) - std::sinh(t) * std::cos(a))) < 1e-13);
    }
    for (int i = 0; i < 50; ++i) {
        auto g = random_element(rng, 1.0);
        double a = 6.0 * i / 50.0, p0 = 0.5 + i * 0.1;
        auto r = act_on_lightcone(g, {a, p0});
        Vec3 y = g.m * Vec3(p0, p0 * std::sin(a), -p0 * std::cos(a));
        Vec3 back(r.p0, r.p0 * std::sin(r.alpha), -r.p0 * std::cos(r.alpha));
        CHECK((y - back).norm() < 1e-13 * std::max(1.0, y.norm()));
    }
    CHECK_THROWS_AS(act_on_lightcone(GroupElement{}, {0.0, 0.0}), dsqft::DomainError);
}

TEST_CASE("Radon-Nikodym factor") {
    for (double a : {0.0, 1.0, 3.0})
        CHECK(std::abs(radon_nikodym(rotate0(1.7), a) - 1.0) < 1e-14);
    CHECK(std::abs(radon_nikodym(boost1(0.8), 0.0) - std::exp(-0.8)) < 1e-14);
    // rho(g) for g = R0 L1(t) D
    CHECK(std::abs(radon_nikodym(rotate0(0.4) * boost1(1.3) * horo(0.2), 0.0) - std::exp(-1.3)) < 1e-13);

    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> ang(0.0, 2 * pi);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        auto g1 = random_element(rng, 1.5), g2 = random_element(rng, 1.5);
        double a = ang(rng);
        double lhs = radon_nikodym(g1 * g2, a);
        double rhs = radon_nikodym(g1, move_base_angle(g2, a)) * radon_nikodym(g2, a);
        worst = std::max(worst, std::abs(lhs - rhs) / lhs);
    }
    CHECK(worst < 1e-11);
}

TEST_CASE("Haar density in Iwasawa coordinates") {
    // left-invariant volume: det of g^{-1} dg in the basis (L1, L2, K0)
    auto coords = [](const Mat3& x) {
        // x = a L1 + b L2 + c K0 -> (x(0,2), x(0,1), x(2,1))
        return Vec3(x(0, 2), x(0, 1), x(2, 1));
    };
    auto density = [&](double a, double t, double q) {
        const double h = 1e-5;
        auto g = [&](double aa, double tt, double qq) { return compose(IwasawaFactors{aa, 0, tt, qq}).m; };
        Mat3 ginv = compose(IwasawaFactors{a, 0, t, q}).inverse().m;
        Mat3 j;
        j.col(0) = coords(ginv * (g(a + h, t, q) - g(a - h, t, q)) / (2 * h));
        j.col(1) = coords(ginv * (g(a, t + h, q) - g(a, t - h, q)) / (2 * h));
        j.col(2) = coords(ginv * (g(a, t, q + h) - g(a, t, q - h)) / (2 * h));
        return std::abs(j.determinant());
    };
    double ref = density(0.3, 0.0, 0.0);
    for (double t : {-1.0, -0.3, 0.5, 1.2})
        for (double q : {-0.7, 0.4})
            for (double a : {0.3, 2.2}) {
                // the group is unimodular, so left and right densities agree; both come out e^{-t}
                double ratio = density(a, t, q) / (ref * std::exp(-t));
                CHECK(std::abs(ratio - 1.0) < 1e-6);
            }
}
