#include "checks/oracles.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dsqft::oracle {

namespace {
constexpr double kPi = std::numbers::pi;
}

cplx gamma_lanczos(cplx z) {
    static const double g = 7.0;
    static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                               771.32342877765313,   -176.61502916214059,   12.507343278686905,
                               -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) return kPi / (std::sin(kPi * z) * gamma_lanczos(1.0 - z));
    z -= 1.0;
    cplx x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + double(i));
    cplx t = z + g + 0.5;
    return std::sqrt(2 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

cplx gamma_integral(cplx z) {
    boost::math::quadrature::exp_sinh<double> integrator;
    // split [0,1] off so the t^{z-1} endpoint behavior gets tanh_sinh
    boost::math::quadrature::tanh_sinh<double> ts;
    auto head = [&](bool imag) {
        return ts.integrate(
            [&](double t) {
                cplx v = std::exp((z - 1.0) * std::log(t) - t);
                return imag ? v.imag() : v.real();
            },
            0.0, 1.0, 1e-15);
    };
    auto tail = [&](bool imag) {
        return integrator.integrate(
            [&](double u) {
                double t = 1.0 + u;
                cplx v = std::exp((z - 1.0) * std::log(t) - t);
                return imag ? v.imag() : v.real();
            },
            1e-15);
    };
    return {head(false) + tail(false), head(true) + tail(true)};
}

cplx legendre_coeff_product(const special::ComplexDegree& d, int k) {
    const cplx s = d.s;
    double kk = k;
    cplx g1 = gamma_lanczos(s + kk + 1.0);
    cplx g2 = gamma_lanczos(s - kk + 1.0);
    cplx g3 = gamma_lanczos((kk - s + 1.0) / 2.0);
    cplx g4 = gamma_lanczos((kk + s) / 2.0 + 1.0);
    double sign = (k % 2) ? -1.0 : 1.0;
    return sign * kPi / std::pow(2.0, 2 * kk) * g1 / g2 / (g3 * g3 * g4 * g4);
}

cplx legendre_laplace(const special::ComplexDegree& d, double x) {
    // for x < 0 the base crosses the cut of the complex power and the formula no longer holds
    if (!(x >= 0.0 && x < 1.0)) throw std::domain_error("Laplace integral oracle needs 0 <= x < 1");
    const cplx s = d.s;
    const double y = std::sqrt(1.0 - x * x);
    boost::math::quadrature::tanh_sinh<double> ts;
    auto piece = [&](double a, double b, bool imag) {
        return ts.integrate(
            [&](double t) {
                cplx base(x, y * std::cos(t));
                cplx v = std::exp(s * std::log(base));  // principal branch
                return imag ? v.imag() : v.real();
            },
            a, b, 1e-14);
    };
    double re = piece(0.0, kPi / 2, false) + piece(kPi / 2, kPi, false);
    double im = piece(0.0, kPi / 2, true) + piece(kPi / 2, kPi, true);
    return cplx(re, im) / kPi;
}

cplx legendre_mehler_c(cplx nu, double theta) {
    boost::math::quadrature::tanh_sinh<double> ts;
    auto integrand = [&](bool imag) {
        return [&, imag](double t, double tc) {
            // cos t - cos theta = 2 sin((theta+t)/2) sin((theta-t)/2), with theta - t taken from the
            // complement near the singular endpoint
            double gap = tc > 0 ? tc : theta - t;
            double den = 2.0 * std::sin(0.5 * (theta + t)) * std::sin(0.5 * gap);
            cplx v = std::cosh(nu * t) / std::sqrt(den);
            return imag ? v.imag() : v.real();
        };
    };
    double re = ts.integrate(integrand(false), 0.0, theta, 1e-14);
    double im = nu.imag() == 0.0
                    ? 0.0
                    : ts.integrate(integrand(true), 0.0, theta, 1e-14);
    return std::sqrt(2.0) / kPi * cplx(re, im);
}

double legendre_mehler(double nu, double theta) { return legendre_mehler_c(nu, theta).real(); }

namespace {

// Endpoints of the causal shadow of y on S^1, unwrapped around ref.
std::pair<double, double> trace_shadow(const group::Vec3& y, double ref) {
    // null direction v = (1, sin b, cos b) is tangent to the hyperboloid at y iff v.y = 0
    auto f = [&](double b) { return y(1) * std::sin(b) + y(2) * std::cos(b) - y(0); };
    const int n = 720;
    std::vector<double> ends;
    for (int i = 0; i < n; ++i) {
        double a = 2 * kPi * i / n, b = 2 * kPi * (i + 1) / n;
        double fa = f(a), fb = f(b);
        if (fa == 0.0) fb = fa, b = a;
        if ((fa < 0) == (fb < 0) && fa != 0.0) continue;
        for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
            double m = 0.5 * (a + b);
            if ((f(m) < 0) == (fa < 0)) a = m, fa = f(m);
            else b = m;
        }
        double beta = 0.5 * (a + b);
        // follow the ray y - lambda v until x0 = 0 (lambda = y0: past for y0 > 0, future for y0 < 0)
        double z1 = y(1) - y(0) * std::sin(beta), z2 = y(2) - y(0) * std::cos(beta);
        double phi = std::atan2(z1, z2);
        ends.push_back(ref + std::remainder(phi - ref, 2 * kPi));
    }
    if (ends.empty()) throw std::runtime_error("ray tracing found no tangent null direction");
    double lo = ends[0], hi = ends[0];
    for (double e : ends) lo = std::min(lo, e), hi = std::max(hi, e);
    return {lo, hi};
}

}  // namespace

std::pair<double, double> shadow_by_ray_tracing(double psi, double tau, double r) {
    group::Vec3 x(0.0, r * std::sin(psi), r * std::cos(psi));
    return trace_shadow(group::boost1(tau).m * x, psi);
}

geometry::ArcInterval influence_by_sampling(const geometry::ArcInterval& I, double alpha, double tau, int n) {
    group::Mat3 g = (group::rotate0(alpha) * group::boost1(tau) * group::rotate0(-alpha)).m;
    double lo = 1e300, hi = -1e300;
    for (int j = 0; j <= n; ++j) {
        double psi = I.lo() + (I.hi() - I.lo()) * j / n;
        group::Vec3 x(0.0, I.r * std::sin(psi), I.r * std::cos(psi));
        auto [a, b] = trace_shadow(g * x, psi);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    return geometry::ArcInterval::from_endpoints(lo, hi, I.r);
}

double horo_distance_by_minimization(const geometry::DeSitterPoint& x, double tau1) {
    const double r = x.r;
    // -x.y/r^2 is a concave quadratic in the sheet coordinate: its stationary point is a maximum, so
    // search for the minimum of x.y
    auto f = [&](double xi) {
        return geometry::dot(x, geometry::DeSitterPoint::horo_chart(tau1, xi, r)) / (r * r);
    };
    double B = 1.0;
    while (f(B) < f(0.5 * B) || f(-B) < f(-0.5 * B)) B *= 2;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = -B, b = B;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-12 * B) {
        if (fc < fd) {
            b = d, d = c, fd = fc;
            c = b - g * (b - a), fc = f(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + g * (b - a), fd = f(d);
        }
    }
    return r * std::acosh(std::max(1.0, -f(0.5 * (a + b))));
}

}  // namespace dsqft::oracle

namespace dsqft::oracle {

cplx hhat_kernel_quadrature(const oneparticle::ModelParams& p, const std::function<cplx(double)>& h1,
                            const std::function<cplx(double)>& h2, int N) {
    if (N < 8 || N % 2) throw std::invalid_argument("quadrature order must be even and >= 8");
    constexpr double pi = std::numbers::pi;
    const int n = N / 2;
    const double step = 2 * pi / N;
    special::LegendreSeries P(p.degree(), 512);
    const cplx c1 = special::tail_constant(p.degree());

    // Kress weights for int_0^{2pi} ln(4 sin^2((t - s)/2)) f(s) ds at nodes, by offset d = i - j
    std::vector<double> R(N);
    for (int d = 0; d < N; ++d) {
        double t = d * step, acc = std::cos(n * t) / (2.0 * n);
        for (int m = 1; m < n; ++m) acc += std::cos(m * t) / m;
        R[d] = -(2 * pi / n) * acc;
    }
    // smooth remainder S = P + c1 ln(4 sin^2(d/2)), continuous at 0
    std::vector<cplx> S(N);
    auto remainder_at = [&](double d) { return P.value_psi(d) + c1 * std::log(4 * std::pow(std::sin(d / 2), 2)); };
    S[0] = remainder_at(1e-6);
    for (int d = 1; d < N; ++d) S[d] = remainder_at(d * step);

    std::vector<cplx> a(N), b(N);
    for (int j = 0; j < N; ++j) {
        a[j] = std::conj(h1(j * step));
        b[j] = h2(j * step);
    }
    cplx total = 0;
    for (int i = 0; i < N; ++i) {
        cplx inner = 0;
        for (int j = 0; j < N; ++j) {
            int d = ((j - i) % N + N) % N;
            inner += (-c1 * R[d] + step * S[d]) * b[j];
        }
        total += a[i] * inner;
    }
    const double r = p.r;
    return 0.5 * p.c_nu * r * r * step * total;
}

}  // namespace dsqft::oracle

namespace dsqft::oracle {

double intertwiner_form_quadrature(double a, const std::function<cplx(double)>& h, int n) {
    constexpr double pi = std::numbers::pi;
    if (!(std::abs(a) < 0.5) || a == 0.0) throw std::invalid_argument("need 0 < |a| < 1/2");
    std::vector<cplx> v(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) v[std::size_t(j)] = h(2 * pi * j / n);
    auto R = [&](double d) {
        cplx s = 0;
        for (int j = 0; j < n; ++j) s += std::conj(v[std::size_t(j)]) * h(2 * pi * j / n - d);
        return s / double(n);
    };
    const cplx r0 = R(0.0);
    // prefactor Gamma(1/2 - a) / (sqrt(pi) Gamma(-a)) times pi
    const double pref = std::tgamma(0.5 - a) / (std::sqrt(pi) * std::tgamma(-a)) * pi;
    auto integrand = [&](double d) {
        if (d < 1e-9) return 0.0;  // bracket is O(d^2); avoids inf * 0
        double k = pref * std::pow(std::sin(0.5 * d), -1.0 - 2.0 * a);
        return (k * (R(d) + R(-d) - 2.0 * r0)).real();
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double body = ts.integrate(integrand, 0.0, pi) / (2 * pi);
    // (1/2pi) int_0^{2pi} (sin^2(d/2))^{-1/2-a} dd = Gamma(-a) / (sqrt(pi) Gamma(1/2 - a)), continued in a
    double fp = pref * std::tgamma(-a) / (std::sqrt(pi) * std::tgamma(0.5 - a));
    return body + fp * r0.real();
}

double sphere_covariance_mode_sum(double mu_r, double u, int L) {
    double p0 = 1, p1 = u, s = 1.0 / (mu_r * mu_r);
    if (L >= 1) s += 3 * u / (2 + mu_r * mu_r);
    for (int l = 1; l < L; ++l) {
        double p2 = ((2 * l + 1) * u * p1 - l * p0) / (l + 1);
        p0 = p1;
        p1 = p2;
        s += (2 * l + 3) * p2 / ((l + 1.0) * (l + 2) + mu_r * mu_r);
    }
    return s / (4 * std::numbers::pi);
}

double quartic_interaction_variance(double mu, double r, double lambda, int L) {
    // C_L^4 is a polynomial of degree 4L: 100 points per panel are exact up to L = 49
    constexpr double pi = std::numbers::pi;
    double s = 0;
    for (int panel = 0; panel < 8; ++panel) {
        const double a = -1 + panel * 0.25, b = a + 0.25;
        s += boost::math::quadrature::gauss<double, 100>::integrate(
            [&](double u) { return std::pow(sphere_covariance_mode_sum(mu * r, u, L), 4); }, a, b);
    }
    return 24 * lambda * lambda * std::pow(r, 4) * 8 * pi * pi * s;
}

}  // namespace dsqft::oracle
