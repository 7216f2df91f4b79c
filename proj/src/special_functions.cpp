#include "dsqft/special_functions.hpp"

#include <boost/math/special_functions/spherical_harmonic.hpp>
#include <cmath>
#include <numbers>

#include "dsqft/errors.hpp"

namespace dsqft::special {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(cplx z) {
    return z.imag() == 0.0 && z.real() <= 0.0 && std::floor(z.real()) == z.real();
}

// Stirling series, valid for Re z >= 15
cplx log_gamma_stirling(cplx z) {
    static const double bern[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6, -3617.0 / 510};
    cplx zinv = 1.0 / z, zinv2 = zinv * zinv;
    cplx series = 0.0, pw = zinv;
    for (int n = 1; n <= 8; ++n) {
        series += bern[n - 1] / (2.0 * n * (2.0 * n - 1)) * pw;
        pw *= zinv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2 * kPi) + series;
}

// 1/Gamma(z), zero at the poles
cplx rgamma(cplx z) {
    if (is_nonpositive_integer(z)) return 0.0;
    return std::exp(-log_gamma(z));
}

bool is_integer(cplx s) {
    return s.imag() == 0.0 && std::floor(s.real()) == s.real();
}

}  // namespace

cplx log_gamma(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("log_gamma: non-finite argument");
    if (is_nonpositive_integer(z)) throw PoleError("Gamma at non-positive integer");
    // lnG(z) = lnG(z+n) - sum log(z+j) stays on the principal branch when each log is principal
    cplx shift = 0.0;
    while (z.real() < 15.0) {
        shift += std::log(z);
        z += 1.0;
    }
    return log_gamma_stirling(z) - shift;
}

cplx gamma(cplx z) { return std::exp(log_gamma(z)); }

namespace {
// log(1 + u) without the rounding of 1 + u in the real part
template <class T>
std::complex<T> log1p_c(std::complex<T> u) {
    T x = u.real(), y = u.imag();
    return {T(0.5) * std::log1p(2 * x + x * x + y * y), std::atan2(y, T(1) + x)};
}

template <class T>
std::complex<T> gamma_ratio_impl(std::complex<T> z, std::complex<T> a, std::complex<T> b) {
    using C = std::complex<T>;
    auto nonpos_int = [](C w) { return w.imag() == 0 && w.real() <= 0 && std::floor(w.real()) == w.real(); };
    if (nonpos_int(z + a)) throw PoleError("gamma_ratio: pole in the numerator");
    if (nonpos_int(z + b)) return T(0);
    C prod = T(1);
    while (z.real() + std::min(a.real(), b.real()) < 15 || z.real() < 15) {
        prod *= (z + b) / (z + a);
        z += T(1);
    }
    // Stirling for lnG(z+a) - lnG(z+b), with the (Z - 1/2) ln Z parts expanded around ln z
    static const T bern[] = {T(1) / 6, T(-1) / 30, T(1) / 42, T(-1) / 30, T(5) / 66, T(-691) / 2730, T(7) / 6, T(-3617) / 510};
    const C za = z + a, zb = z + b;
    C d = (a - b) * std::log(z) + (za - T(0.5)) * log1p_c(C(a / z)) - (zb - T(0.5)) * log1p_c(C(b / z)) - (a - b);
    C ia = T(1) / za, ib = T(1) / zb, pa = ia, pb = ib;
    for (int n = 1; n <= 8; ++n) {
        d += bern[n - 1] / T(2 * n * (2 * n - 1)) * (pa - pb);
        pa *= ia * ia;
        pb *= ib * ib;
    }
    return prod * std::exp(d);
}
}  // namespace

cplx gamma_ratio(cplx z, cplx a, cplx b) { return gamma_ratio_impl<double>(z, a, b); }

std::complex<long double> gamma_ratio_extended(std::complex<long double> z, std::complex<long double> a,
                                               std::complex<long double> b) {
    return gamma_ratio_impl<long double>(z, a, b);
}

ComplexDegree ComplexDegree::from_nu(cplx nu) {
    return {-0.5 - cplx(0, 1) * nu, nu};
}

ComplexDegree ComplexDegree::from_s(cplx s) {
    // s = -1/2 - i nu  =>  nu = i (s + 1/2)
    return {s, cplx(0, 1) * (s + 0.5)};
}

bool ComplexDegree::principal() const { return std::abs(nu.imag()) < 1e-15; }

bool ComplexDegree::complementary() const {
    return std::abs(nu.real()) < 1e-15 && nu.imag() > 0.0 && nu.imag() < 0.5;
}

cplx tail_constant(const ComplexDegree& d) { return -std::sin(kPi * d.s) / kPi; }

cplx legendre_coeff(const ComplexDegree& d, int k) {
    const cplx s = d.s;
    if (is_integer(s)) throw ContractError("integer degree not supported");
    double kk = k;
    cplx lg = log_gamma((kk - s) / 2.0) - log_gamma((kk + s) / 2.0) + log_gamma((kk + s + 1.0) / 2.0) -
              log_gamma((kk - s + 1.0) / 2.0);
    return tail_constant(d) / (kk + s) * std::exp(lg);
}

cplx legendre_prime_coeff(const ComplexDegree& d, int k) {
    double kk = k;
    return (d.s + kk) * (d.s - kk) * legendre_coeff(d.shifted(-1), k);
}

cplx legendre_at_zero(const ComplexDegree& d) {
    return std::sqrt(kPi) * rgamma(0.5 - d.s / 2.0) * rgamma(d.s / 2.0 + 1.0);
}

double log_sum(double psi) { return -std::log(2.0 * std::sin(0.5 * psi)); }

double cubic_sum(double psi) {
    double c = std::cos(psi);
    return (c - 1.0) * log_sum(psi) + 0.75 * c - 0.5;
}

double linear_sum(double psi) {
    double h = std::sin(0.5 * psi);
    return -0.25 / (h * h);
}

LegendreSeries::LegendreSeries(const ComplexDegree& d, int K) : deg_(d), K_(K) {
    if (K < 2) throw ContractError("series cutoff must be >= 2");
    if (is_integer(d.s)) throw ContractError("integer degree not supported");
    c1_ = tail_constant(d);
    // r omega(k) = k + b/k + d3/k^3 + ..., with 2b = mu^2 r^2 = -s(s+1) and d3 = -(b + b^2)/2
    b_ = -d.s * (d.s + 1.0) / 2.0;
    d3_ = -(b_ + b_ * b_) / 2.0;
    p_.resize(K + 1);
    rem_.resize(K + 1);
    p1_.resize(K + 1);
    rem1_.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        p_[k] = legendre_coeff(d, k);
        p1_[k] = legendre_prime_coeff(d, k);
        if (k == 0) {
            rem_[k] = p_[k];
            rem1_[k] = p1_[k];
            continue;
        }
        double kk = k;
        double g = k >= 2 ? 1.0 / (kk * (kk * kk - 1.0)) : 0.0;
        // 1/(r omega) = 1/k - b/k^3 + O(k^-5)
        rem_[k] = p_[k] - c1_ * (1.0 / kk - b_ * g);
        rem1_[k] = p1_[k] - c1_ * (kk + b_ / kk + d3_ * g);
    }
}

cplx LegendreSeries::coeff(int k) const {
    k = std::abs(k);
    return k <= K_ ? p_[k] : legendre_coeff(deg_, k);
}

cplx LegendreSeries::prime_coeff(int k) const {
    k = std::abs(k);
    return k <= K_ ? p1_[k] : legendre_prime_coeff(deg_, k);
}

cplx LegendreSeries::value_psi(double psi) const {
    cplx sum = 0.0;
    for (int k = K_; k >= 1; --k) sum += rem_[k] * std::cos(k * psi);
    return p_[0] + 2.0 * sum + 2.0 * c1_ * (log_sum(psi) - b_ * cubic_sum(psi));
}

cplx LegendreSeries::dvalue_psi(double psi) const {
    cplx sum = 0.0;
    for (int k = K_; k >= 1; --k) sum += double(k) * rem_[k] * std::sin(k * psi);
    double dl = -0.5 / std::tan(0.5 * psi);
    double dc = -std::sin(psi) * (log_sum(psi) + 0.25);
    return -2.0 * sum + 2.0 * c1_ * (dl - b_ * dc);
}

cplx LegendreSeries::d2value_psi(double psi) const {
    cplx sum = 0.0;
    for (int k = K_; k >= 1; --k) sum += double(k) * double(k) * rem_[k] * std::cos(k * psi);
    double h = std::sin(0.5 * psi);
    double d2l = 0.25 / (h * h);
    double c = std::cos(psi);
    double d2c = -c * (log_sum(psi) + 0.25) + 0.5 * (1.0 + c);
    return -2.0 * sum + 2.0 * c1_ * (d2l - b_ * d2c);
}

cplx LegendreSeries::prime_psi(double psi) const {
    cplx sum = 0.0;
    for (int k = K_; k >= 1; --k) sum += rem1_[k] * std::cos(k * psi);
    return p1_[0] + 2.0 * sum + 2.0 * c1_ * (linear_sum(psi) + b_ * log_sum(psi) + d3_ * cubic_sum(psi));
}

namespace {
double psi_of(double x) {
    if (!(x > -1.0 && x <= 1.0)) {
        if (x == -1.0) throw DomainError("P_s is singular at x = -1");
        throw DomainError("argument outside (-1, 1]");
    }
    return std::acos(-x);
}
}  // namespace

cplx LegendreSeries::value(double x) const { return value_psi(psi_of(x)); }

cplx LegendreSeries::derivative(double x) const { return prime_psi(psi_of(x)); }

cplx LegendreSeries::second_derivative(double x) const {
    double psi = psi_of(x);
    if (x == 1.0) throw DomainError("second derivative needs |x| < 1");
    double sn = std::sin(psi), cs = std::cos(psi);
    // P_psi = P_x sin psi, P_psipsi = P_xx sin^2 psi + P_x cos psi
    cplx px = dvalue_psi(psi) / sn;
    return (d2value_psi(psi) - px * cs) / (sn * sn);
}

double LegendreSeries::tail_estimate() const {
    // remainder terms fall like k^-5, so sum_{k>K} 2|r_k| ~ 2|r_K| K / 4
    return 0.5 * std::abs(rem_[K_]) * K_;
}

cplx legendre_p(const ComplexDegree& d, double x, int K) { return LegendreSeries(d, K).value(x); }

namespace {
// 2F1(k-s, k+s+1; k+1; z) by its power series, z in [0, 1)
cplx ferrers_hyp(cplx s, int k, double z) {
    cplx a = double(k) - s, b = double(k) + s + 1.0;
    double c = k + 1.0;
    cplx term = 1.0, sum = 1.0;
    for (int n = 0; n < 200000; ++n) {
        term *= (a + double(n)) * (b + double(n)) / ((c + n) * (n + 1.0)) * z;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum) && n > 4) break;
    }
    return sum;
}

// log of (2^{-k}/k!) (1-x^2)^{k/2}, the Gamma-free part of the Ferrers prefactor
double ferrers_log_shape(int k, double x) {
    return -k * std::log(2.0) - std::lgamma(k + 1.0) + 0.5 * k * std::log1p(-x * x);
}
}  // namespace

cplx ferrers_p(const ComplexDegree& d, int k, double x) {
    if (k < 0) throw ContractError("ferrers_p needs k >= 0");
    if (!(std::abs(x) < 1.0)) throw DomainError("ferrers_p needs |x| < 1");
    const cplx s = d.s;
    cplx lpre = log_gamma(s + double(k) + 1.0) - log_gamma(s - double(k) + 1.0) + ferrers_log_shape(k, x);
    double sign = (k % 2) ? -1.0 : 1.0;
    return sign * std::exp(lpre) * ferrers_hyp(s, k, 0.5 * (1.0 - x));
}

cplx ferrers_p_at_zero(const ComplexDegree& d, int k) {
    const cplx s = d.s;
    double kk = k;
    return std::pow(2.0, kk) * std::sqrt(kPi) * rgamma((s - kk) / 2.0 + 1.0) * rgamma((1.0 - s - kk) / 2.0);
}

double addition_formula_check(const ComplexDegree& d, double theta_prime, double dpsi, int K, int legendre_K) {
    // the series converges only when sin(dpsi) > 0 (polar angles pi/2 and arccos(sin dpsi) sum below pi)
    if (!(dpsi > 0.0 && dpsi < kPi / 2)) throw DomainError("addition formula needs 0 < dpsi < pi/2");
    LegendreSeries ser(d, legendre_K);
    const cplx s = d.s;
    const double x = std::sin(dpsi);
    cplx lhs = ser.value(-std::cos(dpsi) * std::cos(theta_prime));
    cplx rhs = legendre_at_zero(d) * ser.value(x);
    for (int k = 1; k <= K; ++k) {
        double kk = k;
        // (-1)^k Gamma(s-k+1)/Gamma(s+k+1) P^k(0) P^k(x): the Gamma ratio cancels against the
        // prefactor of P^k(x) and the two (-1)^k cancel; the rest is kept in log form (terms reach 1e300)
        cplx lg = ferrers_log_shape(k, x) + kk * std::log(2.0) + 0.5 * std::log(kPi) -
                  log_gamma((s - kk) / 2.0 + 1.0) - log_gamma((1.0 - s - kk) / 2.0);
        rhs += 2.0 * std::cos(k * theta_prime) * std::exp(lg) * ferrers_hyp(s, k, 0.5 * (1.0 - x));
    }
    return std::abs(lhs - rhs);
}

cplx sph_harm(int l, int m, double theta, double psi) {
    if (l < 0 || std::abs(m) > l) throw DomainError("sph_harm needs |m| <= l");
    return boost::math::spherical_harmonic<double>(unsigned(l), m, theta, psi);
}

}  // namespace dsqft::special
