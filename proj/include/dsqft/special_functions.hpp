#pragma once

#include <complex>
#include <vector>

namespace dsqft::special {

using cplx = std::complex<double>;

// Principal branch of log Gamma. Throws PoleError at non-positive integers.
cplx log_gamma(cplx z);
cplx gamma(cplx z);
// Gamma(z+a)/Gamma(z+b) without forming the two log-Gammas separately, so no cancellation at large z.
cplx gamma_ratio(cplx z, cplx a, cplx b);
// Same in long double, for results that must round correctly to double.
std::complex<long double> gamma_ratio_extended(std::complex<long double> z, std::complex<long double> a,
                                               std::complex<long double> b);

// s = -1/2 - i nu, so s(s+1) = -(1/4 + nu^2).
struct ComplexDegree {
    cplx s;
    cplx nu;

    static ComplexDegree from_nu(cplx nu);
    static ComplexDegree from_s(cplx s);
    bool principal() const;      // nu real
    bool complementary() const;  // nu in i(0, 1/2)
    ComplexDegree shifted(int n) const { return from_s(s + double(n)); }
};

// Fourier coefficient p(k) of P_s(-cos psi) for any integer k, from the closed Gamma form.
// Throws ContractError for integer s.
cplx legendre_coeff(const ComplexDegree& d, int k);

// -sin(pi s)/pi, the coefficient of the 1/|k| tail of p(k).
cplx tail_constant(const ComplexDegree& d);

// p^1(k) = (s+k)(s-k) p_{s-1}(k): Fourier coefficients of P_s'(-cos psi).
cplx legendre_prime_coeff(const ComplexDegree& d, int k);

// P_s(0) in closed form.
cplx legendre_at_zero(const ComplexDegree& d);

// Fourier series of P_s(-cos psi) and of P_s'(-cos psi) truncated at K.
// The slowly decaying parts of the coefficients (1/k and 1/k^3 for P_s, k, 1/k and 1/k^3 for
// P_s') are summed in closed form, so the truncated remainder decays like k^{-5}.
class LegendreSeries {
public:
    LegendreSeries(const ComplexDegree& d, int K = 256);

    const ComplexDegree& degree() const { return deg_; }
    int cutoff() const { return K_; }
    cplx coeff(int k) const;        // p(|k|) for |k| <= K, computed on demand beyond
    cplx prime_coeff(int k) const;  // p^1(|k|)

    // Values as functions of psi in (0, 2pi), x = -cos psi.
    cplx value_psi(double psi) const;
    cplx dvalue_psi(double psi) const;   // d/dpsi P_s(-cos psi)
    cplx d2value_psi(double psi) const;  // d^2/dpsi^2
    cplx prime_psi(double psi) const;    // P_s'(-cos psi) from the p^1 series

    // P_s(x), P_s'(x), P_s''(x) for x in (-1, 1]. x = -1 throws DomainError.
    cplx value(double x) const;
    cplx derivative(double x) const;
    cplx second_derivative(double x) const;

    // bound on the neglected remainder of value_psi
    double tail_estimate() const;

private:
    ComplexDegree deg_;
    int K_;
    cplx c1_;   // tail constant
    cplx b_;    // r*omega(k) = k + b/k + d/k^3 + ...
    cplx d3_;
    std::vector<cplx> p_, rem_;    // p(k) and p(k) minus its subtracted tail
    std::vector<cplx> p1_, rem1_;  // same for p^1
};

// Convenience: LegendreSeries(d, K).value(x).
cplx legendre_p(const ComplexDegree& d, double x, int K = 256);

// Ferrers function P_s^k(x), |x| < 1, from the hypergeometric series in (1-x)/2
// (Condon-Shortley sign included). Intended for x > -0.95.
cplx ferrers_p(const ComplexDegree& d, int k, double x);
// P_s^k(0) in closed form.
cplx ferrers_p_at_zero(const ComplexDegree& d, int k);

// |P_s(-cos(dpsi) cos(theta')) - [P_s(0) P_s(sin dpsi) + 2 sum_{k=1}^{K} (-1)^k G_k cos(k theta') P_s^k(0) P_s^k(sin dpsi)]|
// with G_k = Gamma(s-k+1)/Gamma(s+k+1). Requires 0 < dpsi < pi/2; the series diverges for dpsi < 0.
double addition_formula_check(const ComplexDegree& d, double theta_prime, double dpsi, int K = 60,
                              int legendre_K = 256);

// Orthonormal on the unit sphere (Condon-Shortley phase), theta the polar angle, psi the azimuth.
cplx sph_harm(int l, int m, double theta, double psi);

// Sums for psi in (0, 2pi) used to resum slowly decaying Fourier tails.
double log_sum(double psi);      // sum_{k>=1} cos(k psi)/k = -ln(2 sin(psi/2))
double cubic_sum(double psi);    // sum_{k>=2} cos(k psi)/(k(k^2-1))
double linear_sum(double psi);   // Abel sum of sum_{k>=1} k cos(k psi) = -1/(4 sin^2(psi/2))

}  // namespace dsqft::special
