#pragma once

// Independent reference computations. Nothing here calls into the library routines it is
// used to check; each one takes a different numerical route to the same number.

#include <complex>
#include <functional>

#include <utility>

#include "dsqft/ds_geometry.hpp"
#include "dsqft/one_particle.hpp"
#include "dsqft/special_functions.hpp"

namespace dsqft::oracle {

using cplx = std::complex<double>;

// Euler integral of Gamma(z) for Re z > 0.
cplx gamma_integral(cplx z);

// p(k) from the product of the two boundary values of the associated function
// (Gamma(s+k+1)/Gamma(s-k+1) form). Uses std::tgamma-free complex Lanczos evaluation.
cplx legendre_coeff_product(const special::ComplexDegree& d, int k);

// P_s(x) from the Laplace integral (1/pi) int_0^pi (x + i sqrt(1-x^2) cos a)^s da, 0 <= x < 1.
cplx legendre_laplace(const special::ComplexDegree& d, double x);

// Mehler-Dirichlet integral for P_{-1/2+i nu}(cos theta), theta in (0, pi).
// Complex nu with |Im nu| < 1/2 covers the complementary series.
cplx legendre_mehler_c(cplx nu, double theta);
double legendre_mehler(double nu, double theta);

// Lanczos Gamma (g = 7, n = 9), deliberately a different algorithm from the library's Stirling shift.
cplx gamma_lanczos(cplx z);

// Shadow of L1(tau) x(psi) on S^1 found by scanning null directions at the boosted point,
// bisecting for the ones tangent to the hyperboloid and following them to x0 = 0.
// Returns the endpoint angles unwrapped next to psi, lo <= hi.
std::pair<double, double> shadow_by_ray_tracing(double psi, double tau, double r = 1.0);

// Union of shadows of R0(alpha) L1(tau) R0(-alpha) x(psi) over n sample points of I
// (ray-traced shadows, no monotonicity assumed).
geometry::ArcInterval influence_by_sampling(const geometry::ArcInterval& I, double alpha, double tau, int n);

// Extremal r arcosh(-x.y/r^2) over y on the horosphere P_{tau1} (the stationary point, a maximum
// of -x.y), by golden-section search in the horosphere coordinate.
double horo_distance_by_minimization(const geometry::DeSitterPoint& x, double tau1);

// (c_nu/2) int int r dpsi r dpsi' conj(h1(psi)) P_s(-cos(psi' - psi)) h2(psi') by real-space
// product quadrature on N equispaced nodes: the logarithmic part -c1 ln(4 sin^2(d/2)) of the kernel
// is integrated with the exact trigonometric (Kress) weights, the continuous remainder by the
// trapezoid rule. No mode expansion of h1, h2 is used.
cplx hhat_kernel_quadrature(const oneparticle::ModelParams& p, const std::function<cplx(double)>& h1,
                            const std::function<cplx(double)>& h2, int N);

// <h, A h>_{L^2(dalpha/2pi)} for the intertwiner kernel with exponent -1/2 - a, a = i nu real in (-1/2, 1/2),
// by real-space quadrature: the autocorrelation R(d) = int conj h(x) h(x - d) dx/2pi on a trapezoid grid of
// n points, then int rho(d) (R(d) + R(-d) - 2 R(0)) over (0, pi) by tanh-sinh plus R(0) times the
// finite part of int rho, taken from the Beta integral continued in a.
double intertwiner_form_quadrature(double a, const std::function<cplx(double)>& h, int n = 4096);

// sum_{l<=L} (2l+1)/(4pi) P_l(u) / (l(l+1) + mu_r^2), Legendre polynomials by their three-term recurrence.
double sphere_covariance_mode_sum(double mu_r, double u, int L);

// Var of int r^2 dOmega lambda :phi^4: for the field truncated at L: 24 lambda^2 r^4 8 pi^2 int_{-1}^{1} C_L(u)^4 du,
// C_L the truncated mode sum, by Gauss-Legendre in u.
double quartic_interaction_variance(double mu, double r, double lambda, int L);

}  // namespace dsqft::oracle
