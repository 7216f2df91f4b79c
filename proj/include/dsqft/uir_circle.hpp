#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "dsqft/so12_group.hpp"

// Principal and complementary series of SO0(1,2) realized on functions of the base angle alpha,
// the point R0(alpha)(1,0,-1) of the forward light cone.

namespace dsqft::uir {

using cplx = std::complex<double>;

struct SeriesLabel {
    cplx nu;         // real: principal series; i kappa with 0 < |kappa| < 1/2: complementary series
    int parity = 1;  // the sign (+-1)^k attached to P

    static SeriesLabel principal(double nu, int parity = 1);
    static SeriesLabel complementary(double kappa, int parity = 1);
    bool is_principal() const { return nu.imag() == 0.0; }
    bool is_complementary() const { return nu.real() == 0.0 && nu.imag() != 0.0; }
    SeriesLabel flipped() const { return {-nu, parity}; }
    // Casimir value 1/4 + nu^2
    double casimir() const { return (0.25 + nu * nu).real(); }
};

// Samples on alpha_j = 2 pi j / N, N a power of two.
struct CircleFunction {
    std::vector<cplx> values;

    int size() const { return int(values.size()); }
    double angle(int j) const;
    static CircleFunction from_function(const std::function<cplx(double)>& f, int N);

    // c_k with h(alpha) = sum_k c_k e^{i k alpha}, k = -N/2 .. N/2 - 1 stored at index k mod N
    std::vector<cplx> coefficients() const;
    static CircleFunction from_coefficients(const std::vector<cplx>& c);
    // band-limited interpolant; the Nyquist term is split symmetrically into a cosine
    std::vector<cplx> evaluate(const std::vector<double>& alphas) const;
    cplx evaluate(double alpha) const;
    double sup_distance(const CircleFunction& other) const;
};

// (u(g) h)(a') = (+-1)^k e^{(1/2 + i nu) t} h(a) with g^{-1} R0(a') = R0(a) P^k L1(t) D(q), t in the
// convention of group::iwasawa_decompose (L1(t) shrinks (1,0,-1) by e^{-t}). This is the pullback of the
// homogeneous function of degree -1/2 - i nu on the light cone.
// g must be proper orthochronous (ContractError otherwise).
CircleFunction act(const SeriesLabel& label, const group::GroupElement& g, const CircleFunction& h);

// ||h|| with ||h||^2 = (1/2pi) int |h|^2 dalpha.
double principal_norm(const CircleFunction& h);
// ||h||_nu with ||h||_nu^2 = <h, A_{-nu} h>_{L^2(dalpha/2pi)} in Fourier space: A_{-nu} intertwines u_nu
// with u_{-nu} = u_nu^{*-1}, so this is the norm u_nu preserves. For nu = i kappa, kappa > 0, its kernel
// (sin^2(a/2))^{-1/2 - kappa} is only defined by continuation. DomainError on the principal branch.
double complementary_norm(const SeriesLabel& label, const CircleFunction& h);
// whichever of the two applies
double norm(const SeriesLabel& label, const CircleFunction& h);

// Fourier multiplier of A_nu on e^{ik alpha}:
// Gamma(|k| + 1/2 + i nu) / Gamma(|k| + 1/2 - i nu) * Gamma(1/2 - i nu) / Gamma(1/2 + i nu).
// PoleError when i nu is in {0, 1/2, 1, ...}.
cplx intertwiner_multiplier(cplx nu, int k);
// The same coefficient against the normalized e_k = e^{ik alpha}/sqrt(2 pi): sqrt(2 pi) times the multiplier.
cplx rho_tilde(cplx nu, int k);
// Kernel (Gamma(1/2 - i nu) / (Gamma(1/2) Gamma(-i nu))) (sin^2(a/2))^{-1/2 - i nu} pi, only meaningful
// pointwise where it is integrable (i nu < 0).
cplx intertwiner_kernel(cplx nu, double alpha);

// A_nu h: intertwines u_{-nu} with u_nu.
CircleFunction intertwine(const SeriesLabel& label, const CircleFunction& h);

// Antiunitary time reflection: conj((A_nu h)(a - pi)) on the principal branch, conj(h(a - pi)) on the
// complementary one.
CircleFunction time_reflect(const SeriesLabel& label, const CircleFunction& h);
// Space reflection P = R0(pi): h(a - pi).
CircleFunction space_reflect(const CircleFunction& h);

enum class Generator { K0, L1, L2 };

// d/dt u(exp(t X)) h at t = 0 for the Lie algebra matrix X of the generator, as the first-order
// operator a(alpha) d/dalpha + (1/2 + i nu) b(alpha) applied spectrally; the coefficients come from
// differentiating the base-point action on the light cone.
CircleFunction generator_apply(const SeriesLabel& label, Generator which, const CircleFunction& h);
// sup | (u(exp(dt X)) h - u(exp(-dt X)) h) / (2 dt) - generator_apply(h) |
double generator_residual(const SeriesLabel& label, Generator which, const CircleFunction& h, double dt = 1e-4);
// sup | (-K0^2 + L1^2 + L2^2) h - (1/4 + nu^2) h | / sup |h|, with L = i d/dt u(exp(tX)).
double casimir_residual(const SeriesLabel& label, const CircleFunction& h);

// Eigenvalues of C^2 = -d/dp0 p0^2 d/dp0 on L^2(dp0) over p0 in [e^{-umax}, e^{umax}] with Dirichlet ends,
// n interior nodes uniform in u = ln p0, written as a symmetric matrix (finite differences in u).
Eigen::VectorXd lightcone_casimir_spectrum(int n, double umax);

// |(w)^{-1/2 - i m r} - e^{i (t E - q p1)}|, E = sqrt(p1^2 + m^2), w = -x(t,q).p / (m r),
// x(t,q) = L1(t/r) (q^2/2r, q, r - q^2/2r), p = (E, p1, m).
double flat_contraction_error(double m, double r, double t, double q, double p1);

}  // namespace dsqft::uir
