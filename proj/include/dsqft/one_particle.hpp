#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

#include "dsqft/special_functions.hpp"

// Free one-particle structure on the time-zero circle S^1 of radius r.
// Functions on S^1 are parametrized by psi in [-pi/2, 3pi/2); I+ = (-pi/2, pi/2).

namespace dsqft::oneparticle {

using cplx = std::complex<double>;
using RealFn = std::function<double(double)>;

struct ModelParams {
    double r = 1;
    double mu = 1;
    cplx nu;       // sqrt(mu^2 r^2 - 1/4), or i sqrt(1/4 - mu^2 r^2) below mu r = 1/2
    cplx s_plus;   // -1/2 - i nu
    cplx s_minus;  // -1/2 + i nu
    double c_nu = 0;  // 1 / (2 cos(i nu pi)), real and positive on both branches

    static ModelParams make(double mu, double r);
    bool complementary() const { return nu.real() == 0.0 && nu.imag() > 0.0; }
    special::ComplexDegree degree() const { return special::ComplexDegree::from_s(s_plus); }
};

// omega~(k) from the Gamma-ratio formula (log-Gamma differences).
double dispersion(const ModelParams& p, int k);
// Principal-series closed form with |Gamma|^2; ContractError on the complementary branch.
double dispersion_principal(const ModelParams& p, int k);
// sqrt(k^2/r^2 + mu^2)
double flat_dispersion(const ModelParams& p, int k);

struct ModeSpectrum {
    ModelParams params;
    int K = 0;
    std::vector<double> omega;  // index k + K

    static ModeSpectrum build(const ModelParams& p, int K);
    double at(int k) const { return omega.at(std::size_t(k + K)); }
};

// Trigonometric polynomial h(psi) = sum_{|k|<=K} c_k e^{i k psi}.
struct TrigPoly {
    int K = 0;
    std::vector<cplx> c;  // index k + K

    cplx coeff(int k) const { return std::abs(k) > K ? cplx(0) : c[std::size_t(k + K)]; }
    cplx operator()(double psi) const;
    static TrigPoly from_function(const std::function<cplx(double)>& f, int K, int N = 4096);
};

// <h1, (2 omega)^{-1} h2> in L^2(S^1, r dpsi); the same form as the Legendre kernel
// (c_nu/2) int int r dpsi r dpsi' conj(h1) P_s(-cos(psi'-psi)) h2.
cplx hhat_inner(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2);
// Same form from the Legendre coefficients p(k) instead of omega~(k).
cplx hhat_inner_legendre(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2);

// <omega r h1, omega r h2>_hhat = r^2 <h1, (omega/2) h2>, mode route.
cplx hhat_derivative_inner(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2);
// Same through the coefficients p^1(k) of P_s'.
cplx hhat_derivative_inner_kernel(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2);

// eps^2 = -(cos psi d/dpsi)^2 + mu^2 r^2 cos^2 psi on I+, cell-centred finite volumes with
// cos psi evaluated on the faces. The end faces sit at psi = +-pi/2 where cos vanishes, so the
// scheme has zero flux there. Symmetric with respect to the weights w_i = dpsi / cos psi_i.
class EpsilonOperator {
public:
    EpsilonOperator(const ModelParams& p, int M);

    int size() const { return M_; }
    const ModelParams& params() const { return p_; }
    const Eigen::VectorXd& grid() const { return psi_; }
    const Eigen::VectorXd& weights() const { return w_; }
    const Eigen::VectorXd& eps_squared_eigenvalues() const { return lam2_; }
    double lowest_eigenvalue() const { return lam2_(0); }
    int floored_count() const { return floored_; }

    Eigen::VectorXd sample(const RealFn& f) const;
    Eigen::VectorXd apply_eps2(const Eigen::VectorXd& v) const;
    // max |(W eps2) - (W eps2)^T| relative to its largest entry
    double symmetry_defect() const;

    // Coordinates of v in the orthonormal eigenbasis of L^2(I+, dpsi/cos).
    Eigen::VectorXd spectral(const Eigen::VectorXd& v) const;
    Eigen::MatrixXcd spectral(const Eigen::MatrixXcd& v) const;
    // eps = sqrt of the eps^2 eigenvalues (floored at 1e-12)
    const Eigen::VectorXd& eps() const { return lam_; }
    // <v1, f(eps) v2> in L^2(I+, dpsi/cos)
    double form(const std::function<double(double)>& f, const Eigen::VectorXd& v1, const Eigen::VectorXd& v2) const;

private:
    ModelParams p_;
    int M_;
    double h_;
    Eigen::VectorXd psi_, cos_, w_, sqw_, face_cos_;
    Eigen::VectorXd lam2_, lam_;
    Eigen::MatrixXd Q_;
    int floored_ = 0;
};

EpsilonOperator build_epsilon(const ModelParams& p, int M);

// (e^{-|theta| e} + e^{-(2pi - |theta|) e}) / (2 e (1 - e^{-2 pi e})), theta reduced mod 2pi
double sharp_time_kernel(double theta, double e);

// C_theta(h1, h2) = r <cos h1, (e^{-|theta| eps} + e^{-(2pi - |theta|) eps}) / (2 eps (1 - e^{-2 pi eps})) cos h2>
// in L^2(I+, r dpsi/cos); theta is reduced mod 2pi.
double sharp_time_covariance(const EpsilonOperator& eps, double theta, const RealFn& h1, const RealFn& h2);

// Relative operator-norm residual, on span{e^{ik psi}, |k| <= K}, of the weak form of
// omega = |r cos|^{-1} |eps| (coth(pi|eps|) - P1 / sinh(pi|eps|)), the reflection P1: psi -> pi - psi
// coupling the two half circles.
double omega_magic_residual(const EpsilonOperator& eps, int K);
// The weak-form matrix <e_j, RHS e_k> itself (normalized e_k), to be compared with diag omega~(k).
Eigen::MatrixXcd omega_magic_matrix(const EpsilonOperator& eps, int K);

// -(1/r) <cos h1, sin(eps t)/eps cos h2> in L^2(I+, dpsi/cos); derivative at t = 0 is
// -(1/r) int h1 h2 cos dpsi.
double commutator_kernel(const EpsilonOperator& eps, double t, const RealFn& h1, const RealFn& h2);

// Cauchy data (phi, pi) supported in I+.
struct CauchyData {
    RealFn phi;
    RealFn pi;
};

// Two-point function F(t) = <K f, e^{i t eps} K g>, in the scalar product <., (2|eps|)^{-1} .> of
// L^2(r dpsi/cos), of the KMS structure with Bose weights
// rho = e^{-b|eps|}/(1 - e^{-b|eps|}) at b = beta_state, K_inf(phi, pi) = cos pi - i eps phi.
cplx kms_two_point(const EpsilonOperator& eps, cplx t, const CauchyData& f, const CauchyData& g,
                   double beta_state = 2 * 3.141592653589793);
// |F(t + i beta_check) - conj(F(t))| / sqrt(F_ff(0) F_gg(0)).
double kms_residual(const EpsilonOperator& eps, double t, const CauchyData& f, const CauchyData& g,
                    double beta_check = 2 * 3.141592653589793, double beta_state = 2 * 3.141592653589793);

// Mode-basis generators on k = -K..K: K0 = diag(k), L1 tridiagonal with (r/2) sqrt(omega~(k) omega~(k+1)),
// L2 = -i [K0, L1].
Eigen::MatrixXcd k0_modes(int K);
Eigen::MatrixXcd boost_generator_modes(const ModelParams& p, int K);
Eigen::MatrixXcd l2_modes(const ModelParams& p, int K);

}  // namespace dsqft::oneparticle
