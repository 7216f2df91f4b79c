#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dsqft/one_particle.hpp"

// Free Euclidean field on the sphere S^2 of radius r, realized through spherical-harmonic modes.
// Points: x = r (cos theta, sin theta cos psi, sin theta sin psi); theta is measured from the x0 axis,
// so the reflection x0 -> -x0 is theta -> pi - theta and the equator is the time-zero circle.
// Integrals over S^2 use the area measure r^2 dOmega.

namespace dsqft::euclid {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using oneparticle::ModelParams;

Vec3 sphere_point(double r, double theta, double psi);

// 1 / (l(l+1) + mu^2 r^2): the covariance (-Laplacian + mu^2)^{-1} has kernel
// sum_l (2l+1)/(4pi) mode_variance(l) P_l(x.y/r^2) against r^2 dOmega.
double mode_variance(const ModelParams& p, int l);

// (c_nu/2) P_s(-x.y/r^2). x, y on the radius-r sphere (ContractError otherwise);
// DomainError at coincident points, where the kernel diverges logarithmically.
double sphere_covariance(const ModelParams& p, const Vec3& x, const Vec3& y);

// Real band-limited function sum_{l<=L, |m|<=l} a_{lm} Y_lm(unit vector), Y_lm orthonormal on the unit
// sphere with the Condon-Shortley phase. a_{l,-m} = (-1)^m conj(a_{lm}).
struct SphereModes {
    int L = 0;
    std::vector<cplx> a;  // index l*l + l + m

    static SphereModes zero(int L);
    static std::size_t index(int l, int m) { return std::size_t(l * l + l + m); }
    cplx at(int l, int m) const { return l > L ? cplx(0) : a[index(l, m)]; }
    // sets a_{lm} and its partner a_{l,-m}
    void set(int l, int m, cplx v);
    double reality_defect() const;
    SphereModes truncated(int L2) const;
    double operator()(const Vec3& unit) const;
};

// Real L^2(dOmega) pairing of two real band-limited functions.
double mode_pairing(const SphereModes& f, const SphereModes& g);

// Gauss-Legendre nodes in cos theta on [x_lo, x_hi] times a uniform psi grid. On the full sphere
// products of total band <= band are integrated exactly.
class SphereGrid {
public:
    explicit SphereGrid(int band, int L, double x_lo = -1.0, double x_hi = 1.0);

    int rings() const { return int(x_.size()); }
    int columns() const { return n_psi_; }
    int L() const { return L_; }
    double cos_theta(int i) const { return x_(i); }
    double psi(int j) const;
    Vec3 unit(int i, int j) const;

    // values on the grid, rings x columns
    Eigen::MatrixXd synthesize(const SphereModes& f) const;
    // modes up to L of a real function sampled on the grid (full sphere only)
    SphereModes analyze(const Eigen::MatrixXd& values) const;
    // integral over the covered part of the unit sphere, dOmega
    double integrate(const Eigen::MatrixXd& values) const;

private:
    int L_, n_psi_;
    Eigen::VectorXd x_, w_;
    std::vector<Eigen::MatrixXd> plm_;  // plm_[m](i, l - m): normalized associated Legendre at x_i
    Eigen::MatrixXcd phase_;            // (m, j) -> e^{i m psi_j}
};

// Modes up to L of a real function on the unit sphere, by exact quadrature for band-limited input.
SphereModes project(const std::function<double(const Vec3&)>& f, int L);

// exp(kappa (x.n - 1)) for a unit centre n, from its exact Funk-Hecke coefficients. kappa <= 700.
SphereModes vmf_bump(const Vec3& centre, double kappa, int L);

// Rotated function (R f)(x) = f(R^{-1} x) for a rotation matrix R.
SphereModes rotate(const SphereModes& f, const Eigen::Matrix3d& R);

// x0 -> -x0: a_{lm} -> (-1)^{l+m} a_{lm}
SphereModes reflect_time(const SphereModes& f);

// Smeared covariance C(f, g) = r^4 sum_l mode_variance(l) sum_m conj(f_lm) g_lm, the functions integrated
// against r^2 dOmega.
double covariance(const ModelParams& p, const SphereModes& f, const SphereModes& g);

// SplitMix64 mixing of (seed, index); used to derive independent generator seeds.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);
// DSQFT_THREADS if set to a positive integer, else the hardware concurrency.
int thread_count();

struct HarmonicField {
    SphereModes modes;
    ModelParams params;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// Independent Gaussian modes, E|a_lm|^2 = mode_variance(l), so Cov(Phi(f), Phi(g)) = covariance(f, g).
// A pure function of (params, L, seed, stream).
HarmonicField sample_field(const ModelParams& p, int L, std::uint64_t seed, std::uint64_t stream = 0);

std::vector<double> evaluate_field(const HarmonicField& field, const std::vector<Vec3>& points);
// Phi(f) = int r^2 dOmega f Phi
double smeared(const HarmonicField& field, const SphereModes& f);

// :x^n: relative to variance c, sum_m n!/(m!(n-2m)!) x^{n-2m} (-c/2)^m. ContractError for n < 0 or c < 0.
double wick_power(double x, int n, double c);

struct WickPolynomial {
    std::vector<double> coeffs;  // coefficient of :phi^n: at index n

    int degree() const;
    bool bounded_below() const;
    static WickPolynomial parse(const std::string& csv);
    double operator()(double x, double c) const;
};

// Truncated diagonal C^{(L)}(x, x) = sum_{l<=L} (2l+1)/(4pi) mode_variance(l), the same at every point.
double wick_constant(const ModelParams& p, int L);

// int r^2 dOmega P(Phi_{L_int}(x)) with each power Wick ordered at wick_constant(L_int); the field is
// truncated at L_int first. ContractError if L_int > field.L, or if require_bounded_below and P is not.
double interaction_V(const HarmonicField& field, const WickPolynomial& P, int L_int, bool require_bounded_below = true);

struct Reweighted {
    double value = 0;
    double stderr_ = 0;
    double z_hat = 0;
    double z_stderr = 0;
    double ess = 0;
    std::string warning;  // non-empty when ESS < 10
};

// Self-normalized estimate of E[O e^{-V}] / E[e^{-V}] from Gaussian samples.
Reweighted reweighted_expectation(const std::vector<double>& V, const std::vector<double>& O);

struct SampleBatchSpec {
    int L = 16;
    int L_int = 16;
    WickPolynomial P;
    std::vector<SphereModes> observables;  // Phi(f) is recorded for each
    std::size_t n_samples = 1000;
    std::uint64_t seed = 0;
    int threads = 0;  // 0: thread_count()
    std::size_t batch_size = 256;
};

struct SampleRecord {
    double V = 0;
    std::vector<double> phi;
};

// Draws n_samples fields; batch b uses the generator seeded with split_seed(seed, b), so the output is
// independent of the thread count.
std::vector<SampleRecord> run_samples(const ModelParams& p, const SampleBatchSpec& spec);

// Scale decomposition C = sum_l C_l with C_l = (-Lap + mu^2 g^{2l})^{-1} - (-Lap + mu^2 g^{2l+2})^{-1}.
struct MultiscaleCovariance {
    double gamma = 2;

    // mode weight of C_l (dimensionless, same normalization as mode_variance)
    double slice_weight(const ModelParams& p, int ell, int l) const;
    // sum_{ell < n} C_ell = C - (-Lap + mu^2 gamma^{2n})^{-1}, i.e. cutoff k = gamma^n
    double regularized_weight(const ModelParams& p, int n, int l) const;
    double remainder_weight(const ModelParams& p, int n, int l) const;
    // C^{(k)}(x, x): direct sum well past l ~ sqrt(mu^2 r^2 gamma^{2n}) plus the l^{-3} tail in closed form
    double regularized_diagonal(const ModelParams& p, int n) const;
    // || C^{(k)} - C ||_{L^2(dOmega x dOmega)}
    double remainder_l2(const ModelParams& p, int n) const;
};

// M_ij = C(Theta f_i, f_j), Theta the x0 reflection.
Eigen::MatrixXd reflection_gram(const ModelParams& p, const std::vector<SphereModes>& fns);

struct PositivityReport {
    double lambda_min = 0;
    double gram_norm = 0;
};

// Smallest eigenvalue of the reflected Gram matrix of functions truncated at L. Each must have
// relative L^2 mass below the equator under 1e-12 (ContractError otherwise).
PositivityReport reflection_positivity_gram(const ModelParams& p, const std::vector<SphereModes>& fns, int L);
// relative L^2 mass with x0 < 0
double lower_hemisphere_mass(const SphereModes& f);

// C(delta_0 x h1, delta_0 x h2) for h on the equator circle, antilinear in h1, from the equatorial
// values of the modes up to L, with the slow 1/L convergence of the l-sum extrapolated away.
// Equals oneparticle::hhat_inner.
cplx time_zero_covariance_from_sphere(const ModelParams& p, const oneparticle::TrigPoly& h1,
                                      const oneparticle::TrigPoly& h2, int L);

}  // namespace dsqft::euclid
