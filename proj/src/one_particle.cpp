#include "dsqft/one_particle.hpp"

#include <cmath>
#include <numbers>

#include "dsqft/errors.hpp"

namespace dsqft::oneparticle {

namespace {
constexpr double kPi = std::numbers::pi;
using special::log_gamma;
}  // namespace

ModelParams ModelParams::make(double mu, double r) {
    if (!(mu > 0) || !(r > 0) || !std::isfinite(mu) || !std::isfinite(r))
        throw ContractError("need mu > 0 and r > 0");
    ModelParams p;
    p.mu = mu;
    p.r = r;
    double z2 = mu * mu * r * r;
    if (z2 >= 0.25) {
        p.nu = std::sqrt(z2 - 0.25);
        p.c_nu = 1.0 / (2.0 * std::cosh(kPi * p.nu.real()));
    } else {
        double kappa = std::sqrt(0.25 - z2);
        p.nu = cplx(0.0, kappa);
        p.c_nu = 1.0 / (2.0 * std::cos(kPi * kappa));
    }
    p.s_plus = -0.5 - cplx(0, 1) * p.nu;
    p.s_minus = -0.5 + cplx(0, 1) * p.nu;
    return p;
}

double dispersion(const ModelParams& p, int k) {
    // extended precision: omega(k) omega(k+1) is an exact quadratic in k, and the Casimir combination
    // cancels terms of size k^2, so omega needs to be good to the last bit
    using CL = std::complex<long double>;
    const CL s(p.s_plus.real(), p.s_plus.imag());
    const long double kk = k;
    CL g = special::gamma_ratio_extended(CL(kk / 2), s / 2.0L, -s / 2.0L) *
           special::gamma_ratio_extended(CL(kk / 2), (1.0L - s) / 2.0L, (1.0L + s) / 2.0L);
    return double(((kk + s) * g).real() / p.r);
}

double dispersion_principal(const ModelParams& p, int k) {
    if (p.complementary()) throw ContractError("closed form holds on the principal series only");
    const double nu = p.nu.real();
    double kk = k;
    double a = 2.0 * log_gamma(cplx((kk - 0.5) / 2.0, nu / 2.0)).real();
    double b = 2.0 * log_gamma(cplx((kk + 0.5) / 2.0, nu / 2.0)).real();
    // prefactor 1/2, not 1/4: equals 2 |G((k+3/2+i nu)/2)|^2 / |G((k+1/2+i nu)/2)|^2, the Gamma-ratio value
    return ((kk - 0.5) * (kk - 0.5) + nu * nu) / 2.0 * std::exp(a - b) / p.r;
}

double flat_dispersion(const ModelParams& p, int k) { return std::sqrt(double(k) * k / (p.r * p.r) + p.mu * p.mu); }

ModeSpectrum ModeSpectrum::build(const ModelParams& p, int K) {
    ModeSpectrum m;
    m.params = p;
    m.K = K;
    m.omega.resize(std::size_t(2 * K + 1));
    for (int k = 0; k <= K; ++k) m.omega[std::size_t(K + k)] = m.omega[std::size_t(K - k)] = dispersion(p, k);
    return m;
}

cplx TrigPoly::operator()(double psi) const {
    cplx s = 0;
    for (int k = -K; k <= K; ++k) s += c[std::size_t(k + K)] * std::exp(cplx(0, k * psi));
    return s;
}

TrigPoly TrigPoly::from_function(const std::function<cplx(double)>& f, int K, int N) {
    TrigPoly t;
    t.K = K;
    t.c.assign(std::size_t(2 * K + 1), 0.0);
    std::vector<cplx> v(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) v[std::size_t(j)] = f(2 * kPi * j / N);
    for (int k = -K; k <= K; ++k) {
        cplx s = 0;
        for (int j = 0; j < N; ++j) s += v[std::size_t(j)] * std::exp(cplx(0, -2 * kPi * double(k) * j / N));
        t.c[std::size_t(k + K)] = s / double(N);
    }
    return t;
}

namespace {
// sum_k conj(a_k) b_k m(|k|)
template <class F>
cplx mode_sum(const TrigPoly& a, const TrigPoly& b, F m) {
    int K = std::max(a.K, b.K);
    cplx s = 0;
    for (int k = -K; k <= K; ++k) {
        cplx x = a.coeff(k), y = b.coeff(k);
        if (x == cplx(0) || y == cplx(0)) continue;
        s += std::conj(x) * y * m(std::abs(k));
    }
    return s;
}
}  // namespace

cplx hhat_inner(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2) {
    // ||e^{ik psi}||^2 = 2 pi r in L^2(r dpsi)
    return mode_sum(h1, h2, [&](int k) { return 2 * kPi * p.r / (2.0 * dispersion(p, k)); });
}

cplx hhat_inner_legendre(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2) {
    auto d = p.degree();
    return mode_sum(h1, h2, [&](int k) {
        return cplx(0.5 * p.c_nu * p.r * p.r * 4 * kPi * kPi) * special::legendre_coeff(d, k);
    });
}

cplx hhat_derivative_inner(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2) {
    return mode_sum(h1, h2, [&](int k) { return 2 * kPi * p.r * p.r * p.r * dispersion(p, k) / 2.0; });
}

cplx hhat_derivative_inner_kernel(const ModelParams& p, const TrigPoly& h1, const TrigPoly& h2) {
    auto d = p.degree();
    return mode_sum(h1, h2, [&](int k) {
        return cplx(0.5 * p.c_nu * p.r * p.r * 4 * kPi * kPi) * special::legendre_prime_coeff(d, k);
    });
}

EpsilonOperator::EpsilonOperator(const ModelParams& p, int M) : p_(p), M_(M) {
    if (M < 16) throw DomainError("eps^2 grid needs M >= 16");
    h_ = kPi / M;
    psi_.resize(M);
    cos_.resize(M);
    w_.resize(M);
    sqw_.resize(M);
    face_cos_.resize(M + 1);
    for (int i = 0; i <= M; ++i) face_cos_(i) = (i == 0 || i == M) ? 0.0 : std::cos(-kPi / 2 + i * h_);
    for (int i = 0; i < M; ++i) {
        psi_(i) = -kPi / 2 + (i + 0.5) * h_;
        cos_(i) = std::cos(psi_(i));
        w_(i) = h_ / cos_(i);
        sqw_(i) = std::sqrt(w_(i));
    }
    // W eps^2 as a symmetric tridiagonal matrix; A = W^{-1/2} (W eps^2) W^{-1/2}
    const double m2 = p.mu * p.mu * p.r * p.r;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
    for (int i = 0; i < M; ++i) {
        double diag = (face_cos_(i) + face_cos_(i + 1)) / h_ + m2 * cos_(i) * h_;
        A(i, i) = diag / w_(i);
        if (i + 1 < M) {
            double off = -face_cos_(i + 1) / h_ / (sqw_(i) * sqw_(i + 1));
            A(i, i + 1) = A(i + 1, i) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    lam2_ = es.eigenvalues();
    Q_ = es.eigenvectors();
    lam_.resize(M);
    for (int n = 0; n < M; ++n) {
        if (lam2_(n) < 1e-24) {
            lam_(n) = 1e-12;
            ++floored_;
        } else {
            lam_(n) = std::sqrt(lam2_(n));
        }
    }
}

EpsilonOperator build_epsilon(const ModelParams& p, int M) { return EpsilonOperator(p, M); }

Eigen::VectorXd EpsilonOperator::sample(const RealFn& f) const {
    Eigen::VectorXd v(M_);
    for (int i = 0; i < M_; ++i) v(i) = f(psi_(i));
    return v;
}

Eigen::VectorXd EpsilonOperator::apply_eps2(const Eigen::VectorXd& v) const {
    const double m2 = p_.mu * p_.mu * p_.r * p_.r;
    Eigen::VectorXd out(M_);
    for (int i = 0; i < M_; ++i) {
        double right = i + 1 < M_ ? face_cos_(i + 1) * (v(i + 1) - v(i)) : 0.0;
        double left = i > 0 ? face_cos_(i) * (v(i) - v(i - 1)) : 0.0;
        out(i) = -cos_(i) * (right - left) / (h_ * h_) + m2 * cos_(i) * cos_(i) * v(i);
    }
    return out;
}

double EpsilonOperator::symmetry_defect() const {
    // rebuild W eps^2 column by column from apply_eps2
    Eigen::MatrixXd B(M_, M_);
    for (int j = 0; j < M_; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(M_, j);
        B.col(j) = w_.asDiagonal() * apply_eps2(e);
    }
    return (B - B.transpose()).cwiseAbs().maxCoeff() / B.cwiseAbs().maxCoeff();
}

Eigen::VectorXd EpsilonOperator::spectral(const Eigen::VectorXd& v) const {
    return Q_.transpose() * sqw_.cwiseProduct(v);
}

Eigen::MatrixXcd EpsilonOperator::spectral(const Eigen::MatrixXcd& v) const {
    return Q_.transpose().cast<cplx>() * (sqw_.cast<cplx>().asDiagonal() * v);
}

double EpsilonOperator::form(const std::function<double(double)>& f, const Eigen::VectorXd& v1,
                             const Eigen::VectorXd& v2) const {
    Eigen::VectorXd a = spectral(v1), b = spectral(v2);
    double s = 0;
    for (int n = 0; n < M_; ++n) s += a(n) * f(lam_(n)) * b(n);
    return s;
}

double sharp_time_kernel(double theta, double e) {
    double th = std::abs(std::remainder(theta, 2 * kPi));
    return (std::exp(-th * e) + std::exp(-(2 * kPi - th) * e)) / (2 * e * (-std::expm1(-2 * kPi * e)));
}

double sharp_time_covariance(const EpsilonOperator& eps, double theta, const RealFn& h1, const RealFn& h2) {
    const double r = eps.params().r;
    auto kernel = [theta](double e) { return sharp_time_kernel(theta, e); };
    Eigen::VectorXd c = eps.sample([](double x) { return std::cos(x); });
    Eigen::VectorXd a = c.cwiseProduct(eps.sample(h1)), b = c.cwiseProduct(eps.sample(h2));
    // r <., .>_{L^2(r dpsi/cos)} = r^2 <., .>_{L^2(dpsi/cos)}
    return r * r * eps.form(kernel, a, b);
}

Eigen::MatrixXcd omega_magic_matrix(const EpsilonOperator& eps, int K) {
    const ModelParams& p = eps.params();
    const int n = 2 * K + 1, M = eps.size();
    const Eigen::VectorXd& psi = eps.grid();
    // a: e_k on I+, b: e_k on I- pulled back by psi -> pi - psi; normalized in L^2(r dpsi)
    const double norm = 1.0 / std::sqrt(2 * kPi * p.r);
    Eigen::MatrixXcd a(M, n), b(M, n);
    for (int j = 0; j < n; ++j) {
        int k = j - K;
        for (int i = 0; i < M; ++i) {
            a(i, j) = norm * std::exp(cplx(0, k * psi(i)));
            b(i, j) = norm * std::exp(cplx(0, k * (kPi - psi(i))));
        }
    }
    Eigen::MatrixXcd X = eps.spectral(a), Y = eps.spectral(b);
    Eigen::VectorXcd F(M), G(M);
    for (int m = 0; m < M; ++m) {
        double e = eps.eps()(m);
        F(m) = e / std::tanh(kPi * e);
        G(m) = e / std::sinh(kPi * e);
    }
    // r int conj(g) (r cos)^{-1} X dpsi = <g, X>_{L^2(dpsi/cos)}
    Eigen::MatrixXcd B = X.adjoint() * F.asDiagonal() * X - X.adjoint() * G.asDiagonal() * Y +
                         Y.adjoint() * F.asDiagonal() * Y - Y.adjoint() * G.asDiagonal() * X;
    return B;
}

double omega_magic_residual(const EpsilonOperator& eps, int K) {
    const ModelParams& p = eps.params();
    const int n = 2 * K + 1;
    Eigen::MatrixXcd B = omega_magic_matrix(eps, K);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    double amax = 0;
    for (int j = 0; j < n; ++j) {
        A(j, j) = dispersion(p, j - K);
        amax = std::max(amax, A(j, j).real());
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A - B);
    return svd.singularValues()(0) / amax;
}

double commutator_kernel(const EpsilonOperator& eps, double t, const RealFn& h1, const RealFn& h2) {
    Eigen::VectorXd c = eps.sample([](double x) { return std::cos(x); });
    Eigen::VectorXd a = c.cwiseProduct(eps.sample(h1)), b = c.cwiseProduct(eps.sample(h2));
    return -eps.form([t](double e) { return std::sin(e * t) / e; }, a, b) / eps.params().r;
}

namespace {
// spectral coordinates of K_inf(phi, pi) = cos pi - i eps phi
Eigen::VectorXcd k_infinity(const EpsilonOperator& eps, const CauchyData& f) {
    Eigen::VectorXd c = eps.sample([](double x) { return std::cos(x); });
    Eigen::VectorXd pi_data = c.cwiseProduct(eps.sample(f.pi));
    Eigen::VectorXd pi_part = eps.spectral(pi_data);
    Eigen::VectorXd phi_part = eps.spectral(eps.sample(f.phi));
    Eigen::VectorXcd out(eps.size());
    for (int n = 0; n < eps.size(); ++n) out(n) = cplx(pi_part(n), -eps.eps()(n) * phi_part(n));
    return out;
}

// F(t) = sum conj(a) b (1+rho) e^{i t e} + conj(b) a rho e^{-i t e}; the j-part lives on I- where eps = -|eps|
cplx two_point(const EpsilonOperator& eps, cplx t, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
               double beta_state) {
    const double r = eps.params().r;
    cplx s = 0;
    for (int n = 0; n < eps.size(); ++n) {
        double e = eps.eps()(n);
        // (1 + rho) e^{ite} and rho e^{-ite}, written so that Im t up to beta never overflows
        double den = -std::expm1(-beta_state * e);
        cplx up = std::exp(cplx(0, 1) * t * e) / den;
        cplx down = std::exp(-cplx(0, 1) * t * e - beta_state * e) / den;
        s += (std::conj(a(n)) * b(n) * up + std::conj(b(n)) * a(n) * down) / (2 * e);
    }
    return r * s;  // <., (2|eps|)^{-1} .> in L^2(I+, r dpsi/cos)
}
}  // namespace

cplx kms_two_point(const EpsilonOperator& eps, cplx t, const CauchyData& f, const CauchyData& g, double beta_state) {
    return two_point(eps, t, k_infinity(eps, f), k_infinity(eps, g), beta_state);
}

double kms_residual(const EpsilonOperator& eps, double t, const CauchyData& f, const CauchyData& g,
                    double beta_check, double beta_state) {
    Eigen::VectorXcd a = k_infinity(eps, f), b = k_infinity(eps, g);
    cplx lhs = two_point(eps, cplx(t, beta_check), a, b, beta_state);
    cplx rhs = std::conj(two_point(eps, t, a, b, beta_state));
    double scale = std::sqrt(std::abs(two_point(eps, 0.0, a, a, beta_state)) * std::abs(two_point(eps, 0.0, b, b, beta_state)));
    return std::abs(lhs - rhs) / scale;
}

Eigen::MatrixXcd k0_modes(int K) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
    for (int k = -K; k <= K; ++k) m(k + K, k + K) = double(k);
    return m;
}

Eigen::MatrixXcd boost_generator_modes(const ModelParams& p, int K) {
    if (K < 2) throw ContractError("boost generator needs K >= 2");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * K + 1, 2 * K + 1);
    for (int k = -K; k < K; ++k) {
        double a = 0.5 * p.r * std::sqrt(dispersion(p, k) * dispersion(p, k + 1));
        m(k + K, k + 1 + K) = m(k + 1 + K, k + K) = a;
    }
    return m;
}

Eigen::MatrixXcd l2_modes(const ModelParams& p, int K) {
    Eigen::MatrixXcd k0 = k0_modes(K), l1 = boost_generator_modes(p, K);
    return cplx(0, -1) * (k0 * l1 - l1 * k0);
}

}  // namespace dsqft::oneparticle
