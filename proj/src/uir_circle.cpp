#include "dsqft/uir_circle.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "dsqft/errors.hpp"
#include "dsqft/special_functions.hpp"

namespace dsqft::uir {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr cplx kI(0, 1);

// FFTW planning is not thread safe; execution on new-array plans is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

std::vector<cplx> dft(const std::vector<cplx>& in, int sign) {
    const int n = int(in.size());
    std::vector<cplx> out(in.size());
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft_1d(n, src, dst, sign, FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

int mode_of(int idx, int n) { return idx < n / 2 ? idx : idx - n; }

// multiply the coefficients by f(k)
CircleFunction fourier_multiply(const CircleFunction& h, const std::function<cplx(int)>& f) {
    std::vector<cplx> c = h.coefficients();
    const int n = int(c.size());
    for (int i = 0; i < n; ++i) {
        int k = mode_of(i, n);
        // the Nyquist mode stands for cos(N/2 a); treat it as the average of +-N/2
        c[std::size_t(i)] *= (i == n / 2) ? 0.5 * (f(k) + f(-k)) : f(k);
    }
    return CircleFunction::from_coefficients(c);
}

CircleFunction derivative(const CircleFunction& h) {
    return fourier_multiply(h, [n = h.size()](int k) { return std::abs(k) == n / 2 ? cplx(0) : cplx(0, k); });
}

group::Vec3 base_point(double a) { return {1.0, std::sin(a), -std::cos(a)}; }

const group::Mat3& generator_matrix(Generator which) {
    switch (which) {
        case Generator::K0: return group::gen_K0();
        case Generator::L1: return group::gen_L1();
        case Generator::L2: return group::gen_L2();
    }
    return group::gen_K0();
}

group::GroupElement one_parameter(Generator which, double t) {
    switch (which) {
        case Generator::K0: return group::rotate0(t);
        case Generator::L1: return group::boost1(t);
        case Generator::L2: return group::boost2(t);
    }
    return group::rotate0(t);
}
}  // namespace

SeriesLabel SeriesLabel::principal(double nu, int parity) {
    if (!std::isfinite(nu)) throw ContractError("nu must be finite");
    if (parity != 1 && parity != -1) throw ContractError("parity must be +1 or -1");
    return {cplx(nu, 0.0), parity};
}

SeriesLabel SeriesLabel::complementary(double kappa, int parity) {
    if (!(std::abs(kappa) > 0 && std::abs(kappa) < 0.5)) throw ContractError("complementary series needs 0 < |kappa| < 1/2");
    if (parity != 1 && parity != -1) throw ContractError("parity must be +1 or -1");
    return {cplx(0.0, kappa), parity};
}

double CircleFunction::angle(int j) const { return 2 * kPi * j / size(); }

CircleFunction CircleFunction::from_function(const std::function<cplx(double)>& f, int N) {
    if (!power_of_two(N)) throw ContractError("grid size must be a power of two");
    CircleFunction h;
    h.values.resize(std::size_t(N));
    for (int j = 0; j < N; ++j) h.values[std::size_t(j)] = f(2 * kPi * j / N);
    return h;
}

std::vector<cplx> CircleFunction::coefficients() const {
    if (!power_of_two(size())) throw ContractError("grid size must be a power of two");
    std::vector<cplx> c = dft(values, FFTW_FORWARD);
    const double s = 1.0 / size();
    for (auto& x : c) x *= s;
    return c;
}

CircleFunction CircleFunction::from_coefficients(const std::vector<cplx>& c) {
    if (!power_of_two(int(c.size()))) throw ContractError("grid size must be a power of two");
    return {dft(c, FFTW_BACKWARD)};
}

std::vector<cplx> CircleFunction::evaluate(const std::vector<double>& alphas) const {
    const std::vector<cplx> c = coefficients();
    const int n = size(), half = n / 2;
    std::vector<cplx> out(alphas.size());
    for (std::size_t j = 0; j < alphas.size(); ++j) {
        const double a = alphas[j];
        const cplx step = std::exp(kI * a);
        // sum_{k=1}^{half-1} (c_k z^k + c_{-k} z^{-k}) by Horner in z and 1/z
        cplx pos = 0, neg = 0;
        const cplx inv = std::conj(step);
        for (int k = half - 1; k >= 1; --k) {
            pos = (pos + c[std::size_t(k)]) * step;
            neg = (neg + c[std::size_t(n - k)]) * inv;
        }
        out[j] = c[0] + pos + neg + c[std::size_t(half)] * std::cos(half * a);
    }
    return out;
}

cplx CircleFunction::evaluate(double alpha) const { return evaluate(std::vector<double>{alpha})[0]; }

double CircleFunction::sup_distance(const CircleFunction& other) const {
    if (other.size() != size()) throw ContractError("grid sizes differ");
    double m = 0;
    for (int j = 0; j < size(); ++j) m = std::max(m, std::abs(values[std::size_t(j)] - other.values[std::size_t(j)]));
    return m;
}

CircleFunction act(const SeriesLabel& label, const group::GroupElement& g, const CircleFunction& h) {
    if (!g.proper_orthochronous()) throw ContractError("act needs a proper orthochronous element");
    const int n = h.size();
    const group::GroupElement ginv = g.inverse();
    std::vector<double> alphas(static_cast<std::size_t>(n));
    std::vector<cplx> factor(static_cast<std::size_t>(n));
    // h is the restriction of H(p0 p(a)) = p0^{-1/2 - i nu} h(a) and u(g)H = H(g^{-1} .). Here
    // g^{-1} p(a') = e^{-t} p(a), so the weight is e^{(1/2 + i nu) t} in this sign of t.
    const cplx weight = 0.5 + kI * label.nu;
    for (int j = 0; j < n; ++j) {
        auto f = group::iwasawa_decompose(ginv * group::rotate0(h.angle(j)));
        alphas[std::size_t(j)] = f.alpha;
        double sign = (f.k % 2 && label.parity < 0) ? -1.0 : 1.0;
        factor[std::size_t(j)] = sign * std::exp(weight * f.t);
    }
    std::vector<cplx> v = h.evaluate(alphas);
    for (int j = 0; j < n; ++j) v[std::size_t(j)] *= factor[std::size_t(j)];
    return {v};
}

double principal_norm(const CircleFunction& h) {
    double s = 0;
    for (const cplx& x : h.values) s += std::norm(x);
    return std::sqrt(s / h.size());
}

cplx intertwiner_multiplier(cplx nu, int k) {
    const cplx inu = kI * nu;
    if (std::abs(inu.imag()) < 1e-15 && inu.real() >= -1e-15 &&
        std::abs(2 * inu.real() - std::round(2 * inu.real())) < 1e-12)
        throw PoleError("intertwiner pole at i nu in {0, 1/2, 1, ...}");
    const double kk = std::abs(k);
    return special::gamma_ratio(kk, 0.5 + inu, 0.5 - inu) * special::gamma_ratio(0.0, 0.5 - inu, 0.5 + inu);
}

cplx rho_tilde(cplx nu, int k) { return std::sqrt(2 * kPi) * intertwiner_multiplier(nu, k); }

cplx intertwiner_kernel(cplx nu, double alpha) {
    const cplx inu = kI * nu;
    cplx pref = std::exp(special::log_gamma(0.5 - inu) - special::log_gamma(0.5) - special::log_gamma(-inu));
    double s2 = std::pow(std::sin(0.5 * alpha), 2);
    return pref * std::pow(s2, -0.5 - inu) * kPi;
}

double complementary_norm(const SeriesLabel& label, const CircleFunction& h) {
    if (!label.is_complementary()) throw DomainError("complementary norm on the principal branch");
    const cplx nu = -label.nu;
    std::vector<cplx> c = h.coefficients();
    const int n = h.size();
    double s = 0;
    for (int i = 0; i < n; ++i) s += std::norm(c[std::size_t(i)]) * intertwiner_multiplier(nu, mode_of(i, n)).real();
    return std::sqrt(s);
}

double norm(const SeriesLabel& label, const CircleFunction& h) {
    return label.is_complementary() ? complementary_norm(label, h) : principal_norm(h);
}

CircleFunction intertwine(const SeriesLabel& label, const CircleFunction& h) {
    return fourier_multiply(h, [nu = label.nu](int k) { return intertwiner_multiplier(nu, k); });
}

CircleFunction space_reflect(const CircleFunction& h) {
    // shift by pi is a pure phase (-1)^k; N is even so pi is a grid shift of N/2
    const int n = h.size();
    CircleFunction out = h;
    for (int j = 0; j < n; ++j) out.values[std::size_t(j)] = h.values[std::size_t((j + n / 2) % n)];
    return out;
}

CircleFunction time_reflect(const SeriesLabel& label, const CircleFunction& h) {
    CircleFunction g = label.is_principal() ? intertwine(label, h) : h;
    g = space_reflect(g);
    for (auto& x : g.values) x = std::conj(x);
    return g;
}

CircleFunction generator_apply(const SeriesLabel& label, Generator which, const CircleFunction& h) {
    const group::Mat3& X = generator_matrix(which);
    const int n = h.size();
    CircleFunction dh = derivative(h);
    const cplx weight = 0.5 + kI * label.nu;
    CircleFunction out = h;
    for (int j = 0; j < n; ++j) {
        const double a = h.angle(j);
        // exp(-tX) p(a) = e^{-t_I} p(alpha(t)): d t_I = (X p)_0, d alpha = cos a v1' + sin a v2' with v' = -X p
        group::Vec3 xp = X * base_point(a);
        double tdot = xp(0);
        double adot = -(std::cos(a) * xp(1) + std::sin(a) * xp(2));
        out.values[std::size_t(j)] = weight * tdot * h.values[std::size_t(j)] + adot * dh.values[std::size_t(j)];
    }
    return out;
}

double generator_residual(const SeriesLabel& label, Generator which, const CircleFunction& h, double dt) {
    CircleFunction plus = act(label, one_parameter(which, dt), h);
    CircleFunction minus = act(label, one_parameter(which, -dt), h);
    CircleFunction d = generator_apply(label, which, h);
    double m = 0;
    for (int j = 0; j < h.size(); ++j) {
        cplx fd = (plus.values[std::size_t(j)] - minus.values[std::size_t(j)]) / (2 * dt);
        m = std::max(m, std::abs(fd - d.values[std::size_t(j)]));
    }
    return m;
}

double casimir_residual(const SeriesLabel& label, const CircleFunction& h) {
    auto twice = [&](Generator w) { return generator_apply(label, w, generator_apply(label, w, h)); };
    CircleFunction k2 = twice(Generator::K0), l1 = twice(Generator::L1), l2 = twice(Generator::L2);
    // L = i D, so -K0^2 + L1^2 + L2^2 = D_K^2 - D_1^2 - D_2^2
    const double c = label.casimir();
    double m = 0, scale = 0;
    for (int j = 0; j < h.size(); ++j) {
        std::size_t i = std::size_t(j);
        cplx v = k2.values[i] - l1.values[i] - l2.values[i] - c * h.values[i];
        m = std::max(m, std::abs(v));
        scale = std::max(scale, std::abs(h.values[i]));
    }
    return m / scale;
}

Eigen::VectorXd lightcone_casimir_spectrum(int n, double umax) {
    if (n < 8 || !(umax > 0)) throw ContractError("need n >= 8 and umax > 0");
    // nodes u_i = -umax + i h, i = 0..n+1, with g = 0 at i = 0 and n+1
    const double h = 2 * umax / (n + 1);
    auto p = [&](int i) { return std::exp(-umax + i * h); };
    // quadratic form sum over faces of p_f^2 |g_{i+1} - g_i|^2 / (p_{i+1} - p_i), p_f the geometric mean,
    // against the lumped mass w_i = (p_{i+1} - p_{i-1}) / 2
    Eigen::VectorXd w(n), inv_sqrt_w(n);
    for (int i = 1; i <= n; ++i) {
        w(i - 1) = 0.5 * (p(i + 1) - p(i - 1));
        inv_sqrt_w(i - 1) = 1.0 / std::sqrt(w(i - 1));
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int f = 0; f <= n; ++f) {
        // face between nodes f and f+1
        double c = p(f) * p(f + 1) / (p(f + 1) - p(f));
        int a = f - 1, b = f;  // matrix indices of nodes f and f+1
        if (a >= 0) A(a, a) += c;
        if (b < n) A(b, b) += c;
        if (a >= 0 && b < n) {
            A(a, b) -= c;
            A(b, a) -= c;
        }
    }
    Eigen::MatrixXd S = inv_sqrt_w.asDiagonal() * A * inv_sqrt_w.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double flat_contraction_error(double m, double r, double t, double q, double p1) {
    if (!(m > 0) || !(r > 0)) throw ContractError("need m > 0 and r > 0");
    const double E = std::hypot(p1, m);
    // x = L1(t/r)(q^2/2r, q, r - q^2/2r)
    const double ch = std::cosh(t / r), sh = std::sinh(t / r), a = q * q / (2 * r);
    const double x0 = ch * a + sh * (r - a);
    const double x1 = q;
    // x2 - r = r (cosh - 1) + a (sinh - cosh), written without cancellation
    const double x2_minus_r = 2 * r * std::pow(std::sinh(t / (2 * r)), 2) - a * std::exp(-t / r);
    // w - 1 = (-x.p - m r) / (m r) = (-x0 E + x1 p1 + (x2 - r) m) / (m r)
    const double wm1 = (-x0 * E + x1 * p1 + x2_minus_r * m) / (m * r);
    const cplx lhs = std::exp(cplx(-0.5, -m * r) * std::log1p(wm1));
    const cplx rhs = std::exp(kI * (t * E - q * p1));
    return std::abs(lhs - rhs);
}

}  // namespace dsqft::uir
