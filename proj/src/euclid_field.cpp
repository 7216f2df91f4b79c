#include "dsqft/euclid_field.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_legendre.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "dsqft/errors.hpp"
#include "dsqft/special_functions.hpp"

namespace dsqft::euclid {

namespace {

constexpr double kPi = std::numbers::pi;

// normalized associated Legendre values sqrt((2l+1)/4pi (l-m)!/(l+m)!) P_l^m(x), Condon-Shortley phase
struct LegendreTable {
    int L;
    std::vector<double> v;
    LegendreTable(int L_, double x) : L(L_), v(gsl_sf_legendre_array_n(std::size_t(L_))) {
        gsl_sf_legendre_array_e(GSL_SF_LEGENDRE_SPHARM, std::size_t(L), x, -1.0, v.data());
    }
    double operator()(int l, int m) const { return v[gsl_sf_legendre_array_index(std::size_t(l), std::size_t(m))]; }
};

struct Angles {
    double x, psi;
};

Angles angles_of(const Vec3& unit) {
    const double n = unit.norm();
    return {std::clamp(unit(0) / n, -1.0, 1.0), std::atan2(unit(2), unit(1))};
}

const SphereGrid& cached_grid(int band, int L, double lo, double hi) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, double, double>, std::unique_ptr<SphereGrid>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{band, L, lo, hi}];
    if (!slot) slot = std::make_unique<SphereGrid>(band, L, lo, hi);
    return *slot;
}

void draw_modes(std::mt19937_64& rng, const ModelParams& p, SphereModes& out) {
    std::normal_distribution<double> gauss;
    for (int l = 0; l <= out.L; ++l) {
        const double sd = std::sqrt(mode_variance(p, l));
        out.a[SphereModes::index(l, 0)] = sd * gauss(rng);
        for (int m = 1; m <= l; ++m) {
            double re = gauss(rng), im = gauss(rng);
            out.set(l, m, sd * std::sqrt(0.5) * cplx(re, im));
        }
    }
}

double v_on_grid(const SphereGrid& grid, const SphereModes& modes, const WickPolynomial& P, double c, double r) {
    Eigen::MatrixXd vals = grid.synthesize(modes);
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals.data()[i] = P(vals.data()[i], c);
    return r * r * grid.integrate(vals);
}

}  // namespace

Vec3 sphere_point(double r, double theta, double psi) {
    return r * Vec3(std::cos(theta), std::sin(theta) * std::cos(psi), std::sin(theta) * std::sin(psi));
}

double mode_variance(const ModelParams& p, int l) {
    if (l < 0) throw ContractError("mode index l must be >= 0");
    return 1.0 / (double(l) * (l + 1) + p.mu * p.mu * p.r * p.r);
}

double sphere_covariance(const ModelParams& p, const Vec3& x, const Vec3& y) {
    const double r2 = p.r * p.r;
    if (std::abs(x.squaredNorm() - r2) > 1e-9 * r2 || std::abs(y.squaredNorm() - r2) > 1e-9 * r2)
        throw ContractError("points must lie on the sphere of radius r");
    const double u = std::clamp(x.dot(y) / r2, -1.0, 1.0);
    if (u >= 1.0 - 1e-15) throw DomainError("covariance diverges at coincident points");
    thread_local std::unique_ptr<special::LegendreSeries> series;
    const auto d = p.degree();
    if (!series || series->degree().s != d.s) series = std::make_unique<special::LegendreSeries>(d, 256);
    return 0.5 * p.c_nu * series->value(-u).real();
}

SphereModes SphereModes::zero(int L) {
    if (L < 0) throw ContractError("band limit must be >= 0");
    return {L, std::vector<cplx>(std::size_t((L + 1) * (L + 1)), 0.0)};
}

void SphereModes::set(int l, int m, cplx v) {
    if (m == 0) {
        a[index(l, 0)] = v.real();
        return;
    }
    const int am = std::abs(m);
    const cplx pos = m > 0 ? v : (am % 2 ? -1.0 : 1.0) * std::conj(v);
    a[index(l, am)] = pos;
    a[index(l, -am)] = (am % 2 ? -1.0 : 1.0) * std::conj(pos);
}

double SphereModes::reality_defect() const {
    double d = 0;
    for (int l = 0; l <= L; ++l)
        for (int m = 0; m <= l; ++m)
            d = std::max(d, std::abs(a[index(l, -m)] - (m % 2 ? -1.0 : 1.0) * std::conj(a[index(l, m)])));
    return d;
}

SphereModes SphereModes::truncated(int L2) const {
    SphereModes out = zero(L2);
    for (int l = 0; l <= std::min(L, L2); ++l)
        for (int m = -l; m <= l; ++m) out.a[index(l, m)] = a[index(l, m)];
    return out;
}

double SphereModes::operator()(const Vec3& unit) const {
    const auto [x, psi] = angles_of(unit);
    LegendreTable P(L, x);
    double v = 0;
    for (int m = 0; m <= L; ++m) {
        cplx s = 0;
        for (int l = m; l <= L; ++l) s += P(l, m) * a[index(l, m)];
        v += (m == 0 ? 1.0 : 2.0) * (s * std::exp(cplx(0, m * psi))).real();
    }
    return v;
}

double mode_pairing(const SphereModes& f, const SphereModes& g) {
    const int L = std::min(f.L, g.L);
    double s = 0;
    for (int l = 0; l <= L; ++l) {
        s += (std::conj(f.a[SphereModes::index(l, 0)]) * g.a[SphereModes::index(l, 0)]).real();
        for (int m = 1; m <= l; ++m)
            s += 2 * (std::conj(f.a[SphereModes::index(l, m)]) * g.a[SphereModes::index(l, m)]).real();
    }
    return s;
}

SphereGrid::SphereGrid(int band, int L, double x_lo, double x_hi) : L_(L), n_psi_(band + 1) {
    if (band < 0 || L < 0 || L > band) throw ContractError("grid needs 0 <= L <= band");
    const int n_theta = band / 2 + 1;
    gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(std::size_t(n_theta));
    x_.resize(n_theta);
    w_.resize(n_theta);
    for (int i = 0; i < n_theta; ++i) gsl_integration_glfixed_point(x_lo, x_hi, std::size_t(i), &x_(i), &w_(i), t);
    gsl_integration_glfixed_table_free(t);

    plm_.resize(std::size_t(L + 1));
    for (int m = 0; m <= L; ++m) plm_[std::size_t(m)].resize(n_theta, L - m + 1);
    for (int i = 0; i < n_theta; ++i) {
        LegendreTable P(L, x_(i));
        for (int m = 0; m <= L; ++m)
            for (int l = m; l <= L; ++l) plm_[std::size_t(m)](i, l - m) = P(l, m);
    }
    phase_.resize(L + 1, n_psi_);
    for (int m = 0; m <= L; ++m)
        for (int j = 0; j < n_psi_; ++j) phase_(m, j) = std::exp(cplx(0, m * psi(j)));
}

double SphereGrid::psi(int j) const { return 2 * kPi * j / n_psi_; }

Vec3 SphereGrid::unit(int i, int j) const {
    const double x = x_(i), s = std::sqrt(std::max(0.0, 1 - x * x));
    return {x, s * std::cos(psi(j)), s * std::sin(psi(j))};
}

Eigen::MatrixXd SphereGrid::synthesize(const SphereModes& f) const {
    if (f.L > L_) throw ContractError("function band exceeds the grid's L");
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(rings(), L_ + 1);
    for (int m = 0; m <= f.L; ++m) {
        Eigen::VectorXcd am(f.L - m + 1);
        for (int l = m; l <= f.L; ++l) am(l - m) = f.a[SphereModes::index(l, m)];
        S.col(m) = plm_[std::size_t(m)].leftCols(f.L - m + 1).cast<cplx>() * am;
        if (m > 0) S.col(m) *= 2.0;
    }
    return (S * phase_).real();
}

SphereModes SphereGrid::analyze(const Eigen::MatrixXd& values) const {
    if (values.rows() != rings() || values.cols() != n_psi_) throw ContractError("value array does not match the grid");
    Eigen::MatrixXcd G = values.cast<cplx>() * phase_.adjoint() * (2 * kPi / n_psi_);
    SphereModes out = SphereModes::zero(L_);
    for (int m = 0; m <= L_; ++m) {
        Eigen::VectorXcd wg = G.col(m).cwiseProduct(w_.cast<cplx>());
        Eigen::VectorXcd c = plm_[std::size_t(m)].transpose().cast<cplx>() * wg;
        for (int l = m; l <= L_; ++l) out.set(l, m, c(l - m));
    }
    return out;
}

double SphereGrid::integrate(const Eigen::MatrixXd& values) const {
    return w_.dot(values.rowwise().sum()) * 2 * kPi / n_psi_;
}

SphereModes project(const std::function<double(const Vec3&)>& f, int L) {
    const SphereGrid& grid = cached_grid(2 * L, L, -1.0, 1.0);
    Eigen::MatrixXd vals(grid.rings(), grid.columns());
    for (int i = 0; i < grid.rings(); ++i)
        for (int j = 0; j < grid.columns(); ++j) vals(i, j) = f(grid.unit(i, j));
    return grid.analyze(vals);
}

SphereModes vmf_bump(const Vec3& centre, double kappa, int L) {
    if (!(kappa > 0) || kappa > 700) throw ContractError("bump concentration must be in (0, 700]");
    const auto [x, psi] = angles_of(centre);
    // e^{-kappa} i_l(kappa); past the underflow threshold the coefficient is 0
    static std::once_flag quiet;
    std::call_once(quiet, [] { gsl_set_error_handler_off(); });
    std::vector<double> il(std::size_t(L + 1), 0.0);
    for (int l = 0; l <= L; ++l) {
        gsl_sf_result res;
        if (gsl_sf_bessel_il_scaled_e(l, kappa, &res) != GSL_SUCCESS) break;
        il[std::size_t(l)] = res.val;
    }
    LegendreTable P(L, x);
    SphereModes out = SphereModes::zero(L);
    for (int l = 0; l <= L; ++l) {
        const double lam = 4 * kPi * il[std::size_t(l)];
        for (int m = 0; m <= l; ++m) out.set(l, m, lam * P(l, m) * std::exp(cplx(0, -m * psi)));
    }
    return out;
}

SphereModes rotate(const SphereModes& f, const Eigen::Matrix3d& R) {
    const Eigen::Matrix3d Rt = R.transpose();
    return project([&](const Vec3& u) { return f(Rt * u); }, f.L);
}

SphereModes reflect_time(const SphereModes& f) {
    SphereModes out = f;
    for (int l = 0; l <= f.L; ++l)
        for (int m = -l; m <= l; ++m)
            if ((l + m) % 2) out.a[SphereModes::index(l, m)] *= -1.0;
    return out;
}

double covariance(const ModelParams& p, const SphereModes& f, const SphereModes& g) {
    const int L = std::min(f.L, g.L);
    double s = 0;
    for (int l = 0; l <= L; ++l) {
        double row = (std::conj(f.a[SphereModes::index(l, 0)]) * g.a[SphereModes::index(l, 0)]).real();
        for (int m = 1; m <= l; ++m)
            row += 2 * (std::conj(f.a[SphereModes::index(l, m)]) * g.a[SphereModes::index(l, m)]).real();
        s += mode_variance(p, l) * row;
    }
    return std::pow(p.r, 4) * s;
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int thread_count() {
    if (const char* env = std::getenv("DSQFT_THREADS")) {
        char* end = nullptr;
        long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return int(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

HarmonicField sample_field(const ModelParams& p, int L, std::uint64_t seed, std::uint64_t stream) {
    HarmonicField f{SphereModes::zero(L), p, seed, stream};
    std::mt19937_64 rng(split_seed(seed, stream));
    draw_modes(rng, p, f.modes);
    return f;
}

std::vector<double> evaluate_field(const HarmonicField& field, const std::vector<Vec3>& points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& x : points) out.push_back(field.modes(x));
    return out;
}

double smeared(const HarmonicField& field, const SphereModes& f) {
    return field.params.r * field.params.r * mode_pairing(f, field.modes);
}

double wick_power(double x, int n, double c) {
    if (n < 0) throw ContractError("Wick power needs n >= 0");
    if (c < 0) throw ContractError("Wick constant must be >= 0");
    // He_n recursion in the scaled form :x^{k+1}: = x :x^k: - k c :x^{k-1}:
    double prev = 1, cur = x;
    if (n == 0) return 1;
    for (int k = 1; k < n; ++k) {
        double next = x * cur - k * c * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

int WickPolynomial::degree() const {
    for (int n = int(coeffs.size()) - 1; n >= 0; --n)
        if (coeffs[std::size_t(n)] != 0.0) return n;
    return 0;
}

bool WickPolynomial::bounded_below() const {
    const int d = degree();
    if (d == 0) return true;
    return d % 2 == 0 && coeffs[std::size_t(d)] > 0;
}

WickPolynomial WickPolynomial::parse(const std::string& csv) {
    // comma-separated coefficients of :phi^0:, :phi^2:, :phi^4:, ...
    WickPolynomial P;
    std::stringstream ss(csv);
    std::string item;
    int n = 0;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw ContractError("bad polynomial coefficient '" + item + "'");
        }
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw ContractError("bad polynomial coefficient '" + item + "'");
        P.coeffs.resize(std::size_t(n + 1), 0.0);
        P.coeffs[std::size_t(n)] = v;
        n += 2;
    }
    return P;
}

double WickPolynomial::operator()(double x, double c) const {
    double s = 0;
    for (std::size_t n = 0; n < coeffs.size(); ++n)
        if (coeffs[n] != 0.0) s += coeffs[n] * wick_power(x, int(n), c);
    return s;
}

double wick_constant(const ModelParams& p, int L) {
    double s = 0;
    for (int l = 0; l <= L; ++l) s += (2 * l + 1) * mode_variance(p, l);
    return s / (4 * kPi);
}

double interaction_V(const HarmonicField& field, const WickPolynomial& P, int L_int, bool require_bounded_below) {
    if (L_int > field.modes.L || L_int < 0) throw ContractError("interaction cutoff exceeds the field's band limit");
    if (require_bounded_below && !P.bounded_below()) throw ContractError("polynomial is not bounded below");
    if (P.degree() == 0 && (P.coeffs.empty() || P.coeffs[0] == 0.0)) return 0.0;
    const SphereGrid& grid = cached_grid(std::max(P.degree(), 1) * L_int, L_int, -1.0, 1.0);
    return v_on_grid(grid, field.modes.truncated(L_int), P, wick_constant(field.params, L_int), field.params.r);
}

Reweighted reweighted_expectation(const std::vector<double>& V, const std::vector<double>& O) {
    if (V.size() != O.size()) throw ContractError("weights and observable differ in length");
    if (V.size() < 1000) throw ContractError("reweighting needs at least 1000 samples");
    const double n = double(V.size());
    const double vmin = *std::min_element(V.begin(), V.end());
    double sw = 0, sw2 = 0, swo = 0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        double w = std::exp(-(V[i] - vmin));
        sw += w;
        sw2 += w * w;
        swo += w * O[i];
    }
    Reweighted r;
    r.value = swo / sw;
    double var = 0;
    for (std::size_t i = 0; i < V.size(); ++i) {
        double w = std::exp(-(V[i] - vmin));
        var += w * w * (O[i] - r.value) * (O[i] - r.value);
    }
    r.stderr_ = std::sqrt(var) / sw;
    const double scale = std::exp(-vmin);
    r.z_hat = sw / n * scale;
    r.z_stderr = std::sqrt(std::max(0.0, sw2 / n - (sw / n) * (sw / n)) / n) * scale;
    r.ess = sw * sw / sw2;
    if (r.ess < 10) {
        std::ostringstream msg;
        msg << "effective sample size " << r.ess << " below 10; estimate unreliable";
        r.warning = msg.str();
    }
    return r;
}

std::vector<SampleRecord> run_samples(const ModelParams& p, const SampleBatchSpec& spec) {
    if (spec.L_int > spec.L || spec.L_int < 0) throw ContractError("interaction cutoff exceeds the field's band limit");
    if (!spec.P.bounded_below()) throw ContractError("polynomial is not bounded below");
    if (spec.batch_size == 0) throw ContractError("batch size must be positive");
    const bool interacting = !(spec.P.degree() == 0 && (spec.P.coeffs.empty() || spec.P.coeffs[0] == 0.0));
    const SphereGrid* grid = interacting ? &cached_grid(std::max(spec.P.degree(), 1) * spec.L_int, spec.L_int, -1.0, 1.0) : nullptr;
    const double c = wick_constant(p, spec.L_int);

    std::vector<SampleRecord> out(spec.n_samples);
    const std::size_t n_batches = (spec.n_samples + spec.batch_size - 1) / spec.batch_size;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        SphereModes modes = SphereModes::zero(spec.L);
        for (std::size_t b = next++; b < n_batches; b = next++) {
            std::mt19937_64 rng(split_seed(spec.seed, b));
            const std::size_t end = std::min(spec.n_samples, (b + 1) * spec.batch_size);
            for (std::size_t i = b * spec.batch_size; i < end; ++i) {
                draw_modes(rng, p, modes);
                SampleRecord& rec = out[i];
                rec.V = interacting ? v_on_grid(*grid, modes.truncated(spec.L_int), spec.P, c, p.r) : 0.0;
                rec.phi.resize(spec.observables.size());
                for (std::size_t k = 0; k < spec.observables.size(); ++k)
                    rec.phi[k] = p.r * p.r * mode_pairing(spec.observables[k], modes);
            }
        }
    };
    const int nt = std::max(1, std::min<int>(spec.threads > 0 ? spec.threads : thread_count(), int(n_batches)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return out;
}

double MultiscaleCovariance::slice_weight(const ModelParams& p, int ell, int l) const {
    const double ll = double(l) * (l + 1), m2 = p.mu * p.mu * p.r * p.r;
    return 1.0 / (ll + m2 * std::pow(gamma, 2 * ell)) - 1.0 / (ll + m2 * std::pow(gamma, 2 * ell + 2));
}

double MultiscaleCovariance::remainder_weight(const ModelParams& p, int n, int l) const {
    return 1.0 / (double(l) * (l + 1) + p.mu * p.mu * p.r * p.r * std::pow(gamma, 2 * n));
}

double MultiscaleCovariance::regularized_weight(const ModelParams& p, int n, int l) const {
    double s = 0;
    for (int ell = 0; ell < n; ++ell) s += slice_weight(p, ell, l);
    return s;
}

double MultiscaleCovariance::regularized_diagonal(const ModelParams& p, int n) const {
    const double a = p.mu * p.mu * p.r * p.r, b = a * std::pow(gamma, 2 * n);
    const int lmax = int(std::max(2000.0, 200 * std::sqrt(b)));
    double s = 0;
    for (int l = 0; l <= lmax; ++l) {
        const double ll = double(l) * (l + 1);
        s += (2 * l + 1) * (b - a) / ((ll + a) * (ll + b));
    }
    // tail: (2l+1)(b-a)/l^4 integrated from lmax
    s += (b - a) / (double(lmax) * lmax);
    return s / (4 * kPi);
}

double MultiscaleCovariance::remainder_l2(const ModelParams& p, int n) const {
    const double b = p.mu * p.mu * p.r * p.r * std::pow(gamma, 2 * n);
    const int lmax = int(std::max(2000.0, 200 * std::sqrt(b)));
    double s = 0;
    for (int l = 0; l <= lmax; ++l) {
        const double w = 1.0 / (double(l) * (l + 1) + b);
        s += (2 * l + 1) * w * w;
    }
    s += 1.0 / (double(lmax) * lmax);
    return std::sqrt(s);
}

Eigen::MatrixXd reflection_gram(const ModelParams& p, const std::vector<SphereModes>& fns) {
    const std::size_t n = fns.size();
    Eigen::MatrixXd M(n, n);
    std::vector<SphereModes> refl;
    refl.reserve(n);
    for (const auto& f : fns) refl.push_back(reflect_time(f));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M(Eigen::Index(i), Eigen::Index(j)) = covariance(p, refl[i], fns[j]);
    return M;
}

double lower_hemisphere_mass(const SphereModes& f) {
    const SphereGrid& grid = cached_grid(2 * f.L, f.L, -1.0, 0.0);
    // f^2 is a polynomial of degree 2L in cos theta after the psi integral, so L+1 nodes on [-1, 0] are exact
    const Eigen::MatrixXd vals = grid.synthesize(f);
    const double lower = grid.integrate(vals.cwiseProduct(vals));
    const double total = mode_pairing(f, f);
    return total > 0 ? lower / total : 0.0;
}

PositivityReport reflection_positivity_gram(const ModelParams& p, const std::vector<SphereModes>& fns, int L) {
    std::vector<SphereModes> t;
    t.reserve(fns.size());
    for (const auto& f : fns) {
        t.push_back(f.truncated(L));
        if (lower_hemisphere_mass(t.back()) >= 1e-12)
            throw ContractError("test function not supported in the upper hemisphere");
    }
    Eigen::MatrixXd M = reflection_gram(p, t);
    Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    PositivityReport rep;
    rep.lambda_min = es.eigenvalues()(0);
    rep.gram_norm = es.eigenvalues().cwiseAbs().maxCoeff();
    return rep;
}

cplx time_zero_covariance_from_sphere(const ModelParams& p, const oneparticle::TrigPoly& h1,
                                      const oneparticle::TrigPoly& h2, int L) {
    if (L < 16) throw ContractError("equatorial mode sum needs L >= 16");
    // the partial sums over l converge like 1/L (P_lm(0)^2 ~ 1/l). At L, L/2, L/4, L/8 (same parity
    // alignment) the error has an expansion in 1/L; three Richardson steps remove its first terms.
    const int L0 = L - L % 8;
    LegendreTable P(L0, 0.0);
    const int K = std::min({h1.K, h2.K, L0 / 8});
    cplx s = 0;
    for (int m = -K; m <= K; ++m) {
        const int am = std::abs(m);
        double t[4] = {0, 0, 0, 0};
        double g = 0;
        for (int l = am; l <= L0; ++l) {
            g += mode_variance(p, l) * P(l, am) * P(l, am);
            for (int j = 1; j < 4; ++j)
                if (l == L0 >> j) t[j] = g;
        }
        t[0] = g;
        for (int order = 1; order < 4; ++order) {
            const double f = std::ldexp(1.0, order);
            for (int j = 0; j + order < 4; ++j) t[j] = (f * t[j] - t[j + 1]) / (f - 1);
        }
        s += t[0] * std::conj(h1.coeff(m)) * h2.coeff(m);
    }
    return 4 * kPi * kPi * p.r * p.r * s;
}

}  // namespace dsqft::euclid
