#include "dsqft/so12_group.hpp"

#include <cmath>
#include <numbers>

#include "dsqft/errors.hpp"

namespace dsqft::group {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

Mat3 make(std::initializer_list<double> rows) {
    Mat3 m;
    auto it = rows.begin();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = *it++;
    return m;
}

GroupElement wrap(const Mat3& m, int det, int orient) {
    GroupElement g;
    g.m = m;
    g.det_sign = det;
    g.time_orientation = orient;
    return g;
}

void require_identity_component(const GroupElement& g) {
    if (!g.proper_orthochronous())
        throw ContractError("element is not proper orthochronous");
}

}  // namespace

const Mat3& metric() {
    static const Mat3 g = Eigen::Vector3d(1.0, -1.0, -1.0).asDiagonal();
    return g;
}
const Mat3& gen_L1() {
    static const Mat3 m = make({0, 0, 1, 0, 0, 0, 1, 0, 0});
    return m;
}
const Mat3& gen_L2() {
    static const Mat3 m = make({0, 1, 0, 1, 0, 0, 0, 0, 0});
    return m;
}
const Mat3& gen_K0() {
    static const Mat3 m = make({0, 0, 0, 0, 0, -1, 0, 1, 0});
    return m;
}

double wrap_2pi(double a) {
    double r = std::fmod(a, kTwoPi);
    if (r < 0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

GroupElement GroupElement::from_matrix(const Mat3& m, double tol) {
    for (int i = 0; i < 9; ++i)
        if (!std::isfinite(m.data()[i])) throw ContractError("not in O(1,2): non-finite entry");
    Mat3 defect = m.transpose() * metric() * m - metric();
    if (defect.cwiseAbs().maxCoeff() > tol)
        throw ContractError("not in O(1,2): metric defect " + std::to_string(defect.cwiseAbs().maxCoeff()));
    GroupElement g;
    g.m = m;
    g.det_sign = m.determinant() > 0 ? 1 : -1;
    g.time_orientation = m(0, 0) > 0 ? 1 : -1;
    return g;
}

GroupElement GroupElement::from_row_major(const std::array<double, 9>& a, double tol) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = a[3 * i + j];
    return from_matrix(m, tol);
}

std::array<double, 9> GroupElement::row_major() const {
    std::array<double, 9> a{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[3 * i + j] = m(i, j);
    return a;
}

GroupElement GroupElement::inverse() const {
    // g^{-1} = G m^T G for the Minkowski metric G
    return wrap(metric() * m.transpose() * metric(), det_sign, time_orientation);
}

double GroupElement::metric_defect() const {
    return (m.transpose() * metric() * m - metric()).norm();
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
    return wrap(a.m * b.m, a.det_sign * b.det_sign, a.time_orientation * b.time_orientation);
}

Reflection parse_reflection(const std::string& name) {
    if (name == "T") return Reflection::T;
    if (name == "P1") return Reflection::P1;
    if (name == "P2") return Reflection::P2;
    if (name == "P") return Reflection::P;
    throw ContractError("unknown reflection '" + name + "'");
}

GroupElement boost1(double t) {
    require_finite(t, "rapidity");
    double c = std::cosh(t), s = std::sinh(t);
    return wrap(make({c, 0, s, 0, 1, 0, s, 0, c}), 1, 1);
}

GroupElement boost2(double s) {
    require_finite(s, "rapidity");
    double c = std::cosh(s), h = std::sinh(s);
    return wrap(make({c, h, 0, h, c, 0, 0, 0, 1}), 1, 1);
}

GroupElement rotate0(double alpha) {
    require_finite(alpha, "angle");
    double c = std::cos(alpha), s = std::sin(alpha);
    return wrap(make({1, 0, 0, 0, c, -s, 0, s, c}), 1, 1);
}

GroupElement horo(double q) {
    require_finite(q, "horospheric parameter");
    double h = 0.5 * q * q;
    return wrap(make({1 + h, q, h, q, 1, q, -h, -q, 1 - h}), 1, 1);
}

GroupElement reflection(Reflection which) {
    switch (which) {
        case Reflection::T: return wrap(Eigen::Vector3d(-1, 1, 1).asDiagonal(), -1, -1);
        case Reflection::P1: return wrap(Eigen::Vector3d(1, 1, -1).asDiagonal(), -1, 1);
        case Reflection::P2: return wrap(Eigen::Vector3d(1, -1, 1).asDiagonal(), -1, 1);
        case Reflection::P: return wrap(Eigen::Vector3d(1, -1, -1).asDiagonal(), 1, 1);
    }
    throw ContractError("unknown reflection");
}

Mat3 casimir_matrix() {
    const Mat3& k = gen_K0();
    const Mat3& l1 = gen_L1();
    const Mat3& l2 = gen_L2();
    return -k * k + l1 * l1 + l2 * l2;
}

IwasawaFactors iwasawa_decompose(const GroupElement& g) {
    require_identity_component(g);
    // D(q) fixes n = (1,0,-1) and L1(t) n = e^{-t} n, so g n = e^{-t} (1, sin a, -cos a).
    Vec3 v = g.m * Vec3(1.0, 0.0, -1.0);
    if (!(v(0) > 0)) throw ContractError("light ray image not future directed");
    IwasawaFactors f;
    f.t = -std::log(v(0));
    f.alpha = wrap_2pi(std::atan2(v(1), -v(2)));
    f.k = 0;
    // D(q) (0,1,0) = (q,1,-q); rotations and L1 leave a time component of q e^{-t}
    f.q = g.m(0, 1) / v(0);
    return f;
}

GroupElement compose(const IwasawaFactors& f) {
    GroupElement g = rotate0(f.alpha);
    if (f.k == 1) g = g * reflection(Reflection::P);
    return g * boost1(f.t) * horo(f.q);
}

CartanFactors cartan_decompose(const GroupElement& g) {
    require_identity_component(g);
    const Mat3& m = g.m;
    // row 0 = (ch t, sh t sin a', sh t cos a'), column 0 = (ch t, -sh t sin a, sh t cos a)
    double sh = std::hypot(m(0, 1), m(0, 2));
    CartanFactors f;
    if (sh == 0.0 || std::asinh(sh) < 1e-15) {
        f.t = 0.0;
        f.alpha = 0.0;
        f.alpha_prime = wrap_2pi(std::atan2(m(2, 1), m(1, 1)));
        return f;
    }
    f.t = std::asinh(sh);
    f.alpha_prime = wrap_2pi(std::atan2(m(0, 1), m(0, 2)));
    f.alpha = wrap_2pi(std::atan2(-m(1, 0), m(2, 0)));
    return f;
}

GroupElement compose(const CartanFactors& f) {
    return rotate0(f.alpha) * boost1(f.t) * rotate0(f.alpha_prime);
}

HannabussFactors hannabuss_decompose(const GroupElement& g) {
    require_identity_component(g);
    // g n = e^{-t} (cosh s, sinh s, -(-1)^k) for n = (1,0,-1)
    Vec3 v = g.m * Vec3(1.0, 0.0, -1.0);
    // |v2| / v0 is |cos| of the Iwasawa angle
    if (std::abs(v(2)) < 1e-8 * v(0))
        throw ExceptionalSetError("Iwasawa angle too close to +-pi/2");
    HannabussFactors f;
    f.k = v(2) < 0 ? 0 : 1;
    double a = std::abs(v(2));
    f.t = -std::log(a);
    f.s = std::asinh(v(1) / a);
    // L2 does not touch the last component: (g (0,1,0))_2 = -(-1)^k q e^{-t}
    f.q = (f.k == 0 ? -1.0 : 1.0) * g.m(2, 1) / a;
    return f;
}

GroupElement compose(const HannabussFactors& f) {
    // The plain product L2(s) P^k L1(t) D(q) cancels entries of size e^{s+t} q^2 near the
    // exceptional set. Route through Iwasawa instead: L2(s) P^k = R0(a) L1(-ln cosh s) D(+-tanh s),
    // and D(q_a) L1(t) = L1(t) D(e^t q_a), so the cancellation is confined to one scalar.
    double sign = f.k == 0 ? 1.0 : -1.0;
    IwasawaFactors w;
    w.alpha = wrap_2pi(std::atan2(std::sinh(f.s), sign));
    w.t = f.t - std::log(std::cosh(f.s));
    w.q = std::exp(f.t) * sign * std::tanh(f.s) + f.q;
    return compose(w);
}

LightconePoint act_on_lightcone(const GroupElement& g, LightconePoint p) {
    if (!(p.p0 > 0) || !std::isfinite(p.p0)) throw DomainError("p0 must be positive");
    if (!std::isfinite(p.alpha)) throw DomainError("angle must be finite");
    Vec3 x(p.p0, p.p0 * std::sin(p.alpha), -p.p0 * std::cos(p.alpha));
    Vec3 y = g.m * x;
    if (!(y(0) > 0)) throw DomainError("image left the forward cone");
    return {wrap_2pi(std::atan2(y(1), -y(2))), y(0)};
}

double radon_nikodym(const GroupElement& g, double alpha_base) {
    require_identity_component(g);
    return std::exp(-iwasawa_decompose(g * rotate0(alpha_base)).t);
}

double move_base_angle(const GroupElement& g, double alpha_base) {
    return iwasawa_decompose(g * rotate0(alpha_base)).alpha;
}

}  // namespace dsqft::group
