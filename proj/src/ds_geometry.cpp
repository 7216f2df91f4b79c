#include "dsqft/ds_geometry.hpp"

#include <cmath>
#include <numbers>

#include "dsqft/errors.hpp"

namespace dsqft::geometry {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2 * std::numbers::pi;
constexpr double kLightBand = 1e-9;
}  // namespace

DeSitterPoint DeSitterPoint::make(double x0, double x1, double x2, double r) {
    if (!(r > 0) || !std::isfinite(x0) || !std::isfinite(x1) || !std::isfinite(x2))
        throw ContractError("de Sitter point needs finite coordinates and r > 0");
    double q = x0 * x0 - x1 * x1 - x2 * x2;
    if (std::abs(q + r * r) > 1e-10 * r * r) throw ContractError("point is not on the hyperboloid");
    return {x0, x1, x2, r};
}

DeSitterPoint DeSitterPoint::on_circle(double psi, double r) {
    return {0.0, r * std::sin(psi), r * std::cos(psi), r};
}

DeSitterPoint DeSitterPoint::horo_chart(double tau, double xi, double r) {
    double e = std::exp(tau / r);
    double h = xi * xi / (2 * r) * e;
    return {r * std::sinh(tau / r) + h, xi * e, r * std::cosh(tau / r) - h, r};
}

DeSitterPoint DeSitterPoint::moved(const group::GroupElement& g) const {
    group::Vec3 v = g.m * vec();
    return {v(0), v(1), v(2), r};
}

double dot(const DeSitterPoint& x, const DeSitterPoint& y) {
    return x.x0 * y.x0 - x.x1 * y.x1 - x.x2 * y.x2;
}

const char* to_string(CausalRelation c) {
    switch (c) {
        case CausalRelation::timelike: return "timelike";
        case CausalRelation::lightlike: return "lightlike";
        case CausalRelation::spacelike: return "spacelike";
        case CausalRelation::equal: return "equal";
    }
    return "?";
}

CausalRelation classify(const DeSitterPoint& x, const DeSitterPoint& y) {
    if (std::abs(x.r - y.r) > 1e-12 * std::max(x.r, y.r)) throw DomainError("points on different hyperboloids");
    const double r2 = x.r * x.r;
    double dx = x.x0 - y.x0, dy = x.x1 - y.x1, dz = x.x2 - y.x2;
    if (std::sqrt(dx * dx + dy * dy + dz * dz) <= 1e-12 * x.r) return CausalRelation::equal;
    double xy = dot(x, y);
    if (std::abs(xy + r2) <= kLightBand * r2) return CausalRelation::lightlike;
    return xy < -r2 ? CausalRelation::timelike : CausalRelation::spacelike;
}

std::optional<double> geodesic_distance(const DeSitterPoint& x, const DeSitterPoint& y) {
    CausalRelation c = classify(x, y);
    if (c == CausalRelation::equal || c == CausalRelation::lightlike) return 0.0;
    const double r = x.r;
    double z = -dot(x, y) / (r * r);
    if (c == CausalRelation::timelike) return r * std::acosh(z);
    if (z < -1.0) return std::nullopt;  // y in the causal shadow of the antipode
    return r * std::acos(std::min(z, 1.0));
}

double wrap_angle(double a) {
    double w = a - kTwoPi * std::floor((a + kPi / 2) / kTwoPi);
    return w >= 1.5 * kPi ? w - kTwoPi : w;
}

bool ArcInterval::full() const { return half_width >= kPi; }

bool ArcInterval::contains(double psi, double eps) const {
    if (full()) return true;
    return std::abs(std::remainder(psi - center, kTwoPi)) <= half_width + eps;
}

ArcInterval ArcInterval::from_endpoints(double lo, double hi, double r) {
    if (hi < lo) throw ContractError("arc endpoints out of order");
    double hw = 0.5 * (hi - lo);
    if (hw >= kPi) return {0.0, kPi, r};
    return {wrap_angle(0.5 * (lo + hi)), hw, r};
}

double causal_completion_apex(const ArcInterval& I) {
    if (!(I.half_width >= 0)) throw ContractError("negative half width");
    if (I.half_width >= kPi / 2) throw DomainError("wedge limit: light rays over the arc do not meet");
    return I.r * std::tan(I.half_width);
}

DeSitterPoint causal_completion_tip(const ArcInterval& I, int sign) {
    double h = causal_completion_apex(I);
    // over the arc centered at 0 the tip is (h, 0, r / cos hw); rotate to the center
    double z2 = I.r / std::cos(I.half_width);
    return {sign >= 0 ? h : -h, z2 * std::sin(I.center), z2 * std::cos(I.center), I.r};
}

ArcInterval shadow_interval(double psi, double tau, double r) {
    // phi is in the shadow iff sin psi sin phi + cosh tau cos psi cos phi >= 1,
    // i.e. sqrt(1 + a^2) cos(phi - c) >= 1 with a = sinh tau cos psi
    double a = std::sinh(tau) * std::cos(psi);
    double c = std::atan2(std::sin(psi), std::cosh(tau) * std::cos(psi));
    return {wrap_angle(c), std::atan(std::abs(a)), r};
}

ArcInterval dependence_interval(double psi, double tau, double r) {
    if (!(std::abs(psi) < kPi / 2)) throw DomainError("dependence_interval needs |psi| < pi/2");
    if (!std::isfinite(tau)) throw DomainError("non-finite rapidity");
    return shadow_interval(psi, tau, r);
}

ArcInterval influence_region(const ArcInterval& I, double alpha, double tau) {
    if (I.full()) return I;
    // Each endpoint of the shadow moves along one null family, and boosts map a null family to itself
    // by an orientation-preserving circle map; so both endpoint functions increase with psi and the
    // union is spanned by the left end of the first shadow and the right end of the last.
    auto left_end = [&](double psi) {
        ArcInterval s = shadow_interval(psi, tau, I.r);
        return psi + std::remainder(s.center - psi, kTwoPi) - s.half_width;
    };
    auto right_end = [&](double psi) {
        ArcInterval s = shadow_interval(psi, tau, I.r);
        return psi + std::remainder(s.center - psi, kTwoPi) + s.half_width;
    };
    double lo = left_end(I.lo() + alpha) - alpha;
    double hi = right_end(I.hi() + alpha) - alpha;
    return ArcInterval::from_endpoints(lo, std::max(hi, lo), I.r);
}

double horospheric_distance(const DeSitterPoint& x, double tau1) {
    const double r = x.r;
    // p(t) = e^{-t} (1, 0, -1), so x.p = e^{-t}(x0 + x2)
    double xp = std::exp(-tau1 / r) * (x.x0 + x.x2) / r;
    if (!(xp > 0)) throw DomainError("point outside the horospheric chart");
    return r * std::abs(std::log(xp));
}

}  // namespace dsqft::geometry
