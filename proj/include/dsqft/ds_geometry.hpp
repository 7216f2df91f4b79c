#pragma once

#include <optional>

#include "dsqft/so12_group.hpp"

// Causal geometry of the hyperboloid x0^2 - x1^2 - x2^2 = -r^2.

namespace dsqft::geometry {

struct DeSitterPoint {
    double x0 = 0, x1 = 0, x2 = 1;
    double r = 1;

    // Checks the hyperboloid equation within 1e-10 r^2; ContractError otherwise.
    static DeSitterPoint make(double x0, double x1, double x2, double r);
    // (0, r sin psi, r cos psi)
    static DeSitterPoint on_circle(double psi, double r = 1.0);
    // D(xi/r) L1(tau/r) (0,0,r), the chart of the half-space in front of the right wedge
    static DeSitterPoint horo_chart(double tau, double xi, double r = 1.0);

    group::Vec3 vec() const { return {x0, x1, x2}; }
    DeSitterPoint moved(const group::GroupElement& g) const;
};

// Minkowski product with signature (+,-,-).
double dot(const DeSitterPoint& x, const DeSitterPoint& y);

enum class CausalRelation { timelike, lightlike, spacelike, equal };
const char* to_string(CausalRelation c);

// Band |x.y + r^2| <= 1e-9 r^2 counts as lightlike. Mismatched radii throw DomainError.
CausalRelation classify(const DeSitterPoint& x, const DeSitterPoint& y);

// Spatial arc length or proper time along the connecting geodesic; nullopt when x.y > r^2
// (no geodesic joins the points).
std::optional<double> geodesic_distance(const DeSitterPoint& x, const DeSitterPoint& y);

// Arc of the time-zero circle, angles measured as in on_circle().
struct ArcInterval {
    double center = 0;      // [-pi/2, 3pi/2)
    double half_width = 0;  // [0, pi]
    double r = 1;

    double lo() const { return center - half_width; }
    double hi() const { return center + half_width; }
    double length() const { return 2 * half_width * r; }
    bool full() const;
    // psi (any representative) lies in the closed arc, with slack eps in angle
    bool contains(double psi, double eps = 0.0) const;

    static ArcInterval from_endpoints(double lo, double hi, double r = 1.0);
};

// Maps an angle into [-pi/2, 3pi/2).
double wrap_angle(double a);

// Height r tan(half_width) of the tip of the causal completion over I.
// Throws DomainError("wedge limit") for half_width >= pi/2.
double causal_completion_apex(const ArcInterval& I);

// Tips (+/- apex) of the double cone over I, as points of dS.
DeSitterPoint causal_completion_tip(const ArcInterval& I, int sign);

// Shadow on S^1 of L1(tau) x(psi), tau a rapidity: the past cone for tau > 0, the future cone
// for tau < 0. Width 2 arctan(|sinh tau cos psi|). |psi| >= pi/2 throws DomainError.
ArcInterval dependence_interval(double psi, double tau, double r = 1.0);

// Same shadow without the chart restriction (psi anywhere on the circle).
ArcInterval shadow_interval(double psi, double tau, double r = 1.0);

// Union over psi in I of the shadows of R0(alpha) L1(tau) R0(-alpha) x(psi).
ArcInterval influence_region(const ArcInterval& I, double alpha, double tau);

// r |ln(x.p(tau1/r)/r)| with p(t) = L1(t)(1,0,-1). Throws DomainError when x.p <= 0.
double horospheric_distance(const DeSitterPoint& x, double tau1);

}  // namespace dsqft::geometry
