#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

// Linear algebra of O(1,2) with metric diag(+1,-1,-1).

namespace dsqft::group {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

const Mat3& metric();
const Mat3& gen_L1();
const Mat3& gen_L2();
const Mat3& gen_K0();

struct GroupElement {
    Mat3 m = Mat3::Identity();
    int det_sign = 1;
    int time_orientation = 1;

    // Checks m^T g m = g (entrywise, tolerance tol) and fills the flags.
    // Throws ContractError("not in O(1,2)") otherwise.
    static GroupElement from_matrix(const Mat3& m, double tol = 1e-9);
    static GroupElement from_row_major(const std::array<double, 9>& a, double tol = 1e-9);

    std::array<double, 9> row_major() const;
    GroupElement inverse() const;
    bool proper_orthochronous() const { return det_sign == 1 && time_orientation == 1; }
    double metric_defect() const;  // Frobenius norm of m^T g m - g
};

GroupElement operator*(const GroupElement& a, const GroupElement& b);

enum class Reflection { T, P1, P2, P };
Reflection parse_reflection(const std::string& name);

GroupElement boost1(double t);
GroupElement boost2(double s);
GroupElement rotate0(double alpha);
GroupElement horo(double q);
GroupElement reflection(Reflection which);

// -K0^2 + L1^2 + L2^2 built from the generator matrices.
Mat3 casimir_matrix();

struct IwasawaFactors {
    double alpha = 0;  // [0, 2pi)
    int k = 0;         // always 0 on the identity component
    double t = 0;
    double q = 0;
};

struct CartanFactors {
    double alpha = 0;  // [0, 2pi)
    double t = 0;      // >= 0
    double alpha_prime = 0;
};

struct HannabussFactors {
    double s = 0;
    int k = 0;
    double t = 0;
    double q = 0;
};

// g = R0(alpha) P^k L1(t) D(q)
IwasawaFactors iwasawa_decompose(const GroupElement& g);
GroupElement compose(const IwasawaFactors& f);

// g = R0(alpha) L1(t) R0(alpha')
CartanFactors cartan_decompose(const GroupElement& g);
GroupElement compose(const CartanFactors& f);

// g = L2(s) P^k L1(t) D(q); throws ExceptionalSetError when |cos alpha_iwasawa| < 1e-8
HannabussFactors hannabuss_decompose(const GroupElement& g);
GroupElement compose(const HannabussFactors& f);

struct LightconePoint {
    double alpha;
    double p0;
};

// Image of p0 (1, sin a, -cos a) under g, written in the same chart.
LightconePoint act_on_lightcone(const GroupElement& g, LightconePoint p);

// lambda_g(alpha') = rho(g R0(alpha')) with rho(R0 L1(t) D) = e^{-t}.
// Cocycle: lambda_{g1 g2}(a) = lambda_{g1}(g2 . a) lambda_{g2}(a).
double radon_nikodym(const GroupElement& g, double alpha_base);

// Point of the circle R0(a) (1,0,-1) moved by g (forward action on base angles).
double move_base_angle(const GroupElement& g, double alpha_base);

double wrap_2pi(double a);

}  // namespace dsqft::group
