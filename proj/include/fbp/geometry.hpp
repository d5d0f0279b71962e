#ifndef FBP_GEOMETRY_HPP
#define FBP_GEOMETRY_HPP

// Polar-like coordinates adapted to the scaling z ~ x^(1/3) of the shear
// operator, the smooth cutoffs, and the explicit singular solutions
//   v_k = r^(1/2+3k) G_k(t),   r = (z^2 + x^(2/3))^(1/2),  t = z x^(-1/3),
// together with their localized versions near the corners (x_i, 0).

#include <cmath>
#include <limits>

#include "fbp/errors.hpp"
#include "fbp/specfun.hpp"

namespace fbp {

// |t| is clipped here; points on the vertical line through the corner map to
// t = +-t_saturation.
inline constexpr double t_saturation = 1e12;

template <class Scalar>
struct PolarPoint {
    Scalar r;
    Scalar t;
};

// r_i = (z^2 + |x - x_i|^(2/3))^(1/2) and t_i = orientation * z |x - x_i|^(-1/3).
template <class Scalar>
PolarPoint<Scalar> polar_coords(Scalar x, Scalar z, Scalar x_i, int orientation)
{
    using std::abs;
    using std::cbrt;
    using std::sqrt;
    const Scalar dx = abs(x - x_i);
    if (dx == Scalar(0) && z == Scalar(0))
        throw DomainError("polar_coords: singular point");
    const Scalar c = cbrt(dx);
    const Scalar r = sqrt(z * z + c * c);
    const Scalar sign = orientation >= 0 ? Scalar(1) : Scalar(-1);
    const Scalar sat = Scalar(t_saturation);
    Scalar t;
    if (abs(z) >= sat * c)
        t = z > Scalar(0) ? sat : -sat;
    else
        t = z / c;
    return {r, sign * t};
}

// Inverse map: offset x - x_i = r^3/(1+t^2)^(3/2) and z = r t/(1+t^2)^(1/2)
// (for orientation +1).
template <class Scalar>
void polar_to_cartesian(Scalar r, Scalar t, Scalar& dx, Scalar& z)
{
    using std::sqrt;
    const Scalar s = sqrt(Scalar(1) + t * t);
    dx = r * r * r / (s * s * s);
    z = r * t / s;
}

// Determinant of d(r,t)/d(x,z).
template <class Scalar>
Scalar jacobian_det(Scalar r, Scalar t)
{
    const Scalar s2 = Scalar(1) + t * t;
    return s2 * s2 / (Scalar(3) * r * r * r);
}

// Value and first two derivatives of a scalar function of one variable.
template <class Scalar>
struct Jet1 {
    Scalar v, d1, d2;
};

// C-infinity step: 0 for s <= 0, 1 for s >= 1,
// S(s) = sigma(s) / (sigma(s) + sigma(1-s)) with sigma(s) = exp(-1/s).
template <class Scalar>
Jet1<Scalar> smooth_step(Scalar s)
{
    using std::exp;
    if (s <= Scalar(0))
        return {Scalar(0), Scalar(0), Scalar(0)};
    if (s >= Scalar(1))
        return {Scalar(1), Scalar(0), Scalar(0)};
    // S = 1/(1+e^g) with g = 1/s - 1/(1-s).
    const Scalar q = Scalar(1) - s;
    const Scalar g = Scalar(1) / s - Scalar(1) / q;
    Scalar S, Sc;   // S and 1 - S
    if (g > Scalar(0)) {
        const Scalar e = exp(-g);
        S = e / (Scalar(1) + e);
        Sc = Scalar(1) / (Scalar(1) + e);
    } else {
        const Scalar e = exp(g);
        S = Scalar(1) / (Scalar(1) + e);
        Sc = e / (Scalar(1) + e);
    }
    const Scalar w = S * Sc;
    if (w == Scalar(0))
        return {S, Scalar(0), Scalar(0)};
    const Scalar g1 = -Scalar(1) / (s * s) - Scalar(1) / (q * q);
    const Scalar g2 = Scalar(2) / (s * s * s) - Scalar(2) / (q * q * q);
    const Scalar d1 = -g1 * w;
    const Scalar d2 = -g2 * w - g1 * d1 * (Sc - S);
    return {S, d1, d2};
}

// One-dimensional plateau: 1 on |y| <= 1/3, 0 on |y| >= 1/2.
template <class Scalar>
Jet1<Scalar> plateau(Scalar y)
{
    using std::abs;
    const Scalar w = Scalar(1) / Scalar(2) - Scalar(1) / Scalar(3);
    const Jet1<Scalar> j = smooth_step((Scalar(1) / Scalar(2) - abs(y)) / w);
    const Scalar sg = y < Scalar(0) ? Scalar(1) : Scalar(-1);   // d|y|/dy = -sg
    return {j.v, sg * j.d1 / w, j.d2 / (w * w)};
}

// Value and partial derivatives of a function of (x, z).
struct Partials {
    double value = 0;
    double dx = 0;
    double dz = 0;
    double dzz = 0;
};

// Radial cutoff around (center_x, center_z): 1 for Euclidean distance
// rho <= r_inner, 0 for rho >= r_outer.
struct Cutoff {
    double center_x = 0;
    double center_z = 0;
    double r_inner = 0.1;
    double r_outer = 0.2;

    Cutoff() = default;
    Cutoff(double cx, double cz, double r_in, double r_out);

    double value(double x, double z) const;
    // value, d/dx, d/dz, d2/dz2
    Partials partials(double x, double z) const;
};

// v_k and its analytic partial derivatives on the half plane x >= 0,
// k in [-2, 3]. d_x v_k is evaluated as c_k v_{k-1}.
Partials singular_solution(int k, double x, double z);

// Localized singular profile r_i^(1/2) G_0(t_i) chi_i at the corner
// x_i = cutoff.center_x. For i = 1 the profile is the mirror image
// (x - x_i, z) -> (x_i - x, -z) of the i = 0 one.
Partials busing(int i, const Cutoff& cutoff, double x, double z);

// Source generated by the localized profile:
//   fbar_i = v (z d_x chi - d_zz chi) - 2 d_z v d_z chi.
double fbar(int i, const Cutoff& cutoff, double x, double z);

} // namespace fbp

#endif
