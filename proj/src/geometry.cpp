#include "fbp/geometry.hpp"

#include <cmath>

namespace fbp {

Cutoff::Cutoff(double cx, double cz, double r_in, double r_out)
    : center_x(cx), center_z(cz), r_inner(r_in), r_outer(r_out)
{
    if (!(r_in > 0) || !(r_out > r_in))
        throw ConfigError("cutoff: radii must satisfy 0 < r_inner < r_outer");
}

double Cutoff::value(double x, double z) const
{
    const double rho = std::hypot(x - center_x, z - center_z);
    return smooth_step((r_outer - rho) / (r_outer - r_inner)).v;
}

Partials Cutoff::partials(double x, double z) const
{
    const double X = x - center_x;
    const double Z = z - center_z;
    const double rho = std::hypot(X, Z);
    const double w = r_outer - r_inner;
    Partials p;
    if (rho <= r_inner) {
        p.value = 1;
        return p;
    }
    if (rho >= r_outer)
        return p;
    const Jet1<double> s = smooth_step((r_outer - rho) / w);
    const double d1 = -s.d1 / w;       // d chi / d rho
    const double d2 = s.d2 / (w * w);  // d2 chi / d rho2
    p.value = s.v;
    p.dx = d1 * X / rho;
    p.dz = d1 * Z / rho;
    p.dzz = d2 * Z * Z / (rho * rho) + d1 * (X * X) / (rho * rho * rho);
    return p;
}

Partials singular_solution(int k, double x, double z)
{
    if (x < 0)
        throw DomainError("singular_solution: x must be non-negative");
    if (x == 0 && z == 0)
        throw DomainError("singular_solution: origin");
    const AngularProfile<double>& G = angular_profile(k);
    const PolarPoint<double> pt = polar_coords(x, z, 0.0, +1);
    const double r = pt.r, t = pt.t;
    const double lam = G.lambda();
    const double s = std::sqrt(1 + t * t);
    const double ts = t / s;
    const double g = G.eval(t);
    const double g1 = G.deriv(t);
    const double g2 = G.deriv2(t);

    Partials p;
    const double rl = std::pow(r, lam);
    p.value = rl * g;
    p.dx = AngularProfile<double>::c(k) * rl / (r * r * r) * G.eval_lower(t);
    // d_z = t/s d_r + s/r d_t, applied twice.
    const double P = lam * ts * g + s * g1;
    p.dz = rl / r * P;
    const double dP = lam * (g / (s * s * s) + ts * g1) + ts * g1 + s * g2;
    p.dzz = rl / (r * r) * ((lam - 1) * ts * P + s * dP);
    return p;
}

namespace {

// Local coordinates in which the corner sits at the origin and the profile
// is the k = 0 self-similar solution.
struct Local {
    double xi, zeta, sign;
};

Local to_local(int i, const Cutoff& c, double x, double z)
{
    const double sign = i == 0 ? 1.0 : -1.0;
    return {sign * (x - c.center_x), sign * z, sign};
}

} // namespace

Partials busing(int i, const Cutoff& cutoff, double x, double z)
{
    if (i != 0 && i != 1)
        throw DomainError("busing: corner index must be 0 or 1");
    const Local L = to_local(i, cutoff, x, z);
    Partials out;
    if (L.xi < 0)
        return out;
    if (L.xi == 0 && L.zeta == 0)
        return out;
    const Partials chi = cutoff.partials(x, z);
    if (chi.value == 0 && chi.dx == 0 && chi.dz == 0 && chi.dzz == 0)
        return out;
    const Partials v0 = singular_solution(0, L.xi, L.zeta);
    // back to (x, z): d_x = sign d_xi, d_z = sign d_zeta, d_zz = d_zetazeta
    const double vx = L.sign * v0.dx;
    const double vz = L.sign * v0.dz;
    out.value = v0.value * chi.value;
    out.dx = vx * chi.value + v0.value * chi.dx;
    out.dz = vz * chi.value + v0.value * chi.dz;
    out.dzz = v0.dzz * chi.value + 2 * vz * chi.dz + v0.value * chi.dzz;
    return out;
}

double fbar(int i, const Cutoff& cutoff, double x, double z)
{
    if (i != 0 && i != 1)
        throw DomainError("fbar: corner index must be 0 or 1");
    const Local L = to_local(i, cutoff, x, z);
    if (L.xi < 0)
        return 0;
    const Partials chi = cutoff.partials(x, z);
    if (chi.dx == 0 && chi.dz == 0 && chi.dzz == 0)
        return 0;
    const Partials v0 = singular_solution(0, L.xi, L.zeta);
    const double vz = L.sign * v0.dz;
    return v0.value * (z * chi.dx - chi.dzz) - 2 * vz * chi.dz;
}

} // namespace fbp
