#ifndef FBP_SPECFUN_HPP
#define FBP_SPECFUN_HPP

// Gamma, Kummer's M and the bounded angular profiles G_k of the self-similar
// solutions r^(1/2+3k) G_k(t) of z d_x u - d_zz u = 0.
//
// Everything is templated on the scalar type so that the same series can be
// run in extended precision (tests instantiate them with Boost multiprecision
// types as a reference).

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "fbp/errors.hpp"

namespace fbp {

namespace detail {

template <class Scalar>
Scalar pi_v()
{
    return Scalar(3.141592653589793238462643383279502884L);
}

// sin(pi x) with exact zeros at the integers.
template <class Scalar>
Scalar sin_pi(Scalar x)
{
    using std::floor;
    using std::sin;
    Scalar r = x - Scalar(2) * floor(x / Scalar(2) + Scalar(0.5));   // r in [-1, 1)
    if (r == Scalar(0) || r == Scalar(-1))
        return Scalar(0);
    if (r > Scalar(0.5))
        r = Scalar(1) - r;
    else if (r < Scalar(-0.5))
        r = Scalar(-1) - r;
    return sin(pi_v<Scalar>() * r);
}

// Plain power series sum_n (a)_n/(b)_n z^n/n! with Neumaier compensation.
// Only safe (no cancellation) for z >= 0 or small |z|.
template <class Scalar>
Scalar kummer_series(Scalar a, Scalar b, Scalar z,
                     Scalar tol = std::numeric_limits<Scalar>::epsilon())
{
    using std::abs;
    const int max_terms = 20000;
    Scalar term = 1, sum = 1, comp = 0;
    for (int n = 0; n < max_terms; ++n) {
        const Scalar sn = Scalar(n);
        term *= (a + sn) / (b + sn) * z / (sn + Scalar(1));
        const Scalar t = sum + term;
        if (abs(sum) >= abs(term))
            comp += (sum - t) + term;
        else
            comp += (term - t) + sum;
        sum = t;
        if (term == Scalar(0))
            return sum + comp;
        const Scalar next = abs((a + sn + Scalar(1)) / (b + sn + Scalar(1)) * z / (sn + Scalar(2)));
        if (abs(term) <= tol * abs(sum + comp) && next < Scalar(1))
            return sum + comp;
    }
    throw ConvergenceError("kummer_m: series did not converge");
}

} // namespace detail

// Euler Gamma function. Lanczos approximation (g = 7, nine terms) with the
// reflection formula below 1/2. Relative accuracy is about 1e-15 in double.
template <class Scalar>
Scalar gamma(Scalar x)
{
    using std::exp;
    using std::floor;
    using std::pow;
    using std::sqrt;
    if (x <= Scalar(0) && x == floor(x))
        throw DomainError("gamma: pole at non-positive integer");
    if (x < Scalar(0.5))
        return detail::pi_v<Scalar>() / (detail::sin_pi(x) * gamma(Scalar(1) - x));

    static constexpr double c[9] = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    const Scalar y = x - Scalar(1);
    Scalar acc = Scalar(c[0]);
    for (int i = 1; i < 9; ++i)
        acc += Scalar(c[i]) / (y + Scalar(i));
    const Scalar t = y + Scalar(7.5);
    return sqrt(Scalar(2) * detail::pi_v<Scalar>()) * pow(t, y + Scalar(0.5)) * exp(-t) * acc;
}

// Kummer's confluent hypergeometric function M(a, b, zeta). Negative
// arguments go through M(a,b,-x) = e^-x M(b-a,b,x).
template <class Scalar>
Scalar kummer_m(Scalar a, Scalar b, Scalar zeta)
{
    using std::exp;
    using std::floor;
    if (b <= Scalar(0) && b == floor(b))
        throw DomainError("kummer_m: b is a non-positive integer");
    if (zeta < Scalar(0))
        return exp(zeta) * detail::kummer_series(b - a, b, -zeta);
    return detail::kummer_series(a, b, zeta);
}

namespace detail {

// Value-only evaluator of G_k for a single k. Used in groups by
// AngularProfile, whose derivatives need the neighbouring indices.
template <class Scalar>
class ProfileCore {
public:
    ProfileCore() = default;

    ProfileCore(int k, Scalar t_switch) : k_(k), t_switch_(t_switch)
    {
        using std::cbrt;
        using std::pow;
        lambda_ = Scalar(0.5) + Scalar(3 * k);
        a_ = -Scalar(1) / Scalar(6) - Scalar(k);
        b_ = Scalar(2) / Scalar(3);
        norm_ = Scalar(2) * pow(Scalar(9), Scalar(1) / Scalar(6) + Scalar(k));
        const Scalar a2 = a_ - b_ + Scalar(1);
        coef_a_ = Scalar(0.5) * gamma(Scalar(1) - b_) / gamma(a2);
        coef_b_ = Scalar(0.5) * gamma(b_ - Scalar(1)) / gamma(a_) / cbrt(Scalar(9));
        coef_pos_ = Scalar(0.5) * gamma(Scalar(1) - a_) / gamma(a2);
        build_panels();
    }

    int k() const { return k_; }
    Scalar lambda() const { return lambda_; }
    Scalar a() const { return a_; }
    Scalar b() const { return b_; }
    Scalar normalization() const { return norm_; }
    Scalar t_switch() const { return t_switch_; }

    Scalar value(Scalar t) const
    {
        using std::exp;
        using std::isinf;
        if (isinf(t))
            return t > 0 ? Scalar(0) : Scalar(1);
        if (t <= -t_switch_)
            return value_asymptotic_neg(t);
        if (t >= t_switch_)
            return value_asymptotic_pos(t);
        const Scalar x = t * t * t / Scalar(9);
        if (x > Scalar(-1) && x < Scalar(1))
            return value_series(t);
        const auto& panels = t < Scalar(0) ? neg_panels_ : pos_panels_;
        for (const Panel& p : panels)
            if (t >= p.lo && t <= p.hi)
                return t < Scalar(0) ? p.eval(t) : exp(-x) * p.eval(t);
        return value_quadrature(t);
    }

    // H and its first two derivatives from the entire-function formula.
    // Meant for small |t| where no cancellation occurs.
    void h_series(Scalar t, Scalar& h, Scalar& dh, Scalar& d2h) const
    {
        const Scalar zeta = -t * t * t / Scalar(9);
        const Scalar a2 = a_ - b_ + Scalar(1);
        const Scalar b2 = Scalar(2) - b_;
        const Scalar m1 = detail::kummer_series(a_, b_, zeta);
        const Scalar m1p = detail::kummer_series(a_ + Scalar(1), b_ + Scalar(1), zeta);
        const Scalar m2 = detail::kummer_series(a2, b2, zeta);
        const Scalar m2p = detail::kummer_series(a2 + Scalar(1), b2 + Scalar(1), zeta);
        const Scalar dzeta = -t * t / Scalar(3);
        h = coef_a_ * m1 - coef_b_ * t * m2;
        dh = coef_a_ * (a_ / b_) * m1p * dzeta - coef_b_ * (m2 + t * (a2 / b2) * m2p * dzeta);
        d2h = -t * t / Scalar(3) * dh + lambda_ * t / Scalar(3) * h;
    }

    // Tricomi-function route, without the interpolation cache.
    //   t < 0:  H = zeta^(1/3) U(1/6-k, 4/3, zeta) / 2,      zeta = -t^3/9
    //   t > 0:  H = C e^-x x^(1/3) U(7/6+k, 4/3, x),         x = t^3/9
    // The second form is the recessive solution of Kummer's equation on the
    // negative axis, which keeps relative accuracy where G_k is tiny.
    Scalar value_quadrature(Scalar t) const
    {
        using std::cbrt;
        using std::exp;
        using std::pow;
        const Scalar beta = Scalar(4) / Scalar(3);
        const Scalar p = pow(Scalar(1) + t * t, -lambda_ / Scalar(2));
        if (t < Scalar(0)) {
            const Scalar zeta = -t * t * t / Scalar(9);
            return norm_ * p * Scalar(0.5) * cbrt(zeta) * tricomi(a_ - b_ + Scalar(1), beta, zeta);
        }
        const Scalar x = t * t * t / Scalar(9);
        return norm_ * p * coef_pos_ * exp(-x) * cbrt(x) * tricomi(Scalar(1) - a_, beta, x);
    }

    // U(alpha, beta, z) for z > 0. Integral representation for alpha > 0,
    // otherwise the downward recurrence in alpha, which is stable because U
    // is recessive as alpha -> +inf:
    //   U(a-1) = -(b - 2a - z) U(a) - a (a - b + 1) U(a+1).
    static Scalar tricomi(Scalar alpha, Scalar beta, Scalar z)
    {
        using std::ceil;
        if (alpha > Scalar(0))
            return tricomi_integral(alpha, beta, z);
        const int steps = int(ceil(-alpha + Scalar(1e-9)));
        Scalar al = alpha + Scalar(steps);
        Scalar u_hi = tricomi_integral(al + Scalar(1), beta, z);
        Scalar u = tricomi_integral(al, beta, z);
        for (int s = 0; s < steps; ++s) {
            const Scalar u_lo = -(beta - Scalar(2) * al - z) * u - al * (al - beta + Scalar(1)) * u_hi;
            u_hi = u;
            u = u_lo;
            al -= Scalar(1);
        }
        return u;
    }

private:
    struct Panel {
        Scalar lo, hi;
        std::array<Scalar, 32> c;
        Scalar eval(Scalar t) const
        {
            const Scalar s = (Scalar(2) * t - lo - hi) / (hi - lo);
            Scalar b1 = 0, b2 = 0;
            for (int m = int(c.size()) - 1; m >= 1; --m) {
                const Scalar b0 = Scalar(2) * s * b1 - b2 + c[m];
                b2 = b1;
                b1 = b0;
            }
            return s * b1 - b2 + Scalar(0.5) * c[0];
        }
    };

    Scalar value_series(Scalar t) const
    {
        using std::exp;
        using std::pow;
        const Scalar p = pow(Scalar(1) + t * t, -lambda_ / Scalar(2));
        const Scalar a2 = a_ - b_ + Scalar(1);
        const Scalar b2 = Scalar(2) - b_;
        Scalar h;
        if (t > Scalar(0)) {
            const Scalar x = t * t * t / Scalar(9);
            h = exp(-x) * (coef_a_ * detail::kummer_series(b_ - a_, b_, x)
                           - coef_b_ * t * detail::kummer_series(b2 - a2, b2, x));
        } else {
            const Scalar zeta = -t * t * t / Scalar(9);
            h = coef_a_ * detail::kummer_series(a_, b_, zeta)
                - coef_b_ * t * detail::kummer_series(a2, b2, zeta);
        }
        return norm_ * p * h;
    }

    // sum_n (al)_n (al-be+1)_n / n! (-z)^-n truncated at its smallest term.
    static Scalar tricomi_asymptotic_sum(Scalar al, Scalar be, Scalar z)
    {
        using std::abs;
        const Scalar al2 = al - be + Scalar(1);
        Scalar term = 1, sum = 1;
        for (int n = 0; n < 400; ++n) {
            const Scalar next = term * (al + Scalar(n)) * (al2 + Scalar(n)) / Scalar(n + 1) / (-z);
            if (abs(next) >= abs(term))
                break;
            term = next;
            sum += term;
            if (abs(term) <= std::numeric_limits<Scalar>::epsilon() * abs(sum))
                break;
        }
        return sum;
    }

    // G_k -> 1 with an O(t^-2) correction.
    Scalar value_asymptotic_neg(Scalar t) const
    {
        using std::exp;
        using std::log;
        using std::log1p;
        const Scalar zeta = -t * t * t / Scalar(9);
        const Scalar logmag = -lambda_ / Scalar(2) * log1p(t * t) - a_ * log(zeta);
        return norm_ * Scalar(0.5) * exp(logmag) * tricomi_asymptotic_sum(a_, b_, zeta);
    }

    // Exponentially small tail, e^{-t^3/9} times an algebraic factor.
    Scalar value_asymptotic_pos(Scalar t) const
    {
        using std::exp;
        using std::log;
        using std::log1p;
        const Scalar x = t * t * t / Scalar(9);
        const Scalar al = b_ - a_;
        const Scalar logmag = -lambda_ / Scalar(2) * log1p(t * t) - x - al * log(x);
        return norm_ * coef_pos_ * exp(logmag) * tricomi_asymptotic_sum(al, b_, x);
    }

    // Integral representation
    //   U(a,b,z) = 1/Gamma(a) int_0^inf e^{-zs} s^{a-1} (1+s)^{b-a-1} ds,  a, z > 0,
    // evaluated with the exp-sinh substitution s = exp(pi/2 sinh tau).
    static Scalar tricomi_integral(Scalar alpha, Scalar beta, Scalar z)
    {
        using std::abs;
        using std::cosh;
        using std::exp;
        using std::log1p;
        using std::sinh;
        const Scalar half_pi = pi_v<Scalar>() / Scalar(2);
        const Scalar lo = -7.5, hi = 5.0;
        auto f = [&](Scalar tau) {
            const Scalar u = half_pi * sinh(tau);
            const Scalar s = exp(u);
            const Scalar lg = -z * s + alpha * u + (beta - alpha - Scalar(1)) * log1p(s);
            return exp(lg) * half_pi * cosh(tau);
        };
        Scalar h = 0.25;
        Scalar sum = 0;
        for (Scalar tau = lo; tau <= hi + h / 2; tau += h)
            sum += f(tau);
        Scalar integral = sum * h;
        for (int level = 0; level < 12; ++level) {
            Scalar extra = 0;
            for (Scalar tau = lo + h / 2; tau < hi; tau += h)
                extra += f(tau);
            sum += extra;
            h /= 2;
            const Scalar next = sum * h;
            const bool done = level >= 2
                && abs(next - integral) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * abs(next);
            integral = next;
            if (done)
                return integral / gamma(alpha);
        }
        throw ConvergenceError("angular profile: quadrature did not converge");
    }

    // Chebyshev interpolants of the quadrature route on [-t_switch, -9^(1/3)]
    // and of e^x G_k on [9^(1/3), t_switch].
    void build_panels()
    {
        using std::cbrt;
        using std::cos;
        using std::exp;
        const Scalar t1 = cbrt(Scalar(9));
        const int n = 32;
        for (int side = 0; side < 2; ++side) {
            auto& panels = side == 0 ? neg_panels_ : pos_panels_;
            const Scalar t_start = side == 0 ? -t_switch_ : t1;
            const Scalar t_end = side == 0 ? -t1 : t_switch_;
            for (int p = 0; p < 3; ++p) {
                Panel& pan = panels[p];
                pan.lo = t_start + (t_end - t_start) * Scalar(p) / Scalar(3);
                pan.hi = t_start + (t_end - t_start) * Scalar(p + 1) / Scalar(3);
                std::array<Scalar, 32> fv;
                for (int j = 0; j < n; ++j) {
                    const Scalar th = pi_v<Scalar>() * (Scalar(j) + Scalar(0.5)) / Scalar(n);
                    const Scalar t = (pan.lo + pan.hi) / 2 + (pan.hi - pan.lo) / 2 * cos(th);
                    fv[j] = value_quadrature(t);
                    if (side == 1)
                        fv[j] *= exp(t * t * t / Scalar(9));
                }
                for (int m = 0; m < n; ++m) {
                    Scalar s = 0;
                    for (int j = 0; j < n; ++j)
                        s += fv[j] * cos(pi_v<Scalar>() * Scalar(m) * (Scalar(j) + Scalar(0.5)) / Scalar(n));
                    pan.c[m] = Scalar(2) * s / Scalar(n);
                }
            }
        }
    }

    int k_ = 0;
    Scalar t_switch_ = 8;
    Scalar lambda_ = 0.5, a_ = 0, b_ = 0, norm_ = 0, coef_a_ = 0, coef_b_ = 0, coef_pos_ = 0;
    std::array<Panel, 3> neg_panels_{};
    std::array<Panel, 3> pos_panels_{};
};

} // namespace detail

// Bounded solution G_k of the angular ODE, normalised so that G_k(-inf) = 1
// and G_k(+inf) = 0. Supported indices are k in [-2, 3].
template <class Scalar = double>
class AngularProfile {
public:
    static constexpr int k_min = -2;
    static constexpr int k_max = 3;

    explicit AngularProfile(int k, Scalar t_switch = Scalar(8)) : k_(k)
    {
        if (k < k_min || k > k_max)
            throw DomainError("angular_profile: unsupported index k = " + std::to_string(k));
        for (int l = 0; l < 3; ++l)
            core_[l] = detail::ProfileCore<Scalar>(k - l, t_switch);
        bound_ = 0;
        for (int i = -2000; i <= 2000; ++i) {
            using std::abs;
            const Scalar v = abs(eval(Scalar(i) / Scalar(100)));
            if (v > bound_)
                bound_ = v;
        }
    }

    int k() const { return k_; }
    Scalar lambda() const { return core_[0].lambda(); }
    Scalar a() const { return core_[0].a(); }
    Scalar b() const { return core_[0].b(); }
    Scalar normalization() const { return core_[0].normalization(); }
    Scalar t_switch() const { return core_[0].t_switch(); }
    // Half-width of the window around t = 0 where derivatives come from the
    // power series instead of the index recurrence.
    static Scalar series_window() { return Scalar(0.5); }
    // max |G_k| sampled on [-20, 20] with step 1e-2.
    Scalar bound() const { return bound_; }
    static Scalar c(int k) { return Scalar(0.25) - Scalar(9 * k * k); }

    Scalar eval(Scalar t) const { return core_[0].value(t); }
    // G_{k-1}(t), which the index recurrence couples to G_k.
    Scalar eval_lower(Scalar t) const { return core_[1].value(t); }
    Scalar deriv(Scalar t) const { return deriv_at(0, t); }

    Scalar deriv2(Scalar t) const
    {
        using std::abs;
        using std::isinf;
        using std::pow;
        using std::sqrt;
        if (isinf(t))
            return Scalar(0);
        const Scalar s2 = Scalar(1) + t * t;
        const Scalar lam = lambda();
        if (abs(t) <= series_window()) {
            Scalar h, dh, d2h;
            core_[0].h_series(t, h, dh, d2h);
            const Scalar p = pow(s2, -lam / Scalar(2));
            const Scalar dp = -p * lam * t / s2;
            const Scalar d2p = p * (lam * lam * t * t - lam * (Scalar(1) - t * t)) / (s2 * s2);
            return normalization() * (d2p * h + Scalar(2) * dp * dh + p * d2h);
        }
        const Scalar g1 = deriv_at(0, t);
        const Scalar gm = core_[1].value(t);
        const Scalar gm1 = deriv_at(1, t);
        const Scalar q = Scalar(1) / sqrt(s2);
        const Scalar dq = -t * q / s2;
        const Scalar ck = c(k_);
        const Scalar num_d = lam * g1 - Scalar(3) * ck * (dq * gm + q * gm1);
        return (num_d - (Scalar(1) + Scalar(3) * t * t) * g1) / (t * s2);
    }

    // Kummer-side pieces, exposed for diagnostics and tests.
    Scalar big_lambda(Scalar t) const
    {
        return eval(t) / normalization();
    }

private:
    // G'_{k-level}: recurrence G' = (lambda G - 3 c G_{k-1} / sqrt(1+t^2)) / (t (1+t^2))
    // away from t = 0, power series near it.
    Scalar deriv_at(int level, Scalar t) const
    {
        using std::abs;
        using std::isinf;
        using std::pow;
        using std::sqrt;
        const detail::ProfileCore<Scalar>& cur = core_[level];
        if (isinf(t))
            return Scalar(0);
        const Scalar s2 = Scalar(1) + t * t;
        const Scalar lam = cur.lambda();
        if (abs(t) <= series_window()) {
            Scalar h, dh, d2h;
            cur.h_series(t, h, dh, d2h);
            const Scalar p = pow(s2, -lam / Scalar(2));
            return cur.normalization() * p * (dh - lam * t / s2 * h);
        }
        const Scalar g = cur.value(t);
        const Scalar gm = core_[level + 1].value(t);
        return (lam * g - Scalar(3) * c(cur.k()) * gm / sqrt(s2)) / (t * s2);
    }

    int k_;
    std::array<detail::ProfileCore<Scalar>, 3> core_;
    Scalar bound_ = 0;
};

// Shared double-precision profiles, built once per index.
const AngularProfile<double>& angular_profile(int k);

} // namespace fbp

#endif
