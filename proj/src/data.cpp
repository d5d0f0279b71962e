#include "fbp/data.hpp"

#include <algorithm>
#include <cmath>

namespace fbp {

namespace {

// Fourth-order x-derivative stencils of order 1 and 2, one-sided near the
// ends of [x0, x1].
template <class F>
double fd_dx(const F& f, int n, double x, double z, double x0, double x1)
{
    if (n == 0)
        return f(x, z);
    const double L = x1 - x0;
    if (n == 1) {
        const double h = 1e-4 * L;
        if (x - 2 * h >= x0 && x + 2 * h <= x1)
            return (-f(x + 2 * h, z) + 8 * f(x + h, z) - 8 * f(x - h, z) + f(x - 2 * h, z)) / (12 * h);
        const double s = x - 2 * h < x0 ? h : -h;
        return (-25 * f(x, z) + 48 * f(x + s, z) - 36 * f(x + 2 * s, z) + 16 * f(x + 3 * s, z)
                - 3 * f(x + 4 * s, z))
            / (12 * s);
    }
    if (n == 2) {
        const double h = 2e-3 * L;
        if (x - 2 * h >= x0 && x + 2 * h <= x1)
            return (-f(x + 2 * h, z) + 16 * f(x + h, z) - 30 * f(x, z) + 16 * f(x - h, z) - f(x - 2 * h, z))
                / (12 * h * h);
        const double s = x - 2 * h < x0 ? h : -h;
        return (45 * f(x, z) - 154 * f(x + s, z) + 214 * f(x + 2 * s, z) - 156 * f(x + 3 * s, z)
                + 61 * f(x + 4 * s, z) - 10 * f(x + 5 * s, z))
            / (12 * h * h);
    }
    throw DomainError("source: no finite-difference x-derivative of order " + std::to_string(n));
}

double falling(int m, int k)
{
    double r = 1;
    for (int q = 0; q < k; ++q)
        r *= m - q;
    return r;
}

// centered first differences, one-sided second order at the ends
std::vector<double> diff_samples(const std::vector<double>& v, double h)
{
    const std::size_t n = v.size();
    std::vector<double> d(n);
    for (std::size_t k = 1; k + 1 < n; ++k)
        d[k] = (v[k + 1] - v[k - 1]) / (2 * h);
    d[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
    d[n - 1] = (3 * v[n - 1] - 4 * v[n - 2] + v[n - 3]) / (2 * h);
    return d;
}

} // namespace

double SourceTerm::dx(int n, double x, double z, double x0, double x1) const
{
    return fd_dx([this](double a, double b) { return value(a, b); }, n, x, z, x0, x1);
}

// ---------------------------------------------------------------- terms

GaussianBump::GaussianBump(double amplitude, double xc, double zc, double sx, double sz)
    : amplitude(amplitude), xc(xc), zc(zc), sx(sx), sz(sz)
{
    if (!(sx > 0) || !(sz > 0))
        throw ConfigError("gaussian bump: widths must be positive");
}

double GaussianBump::value(double x, double z) const
{
    const double u = (x - xc) / sx, v = (z - zc) / sz;
    return amplitude * std::exp(-0.5 * (u * u + v * v));
}

double GaussianBump::dx(int n, double x, double z, double, double) const
{
    // d^n/du^n exp(-u^2/2) = (-1)^n He_n(u) exp(-u^2/2)
    const double u = (x - xc) / sx;
    double hm = 1, h = u;
    double he = 1;
    if (n == 1)
        he = u;
    for (int q = 1; q < n; ++q) {
        const double next = u * h - q * hm;
        hm = h;
        h = next;
        he = h;
    }
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    return sign * he * value(x, z) / std::pow(sx, n);
}

Box GaussianBump::support() const
{
    const double k = 9.0;
    return {xc - k * sx, xc + k * sx, zc - k * sz, zc + k * sz};
}

double FbarSource::dx(int n, double x, double z, double x0, double x1) const
{
    if (n != 1)
        return SourceTerm::dx(n, x, z, x0, x1);
    auto f = [&](double a) { return value(a, z); };
    const double room = std::min(x - x0, x1 - x);
    const double h = std::min(1e-5, room / 2.5);
    if (h >= 1e-9)
        return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    const double s = x - x0 < x1 - x ? 1e-6 : -1e-6;
    return (-25 * f(x) + 48 * f(x + s) - 36 * f(x + 2 * s) + 16 * f(x + 3 * s) - 3 * f(x + 4 * s)) / (12 * s);
}

Box FbarSource::support() const
{
    const double r = cutoff.r_outer;
    return {cutoff.center_x - r, cutoff.center_x + r, cutoff.center_z - r, cutoff.center_z + r};
}

PolynomialSource::PolynomialSource(std::vector<std::vector<double>> c) : coeffs(std::move(c)) {}

double PolynomialSource::value(double x, double z) const { return dx(0, x, z, 0, 1); }

double PolynomialSource::dx(int n, double x, double z, double, double) const
{
    double sum = 0;
    for (int m = int(coeffs.size()) - 1; m >= n; --m) {
        double row = 0;
        for (int q = int(coeffs[m].size()) - 1; q >= 0; --q)
            row = row * z + coeffs[m][q];
        sum += falling(m, n) * std::pow(x, m - n) * row;
    }
    return sum;
}

FieldSource::FieldSource(Field f) : field(std::move(f)), dx1_(diff_x(field)), dx2_(diff_x(dx1_)) {}

double FieldSource::value(double x, double z) const { return interpolate(field, x, z); }

double FieldSource::dx(int n, double x, double z, double x0, double x1) const
{
    if (n == 0)
        return value(x, z);
    if (n == 1)
        return interpolate(dx1_, x, z);
    if (n == 2)
        return interpolate(dx2_, x, z);
    return SourceTerm::dx(n, x, z, x0, x1);
}

double DerivativeSource::value(double x, double z) const { return base->dx(order, x, z, x0, x1); }

double DerivativeSource::dx(int n, double x, double z, double a, double b) const
{
    return base->dx(order + n, x, z, a, b);
}

// ---------------------------------------------------------------- Source

double Source::value(double x, double z) const
{
    double s = 0;
    for (const auto& [c, t] : terms_)
        s += c * t->value(x, z);
    return s;
}

double Source::dx(int n, double x, double z, double x0, double x1) const
{
    double s = 0;
    for (const auto& [c, t] : terms_)
        s += c * t->dx(n, x, z, x0, x1);
    return s;
}

Source Source::derivative(int n, double x0, double x1) const
{
    Source out;
    for (const auto& [c, t] : terms_)
        out.terms_.emplace_back(c, std::make_shared<DerivativeSource>(t, n, x0, x1));
    return out;
}

Source& Source::operator+=(const Source& o)
{
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
}

Source& Source::operator*=(double s)
{
    for (auto& term : terms_)
        term.first *= s;
    return *this;
}

Source operator+(Source a, const Source& b) { return a += b; }
Source operator-(Source a, const Source& b) { return a += (-1.0) * b; }
Source operator*(double s, Source a) { return a *= s; }

Field sample(const Source& f, const Grid& g)
{
    if (f.empty())
        return Field(g);
    return Field::sample(g, [&](double x, double z) { return f.value(x, z); });
}

Field sample_dx(const Source& f, const Grid& g, int n)
{
    if (f.empty())
        return Field(g);
    return Field::sample(g, [&](double x, double z) { return f.dx(n, x, z, g.x0(), g.x1()); });
}

namespace {

const double gauss_nodes[4] = {-0.86113631159405257522, -0.33998104358485626480, 0.33998104358485626480,
                               0.86113631159405257522};
const double gauss_weights[4] = {0.34785484513745385737, 0.65214515486254614263, 0.65214515486254614263,
                                 0.34785484513745385737};

} // namespace

void for_each_gauss_point(const Grid& g, const Box& box, double resolution, const GaussVisitor& visit)
{
    const double hz = g.hz();
    const int qz = std::isfinite(resolution) ? std::max(1, int(std::ceil(hz / resolution - 1e-9))) : 1;
    int i_lo = 0, i_hi = g.nx() - 2;
    if (box.x_lo > g.x0())
        i_lo = g.cell_x(box.x_lo);
    if (box.x_hi < g.x1())
        i_hi = g.cell_x(box.x_hi);
    const int j_lo = box.z_lo > -1 ? std::clamp(int(std::floor((box.z_lo + 1) / hz)), 0, g.nz() - 2) : 0;
    const int j_hi = box.z_hi < 1 ? std::clamp(int(std::floor((box.z_hi + 1) / hz)), 0, g.nz() - 2) : g.nz() - 2;
    for (int i = i_lo; i <= i_hi; ++i) {
        const double x_a = g.x(i), dx = g.dx(i);
        const int qx = std::isfinite(resolution) ? std::max(1, int(std::ceil(dx / resolution - 1e-9))) : 1;
        for (int p = 0; p < qx; ++p)
            for (int pg = 0; pg < 4; ++pg) {
                const double a = (p + 0.5 + 0.5 * gauss_nodes[pg]) / qx;
                const double wx = 0.5 * gauss_weights[pg] * dx / qx;
                const double x = x_a + a * dx;
                for (int j = j_lo; j <= j_hi; ++j) {
                    const double z_a = g.z(j);
                    for (int q = 0; q < qz; ++q)
                        for (int qg = 0; qg < 4; ++qg) {
                            const double b = (q + 0.5 + 0.5 * gauss_nodes[qg]) / qz;
                            const double wz = 0.5 * gauss_weights[qg] * hz / qz;
                            visit(i, j, a, b, x, z_a + b * hz, wx * wz);
                        }
                }
            }
    }
}

Field load(const SourceTerm& t, const Grid& g, int n)
{
    Field acc(g);
    for_each_gauss_point(g, t.support(), t.resolution(),
                         [&](int i, int j, double a, double b, double x, double z, double w) {
                             const double v = n == 0 ? t.value(x, z) : t.dx(n, x, z, g.x0(), g.x1());
                             if (v == 0)
                                 return;
                             const double s = v * w;
                             acc(i, j) += s * (1 - a) * (1 - b);
                             acc(i + 1, j) += s * a * (1 - b);
                             acc(i, j + 1) += s * (1 - a) * b;
                             acc(i + 1, j + 1) += s * a * b;
                         });
    const int nx = g.nx(), nz = g.nz();
    for (int i = 0; i < nx; ++i) {
        const double wx = 0.5 * ((i > 0 ? g.dx(i - 1) : 0.0) + (i < nx - 1 ? g.dx(i) : 0.0));
        for (int j = 0; j < nz; ++j) {
            const double wz = (j == 0 || j == nz - 1) ? 0.5 * g.hz() : g.hz();
            acc(i, j) /= wx * wz;
        }
    }
    return acc;
}

Field load(const Source& f, const Grid& g, int n)
{
    Field out(g);
    for (const auto& [c, t] : f.terms())
        out += c * load(*t, g, n);
    return out;
}

// ---------------------------------------------------------------- boundary

double PolynomialBoundary::deriv(int n, double z) const
{
    double s = 0;
    for (int m = int(coeffs.size()) - 1; m >= n; --m)
        s = s * z + falling(m, n) * coeffs[m];
    return s;
}

SampledBoundary::SampledBoundary(double lo, double hi, std::vector<double> v)
    : lo(lo), hi(hi), values(std::move(v))
{
    const int n = int(values.size());
    if (n < 6)
        throw ConfigError("boundary samples: need at least 6 points");
    if (!(hi > lo))
        throw ConfigError("boundary samples: empty interval");
    h_ = (hi - lo) / (n - 1);
    const auto& f = values;
    const double h = h_;
    std::vector<double> d1(n), d2(n);
    for (int k = 2; k < n - 2; ++k) {
        d1[k] = (-f[k + 2] + 8 * f[k + 1] - 8 * f[k - 1] + f[k - 2]) / (12 * h);
        d2[k] = (-f[k + 2] + 16 * f[k + 1] - 30 * f[k] + 16 * f[k - 1] - f[k - 2]) / (12 * h * h);
    }
    // one-sided fourth-order stencils; s = +1 at the left end, -1 at the right
    for (int side = 0; side < 2; ++side) {
        const int s = side == 0 ? 1 : -1;
        const int e = side == 0 ? 0 : n - 1;
        auto F = [&](int q) { return f[e + s * q]; };
        d1[e] = s * (-25 * F(0) + 48 * F(1) - 36 * F(2) + 16 * F(3) - 3 * F(4)) / (12 * h);
        d1[e + s] = s * (-3 * F(0) - 10 * F(1) + 18 * F(2) - 6 * F(3) + F(4)) / (12 * h);
        d2[e] = (45 * F(0) - 154 * F(1) + 214 * F(2) - 156 * F(3) + 61 * F(4) - 10 * F(5)) / (12 * h * h);
        d2[e + s] = (10 * F(0) - 15 * F(1) - 4 * F(2) + 14 * F(3) - 6 * F(4) + F(5)) / (12 * h * h);
    }
    d_ = {values, std::move(d1), std::move(d2)};
}

double SampledBoundary::deriv(int n, double z) const
{
    if (n > 2)
        return (deriv(n - 1, z + 0.5 * h_) - deriv(n - 1, z - 0.5 * h_)) / h_;
    const auto& v = d_[n];
    const int m = int(v.size());
    const double s = std::clamp((z - lo) / h_, 0.0, double(m - 1));
    const int k = std::clamp(int(std::floor(s)) - 1, 0, m - 4);
    const double u = s - k;   // position relative to node k, in [0, 3]
    double out = 0;
    for (int a = 0; a < 4; ++a) {
        double w = 1;
        for (int b = 0; b < 4; ++b)
            if (b != a)
                w *= (u - b) / double(a - b);
        out += w * v[k + a];
    }
    return out;
}

double Boundary::deriv(int n, double z) const
{
    double s = 0;
    for (const auto& [c, t] : terms_)
        s += c * t->deriv(n, z);
    return s;
}

Boundary& Boundary::operator+=(const Boundary& o)
{
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
}

Boundary& Boundary::operator*=(double s)
{
    for (auto& term : terms_)
        term.first *= s;
    return *this;
}

Boundary operator+(Boundary a, const Boundary& b) { return a += b; }
Boundary operator*(double s, Boundary a) { return a *= s; }

Boundary polynomial_boundary(std::vector<double> coeffs)
{
    return Boundary(std::make_shared<PolynomialBoundary>(std::move(coeffs)));
}

// ---------------------------------------------------------------- triplets

DataTriplet& DataTriplet::operator+=(const DataTriplet& o)
{
    f += o.f;
    delta0 += o.delta0;
    delta1 += o.delta1;
    return *this;
}

DataTriplet& DataTriplet::operator*=(double s)
{
    f *= s;
    delta0 *= s;
    delta1 *= s;
    return *this;
}

DataTriplet operator+(DataTriplet a, const DataTriplet& b) { return a += b; }
DataTriplet operator-(DataTriplet a, const DataTriplet& b) { return a += (-1.0) * b; }
DataTriplet operator*(double s, DataTriplet a) { return a *= s; }

Compatibility check_compatibility(const DataTriplet& d, double x0, double x1, double tol)
{
    Compatibility c;
    const Boundary* del[2] = {&d.delta0, &d.delta1};
    const double wall[2] = {1.0, -1.0};
    const double xi[2] = {x0, x1};
    bool ok = true;
    for (int i = 0; i < 2; ++i) {
        const Boundary& b = *del[i];
        c.at_zero[i] = std::max({std::abs(b.deriv(0, 0)), std::abs(b.deriv(1, 0)), std::abs(b.deriv(2, 0))});
        c.at_wall[i] = std::max(std::abs(b.deriv(0, wall[i])), std::abs(b.deriv(2, wall[i])));
        c.source_corner[i] = std::abs(d.f.value(xi[i], 0.0));
        ok = ok && c.at_zero[i] <= tol && c.at_wall[i] <= tol && c.source_corner[i] <= tol;
    }
    c.compatible = ok;
    return c;
}

namespace {

double l2_1d(const std::vector<double>& v, double h)
{
    std::vector<double> sq(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        sq[k] = v[k] * v[k];
    return trapezoid(sq, h);
}

double weighted_1d(const std::vector<double>& v, const std::vector<double>& z, double h)
{
    std::vector<double> sq(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        sq[k] = std::abs(z[k]) * v[k] * v[k];
    return std::sqrt(trapezoid(sq, h));
}

double boundary_norm(const Boundary& b, double lo, double hi)
{
    const int n = 401;
    const double h = (hi - lo) / (n - 1);
    std::vector<double> z(n);
    std::array<std::vector<double>, 6> d;
    for (int k = 0; k < 3; ++k)
        d[k].resize(n);
    for (int q = 0; q < n; ++q) {
        z[q] = lo + q * h;
        for (int k = 0; k < 3; ++k)
            d[k][q] = b.deriv(k, z[q]);
    }
    for (int k = 3; k < 6; ++k)
        d[k] = diff_samples(d[k - 1], h);
    double h5 = 0;
    for (int k = 0; k < 6; ++k)
        h5 += l2_1d(d[k], h);
    // delta''/z, with the value d'''(0) at the end of the interval touching 0
    std::vector<double> q(n);
    const int zero = lo == 0 ? 0 : n - 1;
    for (int k = 0; k < n; ++k)
        q[k] = k == zero ? d[3][k] : d[2][k] / z[k];
    return std::sqrt(h5) + weighted_1d(q, z, h) + weighted_1d(diff_samples(q, h), z, h);
}

} // namespace

double hnorm(const DataTriplet& d, const Grid& g)
{
    double out = 0;
    if (!d.f.empty()) {
        const Field F = sample(d.f, g);
        const Field Fx = sample_dx(d.f, g, 1);
        const Field Fz = diff_z(F);
        const Field Fxz = diff_z(Fx);
        const double a = l2_norm(F), b = l2_norm(Fx), c = l2_norm(Fz), e = l2_norm(Fxz);
        out += std::sqrt(a * a + b * b + c * c + e * e) + l2_norm(diff_z(diff_zz(F)));
    }
    if (!d.delta0.empty())
        out += boundary_norm(d.delta0, 0.0, 1.0);
    if (!d.delta1.empty())
        out += boundary_norm(d.delta1, -1.0, 0.0);
    return out;
}

} // namespace fbp
