#ifndef FBP_DATA_HPP
#define FBP_DATA_HPP

// Data triplets (f, delta_0, delta_1): a source on the rectangle and the
// lateral boundary data on Sigma_0 = {x0} x (0,1) and Sigma_1 = {x1} x (-1,0).
//
// Sources and boundary data are linear combinations of shared, immutable
// terms, so correctors and their scalar multiples can be added to a triplet
// without resampling anything.

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fbp/discretize.hpp"
#include "fbp/geometry.hpp"

namespace fbp {

// Axis-aligned rectangle [x_lo, x_hi] x [z_lo, z_hi].
struct Box {
    double x_lo = -std::numeric_limits<double>::infinity();
    double x_hi = std::numeric_limits<double>::infinity();
    double z_lo = -std::numeric_limits<double>::infinity();
    double z_hi = std::numeric_limits<double>::infinity();
};

// One term of a source f(x, z).
class SourceTerm {
public:
    virtual ~SourceTerm() = default;
    virtual double value(double x, double z) const = 0;
    // n-th x-derivative. The default uses fourth-order finite differences
    // (n <= 2), switching to one-sided stencils within two steps of x0 or x1
    // so that no sample is taken outside [x0, x1].
    virtual double dx(int n, double x, double z, double x0, double x1) const;
    // The term and its derivatives vanish outside this box.
    virtual Box support() const { return {}; }
    // Length below which the term is well resolved by 4-point Gauss rules.
    virtual double resolution() const { return std::numeric_limits<double>::infinity(); }
};

// A exp(-(x-xc)^2/(2 sx^2) - (z-zc)^2/(2 sz^2)); exact x-derivatives of any order.
class GaussianBump final : public SourceTerm {
public:
    GaussianBump(double amplitude, double xc, double zc, double sx, double sz);
    double value(double x, double z) const override;
    double dx(int n, double x, double z, double x0, double x1) const override;
    Box support() const override;
    double resolution() const override { return 0.5 * std::min(sx, sz); }

    double amplitude, xc, zc, sx, sz;
};

// sum_{m,n} c[m][n] x^m z^n
class PolynomialSource final : public SourceTerm {
public:
    explicit PolynomialSource(std::vector<std::vector<double>> coeffs);
    double value(double x, double z) const override;
    double dx(int n, double x, double z, double x0, double x1) const override;

    std::vector<std::vector<double>> coeffs;
};

// The source fbar_i generated by the localized singular profile i.
class FbarSource final : public SourceTerm {
public:
    FbarSource(int i, const Cutoff& cutoff) : i(i), cutoff(cutoff) {}
    double value(double x, double z) const override { return fbar(i, cutoff, x, z); }
    // d_x by fourth-order differences with steps below 1e-5 that shrink
    // near x0 and x1, where the source varies on the x-scale |z|^3.
    double dx(int n, double x, double z, double x0, double x1) const override;
    Box support() const override;
    double resolution() const override { return 2e-3; }

    int i;
    Cutoff cutoff;
};

// Bilinear interpolation of a sampled field; x-derivatives are interpolated
// from centered differences on the field's own grid.
class FieldSource final : public SourceTerm {
public:
    explicit FieldSource(Field f);
    double value(double x, double z) const override;
    double dx(int n, double x, double z, double x0, double x1) const override;
    double resolution() const override { return std::min(field.grid().hx(), field.grid().hz()); }

    Field field;

private:
    Field dx1_, dx2_;
};

// d_x^order of another term on the domain [x0, x1].
class DerivativeSource final : public SourceTerm {
public:
    DerivativeSource(std::shared_ptr<const SourceTerm> base, int order, double x0, double x1)
        : base(std::move(base)), order(order), x0(x0), x1(x1)
    {
    }
    double value(double x, double z) const override;
    double dx(int n, double x, double z, double x0, double x1) const override;
    Box support() const override { return base->support(); }
    double resolution() const override { return base->resolution(); }

    std::shared_ptr<const SourceTerm> base;
    int order;
    double x0, x1;
};

class Source {
public:
    Source() = default;
    explicit Source(std::shared_ptr<const SourceTerm> term, double coef = 1.0)
    {
        terms_.emplace_back(coef, std::move(term));
    }

    double value(double x, double z) const;
    double dx(int n, double x, double z, double x0, double x1) const;
    bool empty() const { return terms_.empty(); }

    // d_x^n f as a new source on the domain [x0, x1]
    Source derivative(int n, double x0, double x1) const;

    Source& operator+=(const Source& o);
    Source& operator*=(double s);
    const std::vector<std::pair<double, std::shared_ptr<const SourceTerm>>>& terms() const
    {
        return terms_;
    }

private:
    std::vector<std::pair<double, std::shared_ptr<const SourceTerm>>> terms_;
};

Source operator+(Source a, const Source& b);
Source operator-(Source a, const Source& b);
Source operator*(double s, Source a);

Field sample(const Source& f, const Grid& g);
// d_x^n f at the grid nodes
Field sample_dx(const Source& f, const Grid& g, int n = 1);

// Gauss-Legendre points of the grid cells that meet `box`: every cell is cut
// into pieces no longer than `resolution` in each direction, each with a
// 4 x 4 rule. The callback receives the cell (i, j), the local coordinates
// (a, b) in [0, 1]^2, the point and its weight.
using GaussVisitor = std::function<void(int i, int j, double a, double b, double x, double z, double w)>;
void for_each_gauss_point(const Grid& g, const Box& box, double resolution, const GaussVisitor& visit);

// Hat-function averages of d_x^n f,
//   L_k = int d_x^n f psi_k / int psi_k,
// with psi_k the bilinear nodal basis function. For data resolved by the
// grid this equals the nodal samples up to O(h^2); it stays accurate for
// sources that vary on scales below the grid spacing.
Field load(const Source& f, const Grid& g, int n = 0);
Field load(const SourceTerm& t, const Grid& g, int n = 0);

// One term of a boundary function delta(z).
class BoundaryTerm {
public:
    virtual ~BoundaryTerm() = default;
    // n-th derivative in z
    virtual double deriv(int n, double z) const = 0;
};

// sum_n c[n] z^n
class PolynomialBoundary final : public BoundaryTerm {
public:
    explicit PolynomialBoundary(std::vector<double> coeffs) : coeffs(std::move(coeffs)) {}
    double deriv(int n, double z) const override;

    std::vector<double> coeffs;
};

// Samples on a uniform grid of [lo, hi] (at least 6 points). Derivatives up
// to order 2 come from fourth-order differences of the samples; values
// between nodes are cubic Lagrange interpolants.
class SampledBoundary final : public BoundaryTerm {
public:
    SampledBoundary(double lo, double hi, std::vector<double> values);
    double deriv(int n, double z) const override;

    double lo, hi;
    std::vector<double> values;

private:
    std::array<std::vector<double>, 3> d_;
    double h_ = 0;
};

class Boundary {
public:
    Boundary() = default;
    explicit Boundary(std::shared_ptr<const BoundaryTerm> term, double coef = 1.0)
    {
        terms_.emplace_back(coef, std::move(term));
    }

    double value(double z) const { return deriv(0, z); }
    double deriv(int n, double z) const;
    bool empty() const { return terms_.empty(); }

    Boundary& operator+=(const Boundary& o);
    Boundary& operator*=(double s);

private:
    std::vector<std::pair<double, std::shared_ptr<const BoundaryTerm>>> terms_;
};

Boundary operator+(Boundary a, const Boundary& b);
Boundary operator*(double s, Boundary a);

Boundary polynomial_boundary(std::vector<double> coeffs);

struct DataTriplet {
    Source f;
    Boundary delta0;   // on z in [0, 1]
    Boundary delta1;   // on z in [-1, 0]

    DataTriplet& operator+=(const DataTriplet& o);
    DataTriplet& operator*=(double s);
};

DataTriplet operator+(DataTriplet a, const DataTriplet& b);
DataTriplet operator-(DataTriplet a, const DataTriplet& b);
DataTriplet operator*(double s, DataTriplet a);

// Residuals of the corner compatibility conditions
//   delta_i(0) = delta_i'(0) = delta_i''(0) = 0,
//   delta_i(+-1) = delta_i''(+-1) = 0,  f(x_i, 0) = 0,
// with `compatible` set when all of them are below tol.
struct Compatibility {
    std::array<double, 2> at_zero{};     // max(|d|, |d'|, |d''|) at z = 0
    std::array<double, 2> at_wall{};     // max(|d|, |d''|) at z = (-1)^i
    std::array<double, 2> source_corner{};   // |f(x_i, 0)|
    bool compatible = false;
};

Compatibility check_compatibility(const DataTriplet& d, double x0, double x1, double tol = 1e-10);

// Discrete surrogate of the data norm
//   ||f||_{H^1_x H^1_z} + ||d_z^3 f||_L2 + sum_i (||delta_i||_{H^5} + ||delta_i''/z||_{H^1_z weighted}).
double hnorm(const DataTriplet& d, const Grid& g);

} // namespace fbp

#endif
