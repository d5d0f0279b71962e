#include <cmath>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <gtest/gtest.h>

#include "fbp/errors.hpp"
#include "fbp/specfun.hpp"
#include "fbp/verify.hpp"

using namespace fbp;

namespace {

struct Reference {
    int k;
    double t, value, deriv;
};

// tests/oracles/angular_oracle.py, 80-digit mpmath
const Reference references[] = {
    {-2, -3, 0.58468625106751753, -0.22808831875926991},
    {-2, 5, -0.015915235490986441, 0.10393267847965633},
    {-1, -1.5, 0.66227037339967916, -0.24190901424102974},
    {-1, 2, 2.9644370515332619, -0.32620754852715673},
    {0, -7, 0.99567830139280611, -0.0011191461329438545},
    {0, -1.5, 0.95215382046146203, -0.041139647317233369},
    {0, 0.5, 0.46241078560828402, -0.46950606045530338},
    {0, 1, 0.25446690986637633, -0.34877926300329198},
    {0, 7, 1.1925748693856147e-19, -1.997600851883901e-18},
    {1, -0.5, -4.9020762261210491, -4.5235579814639306},
    {1, 2, -0.011243773166299372, 0.045942489758407712},
    {2, 0.5, 22.468887722802307, -91.440649097946305},
    {2, 3, 1.7746371424683211e-5, -0.00011908478920019055},
    {3, -3, -0.1364758024772313, 0.24067986964752307},
    {3, 1, -15.094398898865905, 105.70283200135878},
};

} // namespace

TEST(Gamma, MatchesBoostOnPositiveAndNegativeArguments)
{
    for (double x : {0.1, 1.0 / 6, 1.0 / 3, 0.5, 1.0, 2.5, 7.25, 17.0, -1.0 / 3, -0.5, -2.5, -7.0 / 6})
        EXPECT_NEAR(fbp::gamma(x) / boost::math::tgamma(x), 1.0, 1e-13) << "x = " << x;
}

TEST(Gamma, FrozenValues)
{
    EXPECT_NEAR(fbp::gamma(1.0 / 3), 2.6789385347077476337, 1e-14);
    EXPECT_NEAR(fbp::gamma(-1.0 / 3), -4.0623538182792012508, 1e-14);
}

TEST(Kummer, FrozenValues)
{
    EXPECT_NEAR(kummer_m(-1.0 / 6, 2.0 / 3, -3.0), 1.4266009738588240445, 1e-13);
    EXPECT_NEAR(kummer_m(5.0 / 6, 2.0 / 3, 20.0) / 957531480.05562419258, 1.0, 1e-12);
    EXPECT_NEAR(kummer_m(-7.0 / 6, 2.0 / 3, -38.0) / 102.86654869142637121, 1.0, 1e-11);
}

TEST(Kummer, MatchesBoost)
{
    for (double a : {-7.0 / 6, -1.0 / 6, 5.0 / 6})
        for (double b : {2.0 / 3, 4.0 / 3})
            for (double z : {-20.0, -3.0, -0.5, 0.0, 0.5, 3.0, 15.0}) {
                const double ref = boost::math::hypergeometric_1F1(a, b, z);
                EXPECT_NEAR(kummer_m(a, b, z), ref, 1e-11 * std::max(1.0, std::abs(ref)))
                    << "a=" << a << " b=" << b << " z=" << z;
            }
}

TEST(AngularProfile, ValueAtOriginMatchesGammaFormula)
{
    for (int k = AngularProfile<double>::k_min; k <= AngularProfile<double>::k_max; ++k) {
        const double ref = std::pow(9.0, 1.0 / 6 + k) * boost::math::tgamma(1.0 / 3) / boost::math::tgamma(1.0 / 6 - k);
        EXPECT_NEAR(angular_profile(k).eval(0) / ref, 1.0, 1e-12) << "k = " << k;
    }
    EXPECT_NEAR(angular_profile(0).eval(0), 0.69412120140619186, 1e-14);
}

TEST(AngularProfile, MatchesArbitraryPrecisionReference)
{
    for (const Reference& r : references) {
        const AngularProfile<double>& p = angular_profile(r.k);
        EXPECT_NEAR(p.eval(r.t), r.value, 1e-8 * std::max(1.0, std::abs(r.value))) << "k=" << r.k << " t=" << r.t;
        EXPECT_NEAR(p.deriv(r.t), r.deriv, 1e-7 * std::max(1.0, std::abs(r.deriv))) << "k=" << r.k << " t=" << r.t;
    }
}

TEST(AngularProfile, LimitsAndMonotonicity)
{
    const AngularProfile<double>& g = angular_profile(0);
    EXPECT_DOUBLE_EQ(g.eval(-INFINITY), 1.0);
    EXPECT_DOUBLE_EQ(g.eval(INFINITY), 0.0);
    EXPECT_NEAR(g.eval(-200), 1.0, 1e-4);
    double prev = g.eval(-7);
    for (int i = -699; i <= 700; ++i) {
        const double v = g.eval(i * 1e-2);
        ASSERT_LT(v, prev) << "t = " << i * 1e-2;
        prev = v;
    }
}

TEST(AngularProfile, ContinuousAcrossSwitchPoints)
{
    for (int k = -2; k <= 3; ++k) {
        const AngularProfile<double>& p = angular_profile(k);
        for (double t : {p.t_switch(), -p.t_switch(), p.series_window(), -p.series_window()}) {
            const double a = p.eval(t * (1 - 1e-12)), b = p.eval(t * (1 + 1e-12));
            EXPECT_NEAR(a, b, 1e-8 * std::max(1.0, std::abs(a))) << "k=" << k << " t=" << t;
            const double da = p.deriv(t * (1 - 1e-12)), db = p.deriv(t * (1 + 1e-12));
            EXPECT_NEAR(da, db, 1e-7 * std::max(1.0, std::abs(da))) << "k=" << k << " t=" << t;
        }
    }
}

TEST(AngularProfile, SecondDerivativeMatchesDifferences)
{
    for (int k : {0, 1})
        for (double t : {-4.0, -1.0, -0.3, 0.0, 0.3, 1.0, 2.5}) {
            const AngularProfile<double>& p = angular_profile(k);
            const double h = 1e-4;
            const double fd = (p.deriv(t + h) - p.deriv(t - h)) / (2 * h);
            EXPECT_NEAR(p.deriv2(t), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "k=" << k << " t=" << t;
        }
}

TEST(AngularProfile, RecurrenceCoefficients)
{
    EXPECT_DOUBLE_EQ(AngularProfile<double>::c(0), 0.25);
    EXPECT_DOUBLE_EQ(AngularProfile<double>::c(1), -35.0 / 4);
    EXPECT_LE(recurrence_residual(0), 1e-7);
    EXPECT_LE(recurrence_residual(1), 1e-7);
}

TEST(AngularProfile, KummerSideOde)
{
    EXPECT_LE(ode_residual(), 1e-4);
}

TEST(AngularProfile, UnsupportedIndexThrows)
{
    EXPECT_THROW(AngularProfile<double>(4), DomainError);
    EXPECT_THROW(AngularProfile<double>(-3), DomainError);
    EXPECT_THROW(angular_profile(9), DomainError);
}

TEST(AngularProfile, LongDoubleAgreesWithDouble)
{
    const AngularProfile<long double> q(0);
    for (double t : {-5.0, -1.0, 0.0, 0.7, 3.0})
        EXPECT_NEAR(double(q.eval(t)), angular_profile(0).eval(t), 1e-12);
}
