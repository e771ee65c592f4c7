#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "hvp/pointprocess.hpp"

using namespace hvp;

namespace {

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= static_cast<double>(xs.size() - 1);
    return m;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const Moments ma = moments(a), mb = moments(b);
    double c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
    c /= static_cast<double>(a.size() - 1);
    return c / std::sqrt(ma.var * mb.var);
}

}  // namespace

TEST(HypPpp, ZeroIntensityIsEmpty) {
    Rng rng(1);
    EXPECT_TRUE(sample_hyp_ppp(0.0, CenteredHypDisk{1.0}, rng).empty());
    EXPECT_TRUE(sample_hyp_ppp(0.0, Box{0, 0.5, 0, 0.5}, rng).empty());
}

TEST(HypPpp, RejectsWindowsTouchingTheBoundary) {
    Rng rng(1);
    EXPECT_THROW(sample_hyp_ppp(1.0, Box{0.0, 0.8, 0.0, 0.8}, rng), DomainError);
    EXPECT_THROW(sample_hyp_ppp(1.0, CenteredHypDisk{60.0}, rng), DomainError);
    EXPECT_THROW(sample_hyp_ppp(-1.0, CenteredHypDisk{1.0}, rng), DomainError);
}

TEST(HypPpp, MeanCountOnDisk) {
    const double rho = std::log(3.0);
    const double area = hyp_area(HypDisk{PoincarePoint::origin(), rho});
    EXPECT_NEAR(area, 4 * std::numbers::pi / 3, 1e-12);
    std::vector<double> counts;
    for (int i = 0; i < 10000; ++i) {
        Rng rng(derive_seed(7, i));
        const auto pts = sample_hyp_ppp(1.0, CenteredHypDisk{rho}, rng);
        for (const Vec2& p : pts) ASSERT_LE(p.norm(), 0.5);
        counts.push_back(static_cast<double>(pts.size()));
    }
    const Moments m = moments(counts);
    EXPECT_NEAR(m.mean, area, 3 * std::sqrt(area / 10000));
}

TEST(HypPpp, MeanCountOnBoxAndRadialProfile) {
    const Box box{0.2, 0.6, -0.3, 0.5};
    const double lambda = 5.0;
    const double expected = lambda * hyp_area(box);
    std::vector<double> counts;
    std::vector<double> inner;
    const Box sub{0.2, 0.4, -0.3, 0.1};
    for (int i = 0; i < 10000; ++i) {
        Rng rng(derive_seed(8, i));
        const auto pts = sample_hyp_ppp(lambda, box, rng);
        counts.push_back(static_cast<double>(pts.size()));
        double k = 0;
        for (const Vec2& p : pts) {
            ASSERT_TRUE(box.contains(p));
            if (sub.contains(p)) ++k;
        }
        inner.push_back(k);
    }
    EXPECT_NEAR(moments(counts).mean, expected, 3 * std::sqrt(expected / 10000));
    const double sub_expected = lambda * hyp_area(sub);
    EXPECT_NEAR(moments(inner).mean, sub_expected, 3 * std::sqrt(sub_expected / 10000));
    // Poisson: variance equals mean.
    EXPECT_NEAR(moments(counts).var / expected, 1.0, 0.05);
}

TEST(HypPpp, DisjointRegionsUncorrelated) {
    const double rho = 1.5;
    std::vector<double> left, right;
    for (int i = 0; i < 10000; ++i) {
        Rng rng(derive_seed(9, i));
        double l = 0, r = 0;
        for (const Vec2& p : sample_hyp_ppp(2.0, CenteredHypDisk{rho}, rng)) (p.x < 0 ? l : r) += 1;
        left.push_back(l);
        right.push_back(r);
    }
    EXPECT_LT(std::fabs(correlation(left, right)), 0.05);
}

TEST(HypPpp, WindowRestrictionMatchesSubWindow) {
    // Restricting B_H(o, 1.5) samples to B_H(o, 0.8) reproduces the count law on B_H(o, 0.8).
    const double small = 0.8;
    const double r_small = euclid_radius_of(small);
    const double mean = 3.0 * hyp_area(HypDisk{PoincarePoint::origin(), small});
    std::vector<int> hist(40, 0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(10, i));
        int k = 0;
        for (const Vec2& p : sample_hyp_ppp(3.0, CenteredHypDisk{1.5}, rng)) k += p.norm() <= r_small;
        hist[std::min(k, 39)]++;
    }
    boost::math::poisson_distribution<> pois(mean);
    double chi2 = 0;
    int dof = -1;
    for (int k = 0; k < 39; ++k) {
        const double e = n * boost::math::pdf(pois, k);
        if (e < 5) continue;
        chi2 += (hist[k] - e) * (hist[k] - e) / e;
        ++dof;
    }
    ASSERT_GT(dof, 3);
    EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(dof), 0.999));
}

TEST(EuclidPpp, MeanAndIndependentHalves) {
    Rng rng0(1);
    EXPECT_TRUE(sample_euclid_ppp(0.0, Box{0, 1, 0, 1}, rng0).empty());
    const int n = 10000;
    std::vector<double> total, a, b;
    std::vector<std::vector<int>> joint(20, std::vector<int>(20, 0));
    for (int i = 0; i < n; ++i) {
        Rng rng(derive_seed(11, i));
        double l = 0, r = 0;
        for (const Vec2& p : sample_euclid_ppp(10.0, Box{0, 1, 0, 1}, rng)) (p.x < 0.5 ? l : r) += 1;
        total.push_back(l + r);
        a.push_back(l);
        b.push_back(r);
        joint[std::min(19, static_cast<int>(l))][std::min(19, static_cast<int>(r))]++;
    }
    EXPECT_NEAR(moments(total).mean, 10.0, 3 * std::sqrt(10.0 / n));
    // Goodness of fit of each half against Poisson(5).
    boost::math::poisson_distribution<> pois(5.0);
    for (const auto* half : {&a, &b}) {
        std::vector<int> hist(20, 0);
        for (double x : *half) hist[std::min(19, static_cast<int>(x))]++;
        double chi2 = 0;
        int dof = -1;
        for (int k = 0; k < 19; ++k) {
            const double e = n * boost::math::pdf(pois, k);
            if (e < 5) continue;
            chi2 += (hist[k] - e) * (hist[k] - e) / e;
            ++dof;
        }
        EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(dof), 0.99));
    }
    // Independence: product law on the joint table.
    double chi2 = 0;
    int cells = 0;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            const double e = n * boost::math::pdf(pois, i) * boost::math::pdf(pois, j);
            if (e < 5) continue;
            chi2 += (joint[i][j] - e) * (joint[i][j] - e) / e;
            ++cells;
        }
    EXPECT_LT(chi2, boost::math::quantile(boost::math::chi_squared(cells - 1), 0.99));
}

TEST(Marks, ExtremesAndFraction) {
    Rng rng(12);
    std::vector<Vec2> pts;
    for (int i = 0; i < 100000; ++i) pts.push_back({rng.uniform(), rng.uniform()});
    Rng m1(1), m0(2), m3(3);
    EXPECT_EQ(mark(pts, 1.0, m1).count(Color::black), pts.size());
    EXPECT_EQ(mark(pts, 0.0, m0).count(Color::white), pts.size());
    const auto c = mark(pts, 0.3, m3);
    const double frac = static_cast<double>(c.count(Color::black)) / 1e5;
    EXPECT_NEAR(frac, 0.3, 3 * std::sqrt(0.3 * 0.7 / 1e5));
    EXPECT_THROW(mark(pts, 1.5, m3), DomainError);
}

TEST(Marks, RemarkIsMonotone) {
    SimulationParams params{50.0, 0.4, Metric::hyperbolic, CenteredHypDisk{1.0}, 99};
    const auto c = sample_configuration(params);
    const auto d = remark(c, 0.7);
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.colors[i] == Color::black) {
            EXPECT_EQ(d.colors[i], Color::black);
        }
    EXPECT_EQ(remark(d, 0.4).colors, c.colors);
}

TEST(Marks, ThinnedProcessIsPoisson) {
    // Black points alone: mean = variance = lambda p area.
    const double lambda = 4.0, p = 0.35;
    const double area = hyp_area(HypDisk{PoincarePoint::origin(), 1.2});
    std::vector<double> counts;
    for (int i = 0; i < 10000; ++i) {
        SimulationParams params{lambda, p, Metric::hyperbolic, CenteredHypDisk{1.2}, static_cast<std::uint64_t>(i)};
        counts.push_back(static_cast<double>(sample_configuration(params).count(Color::black)));
    }
    const Moments m = moments(counts);
    const double expected = lambda * p * area;
    EXPECT_NEAR(m.mean, expected, 3 * std::sqrt(expected / 10000));
    EXPECT_NEAR(m.var / expected, 1.0, 0.06);
}

TEST(Configuration, DeterministicAndValid) {
    SimulationParams params{20.0, 0.5, Metric::hyperbolic, Box{-0.5, 0.5, -0.5, 0.5}, 1234};
    const auto a = sample_configuration(params), b = sample_configuration(params);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.colors, b.colors);
    EXPECT_NO_THROW(a.validate());
    params.seed = 1235;
    EXPECT_NE(sample_configuration(params).points, a.points);

    SimulationParams euc{30.0, 0.5, Metric::euclidean, Box{0, 2, 0, 1}, 5};
    const auto e = sample_configuration(euc);
    EXPECT_NO_THROW(e.validate());
    euc.window = CenteredHypDisk{1.0};
    EXPECT_THROW(sample_configuration(euc), DomainError);
}

TEST(Configuration, ValidateCatchesDefects) {
    MarkedConfiguration c;
    c.window = Box{0, 1, 0, 1};
    c.points = {{0.5, 0.5}, {0.5, 0.5}};
    c.colors = {Color::black, Color::white};
    EXPECT_THROW(c.validate(), DegenerateInput);
    c.points = {{0.5, 0.5}, {1.5, 0.5}};
    EXPECT_THROW(c.validate(), DomainError);
    c.points = {{0.5, 0.5}};
    EXPECT_THROW(c.validate(), InternalError);
}

TEST(Configuration, DuplicateResampling) {
    std::vector<Vec2> pts{{0.1, 0.1}, {0.2, 0.2}, {0.1, 0.1}, {0.1, 0.1}};
    int calls = 0;
    detail::resample_duplicates(pts, [&] { return Vec2{0.5 + 0.01 * ++calls, 0.0}; });
    EXPECT_EQ(calls, 2);
    EXPECT_EQ(pts[0], (Vec2{0.1, 0.1}));
}
