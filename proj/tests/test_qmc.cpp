#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "surropt/qmc.hpp"

using namespace surropt;

namespace {

// van der Corput value of the Gray code of i: the first Sobol coordinate.
double radical_inverse_gray(std::uint64_t i)
{
    std::uint64_t g = i ^ (i >> 1);
    double v = 0.0, f = 0.5;
    while (g) {
        if (g & 1) v += f;
        g >>= 1;
        f *= 0.5;
    }
    return v;
}

} // namespace

TEST_SUITE("qmc") {

TEST_CASE("first coordinate is the radical inverse of the Gray code")
{
    SobolSequence seq(1);
    CHECK(seq.next_point()[0] == 0.5);
    CHECK(seq.next_point()[0] == 0.75);
    CHECK(seq.next_point()[0] == 0.25);
    for (std::uint64_t i = 4; i < 5000; ++i) CHECK(seq.next_point()[0] == radical_inverse_gray(i));
}

TEST_CASE("two-dimensional first point")
{
    SobolSequence seq(2);
    const Vector p = seq.next_point();
    CHECK(p[0] == 0.5);
    CHECK(p[1] == 0.5);
}

TEST_CASE("13 dimensions against reference values")
{
    // produced by scipy.stats.qmc.Sobol(d=13, scramble=False) after skipping the origin
    const double ref[6][13] = {
        {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5},
        {0.75, 0.25, 0.25, 0.25, 0.75, 0.75, 0.25, 0.75, 0.75, 0.75, 0.75, 0.75, 0.25},
        {0.25, 0.75, 0.75, 0.75, 0.25, 0.25, 0.75, 0.25, 0.25, 0.25, 0.25, 0.25, 0.75},
        {0.375, 0.375, 0.625, 0.875, 0.375, 0.125, 0.375, 0.875, 0.875, 0.625, 0.875, 0.375, 0.375},
        {0.875, 0.875, 0.125, 0.375, 0.875, 0.625, 0.875, 0.375, 0.375, 0.125, 0.375, 0.875, 0.875},
        {0.625, 0.125, 0.875, 0.625, 0.625, 0.875, 0.125, 0.125, 0.125, 0.375, 0.125, 0.625, 0.125},
    };
    SobolSequence seq(13);
    for (const auto& row : ref) {
        const Vector p = seq.next_point();
        for (int j = 0; j < 13; ++j) CHECK(p[j] == row[j]);
    }

    const double at1000[13] = {0.2197265625, 0.0966796875, 0.5185546875, 0.6767578125, 0.2802734375,
                               0.9072265625, 0.0458984375, 0.8994140625, 0.5009765625, 0.0693359375,
                               0.0849609375, 0.2548828125, 0.1611328125};
    SobolSequence far(13, 999);
    const Vector p = far.next_point();
    for (int j = 0; j < 13; ++j) CHECK(p[j] == at1000[j]);
}

TEST_CASE("offset and seek agree with sequential generation")
{
    SobolSequence a(7);
    std::vector<Vector> pts;
    for (int i = 0; i < 300; ++i) pts.push_back(a.next_point());
    SobolSequence b(7, 123);
    CHECK(b.next_point() == pts[123]);
    b.seek(5);
    CHECK(b.next_point() == pts[4]);
    CHECK(b.index() == 6);
    CHECK_THROWS_AS(b.seek(0), Error);
}

TEST_CASE("points lie in the half-open unit cube")
{
    SobolSequence seq(13);
    for (int i = 0; i < 2000; ++i) {
        const Vector p = seq.next_point();
        CHECK((p.array() >= 0.0).all());
        CHECK((p.array() < 1.0).all());
    }
}

TEST_CASE("dyadic balance of one-dimensional prefixes")
{
    for (int k = 1; k <= 10; ++k) {
        const std::uint64_t n = (std::uint64_t{1} << k) - 1;
        std::vector<int> counts(std::size_t{1} << k, 0);
        SobolSequence seq(1);
        for (std::uint64_t i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(seq.next_point()[0] * counts.size())];
        const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
        CHECK(*hi - *lo <= 1);
    }
}

TEST_CASE("exhaustion past 2^31 points")
{
    SobolSequence seq(2, kSobolMaxIndex - 2);
    CHECK_NOTHROW(seq.next_point());
    CHECK_THROWS_AS(seq.next_point(), SequenceExhausted);
}

TEST_CASE("unsupported dimension")
{
    CHECK_THROWS_AS(SobolSequence(0), Error);
    CHECK_THROWS_AS(SobolSequence(default_directions().max_dimension() + 1), Error);
    CHECK(default_directions().max_dimension() >= 64);
}

TEST_CASE("direction table parsing")
{
    const auto t = DirectionTable::parse("d s a m_i\n2 1 0 1\n3 2 1 1 3\n");
    CHECK(t.max_dimension() == 3);
    CHECK(t.entry(3).degree == 2);
    CHECK(t.entry(3).coefficients == 1);
    CHECK(t.entry(3).initial == std::vector<std::uint32_t>{1, 3});
    CHECK_THROWS_AS(DirectionTable::parse("2 2 0 1\n"), Error); // too few m values
    CHECK_THROWS_AS(DirectionTable::parse("2 1 0 2\n"), Error); // even m
}

TEST_CASE("sample_batch scaling")
{
    SobolSequence a(3), b(3);
    const auto one = sample_batch(a, 1, BoundsSpec::unit(3));
    CHECK(one.front() == b.next_point());

    SobolSequence c(1);
    Vector lo(1), hi(1);
    lo << 2.0;
    hi << 4.0;
    CHECK(sample_batch(c, 1, BoundsSpec(lo, hi)).front()[0] == 3.0);

    SobolSequence d(13);
    const auto pts = sample_batch(d, 400, BoundsSpec::unit(13));
    std::set<std::vector<double>> distinct;
    for (const auto& p : pts) distinct.insert(std::vector<double>(p.data(), p.data() + p.size()));
    CHECK(distinct.size() == 400);

    SobolSequence e(2);
    CHECK_THROWS_AS(sample_batch(e, 0, BoundsSpec::unit(2)), Error);
}

TEST_CASE("discrepancy proxy")
{
    SobolSequence seq(2);
    std::vector<Vector> sobol;
    for (int i = 0; i < 256; ++i) sobol.push_back(seq.next_point());
    const double d_sobol = discrepancy_check(sobol);

    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double mean = 0.0;
    for (int t = 0; t < 20; ++t) {
        std::vector<Vector> r;
        for (int i = 0; i < 256; ++i) r.push_back(Vector::NullaryExpr(2, [&](Eigen::Index) { return u(gen); }));
        mean += discrepancy_check(r) / 20.0;
    }
    CHECK(d_sobol < mean);

    std::vector<Vector> clumped(50, Vector::Constant(2, 0.3));
    CHECK(discrepancy_check(clumped) > 0.9);

    std::vector<Vector> strat{Vector::Constant(1, 0.25), Vector::Constant(1, 0.75)};
    std::vector<Vector> bad{Vector::Constant(1, 0.1), Vector::Constant(1, 0.11)};
    CHECK(discrepancy_check(strat) < discrepancy_check(bad));

    std::vector<Vector> mixed{Vector::Constant(1, 0.1), Vector::Constant(2, 0.1)};
    CHECK_THROWS_AS(discrepancy_check(mixed), Error);
    CHECK_THROWS_AS(discrepancy_check(std::span<const Vector>(strat.data(), 1)), Error);
}

} // TEST_SUITE
