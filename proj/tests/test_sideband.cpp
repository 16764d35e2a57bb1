#include "helpers.hpp"
#include "oracles.hpp"

#include "opachain/sideband_model.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace opachain;
using opachain::ErrorKind;

TEST_CASE("true levels at zero pump are vacuum")
{
    const auto lv = true_levels(SqueezerParams(19.1, 0.425, 0.0));
    CHECK(lv.r_minus() == 1.0);
    CHECK(lv.r_plus() == 1.0);
}

TEST_CASE("true levels match closed-form oracle")
{
    const auto a = true_levels(SqueezerParams(20.1, 0.487, 0.1));
    CHECK(rel_err(a.r_minus(), oracle::tl_20_1_minus) < 1e-14);
    CHECK(rel_err(a.r_plus(), oracle::tl_20_1_plus) < 1e-14);
    CHECK(a.r_minus_db() == doctest::Approx(-2.86).epsilon(0.01));
    CHECK(a.r_plus_db() == doctest::Approx(9.65).epsilon(0.01));
    // measured -3.2 / 9.9 dB at 100 mW
    CHECK(std::abs(a.r_minus_db() - -3.2) < 0.5);
    CHECK(std::abs(a.r_plus_db() - 9.9) < 0.5);

    const auto b = true_levels(SqueezerParams(19.1, 0.425, 0.2));
    CHECK(rel_err(b.r_minus(), oracle::tl_19_1_minus) < 1e-14);
    CHECK(rel_err(b.r_plus(), oracle::tl_19_1_plus) < 1e-14);
}

TEST_CASE("squeezer parameters are validated")
{
    CHECK(error_kind([] { SqueezerParams(0.0, 0.4, 0.1); }) == ErrorKind::Domain);
    CHECK(error_kind([] { SqueezerParams(10.0, 1.0, 0.1); }) == ErrorKind::Domain);
    CHECK(error_kind([] { SqueezerParams(10.0, -0.1, 0.1); }) == ErrorKind::Domain);
    CHECK(error_kind([] { SqueezerParams(10.0, 0.4, -1.0); }) == ErrorKind::Domain);
    CHECK_FALSE(error_kind([] { SqueezerParams(10.0, 0.0, 0.0); }));
}

TEST_CASE("generated levels bracket vacuum")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ua(0.1, 60.0), ul(0.0, 0.95), up(0.0, 0.5);
    for (int i = 0; i < 2000; ++i)
    {
        const auto lv = true_levels(SqueezerParams(ua(rng), ul(rng), up(rng)));
        REQUIRE(lv.r_minus() <= 1.0);
        REQUIRE(lv.r_plus() >= 1.0);
        REQUIRE(lv.r_minus() > 0.0);
    }
}

TEST_CASE("quadrature levels reject inverted or non-positive values")
{
    CHECK(error_kind([] { QuadLevels(2.0, 1.0); }) == ErrorKind::Domain);
    CHECK(error_kind([] { QuadLevels(0.0, 1.0); }) == ErrorKind::Domain);
    CHECK(error_kind([] { QuadLevels(std::nan(""), 1.0); }) == ErrorKind::Domain);
    CHECK_FALSE(error_kind([] { QuadLevels(1.0, 1.0); }));
}

TEST_CASE("variance at phase")
{
    const QuadLevels lv(0.5, 2.0);
    auto v = variance_at_phase(lv, PhaseAngle(0.0));
    CHECK(v.vx == 0.5);
    CHECK(v.vp == 2.0);
    v = variance_at_phase(lv, PhaseAngle(std::numbers::pi / 4));
    CHECK(v.vx == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(v.vp == doctest::Approx(1.25).epsilon(1e-15));

    v = variance_at_phase(QuadLevels(0.5012, 1.9953), PhaseAngle(0.05));
    CHECK(rel_err(v.vx, oracle::vx_0_05) < 1e-14);
    CHECK(rel_err(v.vp, oracle::vp_0_05) < 1e-14);
}

TEST_CASE("variance sum is conserved and the model is pi-periodic")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ut(-20.0, 20.0), um(0.05, 1.0), us(0.0, 50.0);
    for (int i = 0; i < 5000; ++i)
    {
        const double rm = um(rng);
        const QuadLevels lv(rm, rm + us(rng));
        const double t = ut(rng);
        const auto v = variance_at_phase(lv, PhaseAngle(t));
        REQUIRE(rel_err(v.vx + v.vp, lv.r_minus() + lv.r_plus()) < 1e-12);
        const auto w = variance_at_phase(lv, PhaseAngle(t).canonical());
        REQUIRE(rel_err(w.vx, v.vx) < 1e-9);
        const double c = PhaseAngle(t).canonical().radians();
        REQUIRE(c >= 0.0);
        REQUIRE(c < std::numbers::pi);
    }
}

TEST_CASE("phase angle must be finite")
{
    CHECK(error_kind([] { (void)PhaseAngle(INFINITY); }) == ErrorKind::Domain);
}

TEST_CASE("dB conversions")
{
    CHECK(db_from_ratio(1.0) == 0.0);
    CHECK(db_from_ratio(0.501187) == doctest::Approx(-3.0).epsilon(1e-5));
    CHECK(rel_err(ratio_from_db(9.9), oracle::ratio_9_9_db) < 1e-14);
    CHECK(error_kind([] { db_from_ratio(0.0); }) == ErrorKind::Domain);
    CHECK(error_kind([] { db_from_ratio(-1.0); }) == ErrorKind::Domain);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(-40.0, 40.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double x = ud(rng);
        REQUIRE(std::abs(db_from_ratio(ratio_from_db(x)) - x) < 1e-12);
    }
}

TEST_CASE("nearly_equal uses a relative scale")
{
    CHECK(nearly_equal(1e6, 1e6 + 1e-4));
    CHECK_FALSE(nearly_equal(1.0, 1.0 + 1e-6));
    CHECK(nearly_equal(0.0, 1e-10));
}
