#include "helpers.hpp"
#include "oracles.hpp"

#include "opachain/opa_measurement.hpp"
#include "opachain/sideband_model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace opachain;

namespace
{
constexpr double kDeg = 180.0 / std::numbers::pi;
}

TEST_CASE("vacuum is a fixed point of finite-gain measurement")
{
    for (double g : {0.5, 1.0, 5.0, 200.0})
    {
        const auto m = measured_from_true(QuadLevels(1.0, 1.0), OpaGain(g));
        CHECK(m.r_minus_meas() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(m.r_plus_meas() == doctest::Approx(1.0).epsilon(1e-15));
    }
    const auto t = true_from_measured(MeasuredLevels(1.0, 1.0), OpaGain(5.0));
    CHECK(t.r_minus() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t.r_plus() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("finite-gain worked cases")
{
    const auto m20 = measured_from_true(QuadLevels(std::pow(10.0, -0.3), std::pow(10.0, 0.3)), OpaGain(20.0));
    CHECK(rel_err(m20.r_minus_meas(), oracle::meas_g20_minus) < 1e-14);
    CHECK(rel_err(m20.r_plus_meas(), oracle::meas_g20_plus) < 1e-14);
    CHECK(std::round(10.0 * db_from_ratio(m20.r_minus_meas())) / 10.0 == -3.0);

    const auto m80 = measured_from_true(QuadLevels(std::pow(10.0, -0.3), std::pow(10.0, 1.5)), OpaGain(80.0));
    CHECK(rel_err(m80.r_minus_meas(), oracle::meas_g80_minus) < 1e-14);
    CHECK(std::round(10.0 * db_from_ratio(m80.r_minus_meas())) / 10.0 == -3.0);

    const auto back = true_from_measured(MeasuredLevels(oracle::meas_g20_minus, oracle::meas_g20_plus), OpaGain(20.0));
    CHECK(rel_err(back.r_minus(), std::pow(10.0, -0.3)) < 1e-12);
    CHECK(rel_err(back.r_plus(), std::pow(10.0, 0.3)) < 1e-12);
}

TEST_CASE("correction errors")
{
    const MeasuredLevels m(0.6, 2.0);
    CHECK(error_kind([&] { true_from_measured(m, OpaGain(1.0)); }) == ErrorKind::SingularCorrection);
    CHECK(error_kind([&] { true_from_measured(m, OpaGain(0.5)); }) == ErrorKind::SingularCorrection);
    // G^2 R-' < R+' has no physical preimage.
    CHECK(error_kind([] { true_from_measured(MeasuredLevels(0.5, 30.0), OpaGain(2.0)); }) ==
          ErrorKind::UnphysicalInput);
    CHECK(error_kind([] { OpaGain(0.0); }) == ErrorKind::Domain);
    CHECK(error_kind([] { MeasuredLevels(2.0, 1.0); }) == ErrorKind::Domain);
}

TEST_CASE("effective phase deviation")
{
    CHECK(rel_err(effective_phase_deviation(OpaGain(200.0)) * kDeg, oracle::theta_g200_deg) < 1e-13);
    CHECK(effective_phase_deviation(OpaGain(1.0)) * kDeg == doctest::Approx(45.0).epsilon(1e-14));
    CHECK(rel_err(effective_phase_deviation(OpaGain(20.0)) * kDeg, oracle::theta_g20_deg) < 1e-13);
    CHECK(rel_err(effective_phase_deviation(OpaGain::from_db(23.0)) * kDeg, oracle::theta_23db_deg) < 1e-13);
}

TEST_CASE("gain dB round trip")
{
    CHECK(OpaGain::from_db(13.0).linear() == doctest::Approx(19.952623149688797).epsilon(1e-14));
    CHECK(OpaGain(80.0).db() == doctest::Approx(19.0309).epsilon(1e-5));
}

TEST_CASE("required gain on the dB grid and continuous")
{
    const auto lv33 = QuadLevels::from_db(-3.0, 3.0);
    const auto lv315 = QuadLevels::from_db(-3.0, 15.0);
    CHECK(rel_err(required_gain(lv33, 0.05).linear(), oracle::grid_gain_3_3) < 1e-12);
    CHECK(rel_err(required_gain(lv315, 0.05).linear(), oracle::grid_gain_3_15) < 1e-12);

    GainSearch continuous;
    continuous.step_db = 0.0;
    const auto g33 = required_gain(lv33, 0.05, continuous);
    const auto g315 = required_gain(lv315, 0.05, continuous);
    CHECK(rel_err(g33.linear(), oracle::min_gain_3_3) < 1e-9);
    CHECK(rel_err(g315.linear(), oracle::min_gain_3_15) < 1e-9);
    CHECK(squeezing_bias_db(lv33, g33) <= 0.05 + 1e-9);

    CHECK(required_gain(QuadLevels(1.0, 1.0), 0.01).linear() == 1.0);
    CHECK(error_kind([&] { required_gain(lv33, 0.0); }) == ErrorKind::Domain);
    GainSearch tight;
    tight.upper = 2.0;
    CHECK(error_kind([&] { required_gain(lv315, 0.05, tight); }) == ErrorKind::NoSolution);
}

TEST_CASE("required gain meets the tolerance and one step less does not")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> um(-10.0, -0.5), up(0.5, 25.0), ut(0.01, 0.5);
    for (int i = 0; i < 300; ++i)
    {
        const auto lv = QuadLevels::from_db(um(rng), up(rng));
        const double tol = ut(rng);
        const auto g = required_gain(lv, tol);
        REQUIRE(squeezing_bias_db(lv, g) <= tol);
        if (g.db() > 1.0)
            REQUIRE(squeezing_bias_db(lv, OpaGain::from_db(g.db() - 1.0)) > tol);
    }
}

TEST_CASE("sandwich and monotone approach")
{
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> um(0.01, 1.0), us(0.0, 100.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double rm = um(rng);
        const QuadLevels lv(rm, rm + us(rng));
        double prev = INFINITY;
        for (double g : {1.0, 10.0, 1e2, 1e4})
        {
            const auto m = measured_from_true(lv, OpaGain(g));
            REQUIRE(lv.r_minus() <= m.r_minus_meas() * (1 + 1e-15));
            REQUIRE(m.r_minus_meas() <= m.r_plus_meas() * (1 + 1e-15));
            REQUIRE(m.r_plus_meas() <= lv.r_plus() * (1 + 1e-15));
            REQUIRE(m.r_minus_meas() <= prev);
            prev = m.r_minus_meas();
        }
        REQUIRE(rel_err(measured_from_true(lv, OpaGain(1e8)).r_minus_meas(), lv.r_minus()) < 1e-12);
    }
}

TEST_CASE("inversion and phase-deviation equivalence")
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> um(-15.0, 0.0), up(0.0, 30.0), ug(0.2, 40.0);
    for (int i = 0; i < 10000; ++i)
    {
        const auto lv = QuadLevels::from_db(um(rng), up(rng));
        const auto g = OpaGain::from_db(ug(rng));
        const auto m = measured_from_true(lv, g);
        const auto back = true_from_measured(m, g);
        REQUIRE(rel_err(back.r_minus(), lv.r_minus()) < 1e-9);
        REQUIRE(rel_err(back.r_plus(), lv.r_plus()) < 1e-9);
        const auto v = variance_at_phase(lv, PhaseAngle(effective_phase_deviation(g)));
        REQUIRE(std::abs(v.vx - m.r_minus_meas()) / m.r_minus_meas() < 1e-12);
        REQUIRE(std::abs(v.vp - m.r_plus_meas()) / m.r_plus_meas() < 1e-12);
    }
}
