#include "helpers.hpp"
#include "oracles.hpp"

#include "opachain/dispersion.hpp"
#include "opachain/sideband_model.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace opachain;

namespace
{
constexpr double kPi = std::numbers::pi;

std::vector<double> standard_grid()
{
    return wavelength_grid(1500.0, 1590.0, 0.1);
}
} // namespace

TEST_CASE("wavelength grid is inclusive and index based")
{
    const auto g = standard_grid();
    CHECK(g.size() == 901);
    CHECK(g.front() == 1500.0);
    CHECK(g.back() == doctest::Approx(1590.0).epsilon(1e-12));
    CHECK(error_kind([] { wavelength_grid(1500.0, 1590.0, 0.0); }) == ErrorKind::Domain);
    CHECK(error_kind([] { wavelength_grid(1590.0, 1500.0, 0.1); }) == ErrorKind::Domain);
    CHECK(wavelength_grid(1550.0, 1550.0, 0.1).size() == 1);
}

TEST_CASE("frequency and wavelength are inverses")
{
    CHECK(frequency_thz(1545.0) == doctest::Approx(oracle::f_lock_1545).epsilon(1e-15));
    CHECK(wavelength_nm(frequency_thz(1537.25)) == doctest::Approx(1537.25).epsilon(1e-15));
}

TEST_CASE("dispersion phase")
{
    CHECK(phase_at(DispersionModel(0.0, 194.0, 0.7), 190.0) == 0.7);
    CHECK(phase_at(DispersionModel(0.033, 194.0), 194.0) == 0.0);
    const DispersionModel m(0.033, 194.0);
    CHECK(phase_at(m, 194.0 + oracle::first_pi_offset_thz) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(phase_at(m, 194.0 - oracle::first_pi_offset_thz) == doctest::Approx(kPi).epsilon(1e-12));
    CHECK(error_kind([] { DispersionModel(0.03, 0.0); }) == ErrorKind::Domain);
}

TEST_CASE("spectrum values")
{
    const auto flat = spectrum(DispersionModel(0.0, 194.0, kPi / 2), QuadLevels(0.5, 2.0), standard_grid());
    for (const auto &p : flat.points())
        REQUIRE(p.value == doctest::Approx(0.5).epsilon(1e-15));

    const auto lv = QuadLevels::from_db(-3.2, 9.9);
    const DispersionModel m(0.033, 194.0, kPi / 2);
    const auto tr = spectrum(m, lv, standard_grid()).to_db();
    double lo = INFINITY, hi = -INFINITY;
    for (const auto &p : tr.points())
    {
        lo = std::min(lo, p.value);
        hi = std::max(hi, p.value);
        const double phi = phase_at(m, frequency_thz(p.wavelength_nm));
        const double want = lv.r_plus() * std::cos(phi) * std::cos(phi) + lv.r_minus() * std::sin(phi) * std::sin(phi);
        REQUIRE(rel_err(ratio_from_db(p.value), want) < 1e-12);
    }
    CHECK(lo == doctest::Approx(-3.2).epsilon(1e-3));
    CHECK(hi == doctest::Approx(9.9).epsilon(1e-3));
    CHECK(error_kind([&] { spectrum(m, lv, std::vector<double>{}); }) == ErrorKind::Domain);
}

TEST_CASE("spectrum is bounded and invariant under the sign flip")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ud(-0.1, 0.1), up(-10.0, 10.0), uf(185.0, 200.0);
    const auto lv = QuadLevels::from_db(-3.2, 9.9);
    for (int i = 0; i < 2000; ++i)
    {
        const double d = ud(rng), phi0 = up(rng), f = uf(rng);
        const double v = spectrum_value(DispersionModel(d, 194.0, phi0), lv, f);
        REQUIRE(v >= lv.r_minus());
        REQUIRE(v <= lv.r_plus());
        const double w = spectrum_value(DispersionModel(-d, 194.0, -phi0), lv, f);
        REQUIRE(rel_err(v, w) < 1e-9);
    }
}

TEST_CASE("trace validation and unit conversion")
{
    CHECK(error_kind([] { SpectrumTrace({}, TraceUnit::Ratio); }) == ErrorKind::Domain);
    CHECK(error_kind([] { SpectrumTrace({{1500.0, 1.0}, {1500.0, 1.0}}, TraceUnit::Ratio); }) ==
          ErrorKind::Validation);
    CHECK(error_kind([] { SpectrumTrace({{1500.0, -1.0}}, TraceUnit::Ratio); }) == ErrorKind::Validation);
    CHECK_FALSE(error_kind([] { SpectrumTrace({{1500.0, -3.0}}, TraceUnit::Db); }));
    const SpectrumTrace t({{1500.0, 2.0}, {1501.0, 0.5}}, TraceUnit::Ratio);
    const auto back = t.to_db().to_ratio();
    CHECK(back.ratio_values()[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(back.ratio_values()[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("extrema of a synthesized ripple alternate")
{
    const auto tr = spectrum(DispersionModel(0.033, 194.0, kPi / 4), QuadLevels::from_db(-3.2, 9.9), standard_grid());
    const auto ex = find_extrema(tr);
    REQUIRE(ex.size() >= 4);
    for (std::size_t i = 1; i < ex.size(); ++i)
    {
        CHECK(ex[i].kind != ex[i - 1].kind);
        CHECK(ex[i].wavelength_nm > ex[i - 1].wavelength_nm);
    }
}

TEST_CASE("dispersion estimated from synthesized traces")
{
    const auto lv = QuadLevels::from_db(-3.2, 9.9);
    for (double d : {0.0045, 0.033, 0.02, 0.06})
    {
        CAPTURE(d);
        const auto tr = spectrum(DispersionModel(d, 194.0, kPi / 4), lv, standard_grid());
        const auto est = estimate_dispersion(tr, 194.0);
        CHECK(std::abs(est.d_ps_per_nm - d) / d < 1e-3);
        CHECK(est.r_minus == doctest::Approx(lv.r_minus()).epsilon(1e-3));
        CHECK(est.r_plus == doctest::Approx(lv.r_plus()).epsilon(1e-3));
    }
    // The same data in dB gives the same answer.
    const auto tr = spectrum(DispersionModel(0.033, 194.0, kPi / 4), lv, standard_grid());
    CHECK(estimate_dispersion(tr.to_db(), 194.0).d_ps_per_nm == doctest::Approx(0.033).epsilon(1e-3));
}

TEST_CASE("sign of D is not identifiable")
{
    const auto lv = QuadLevels::from_db(-3.2, 9.9);
    const auto tr = spectrum(DispersionModel(-0.033, 194.0, -kPi / 4), lv, standard_grid());
    CHECK(estimate_dispersion(tr, 194.0).d_ps_per_nm == doctest::Approx(0.033).epsilon(1e-3));
}

TEST_CASE("dispersion estimate with measurement noise")
{
    const auto lv = QuadLevels::from_db(-3.2, 9.9);
    const auto clean = spectrum(DispersionModel(0.033, 194.0, kPi / 4), lv, standard_grid());
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 0.05);
    std::vector<TracePoint> pts(clean.points().begin(), clean.points().end());
    for (auto &p : pts)
        p.value *= std::exp(n(rng));
    const auto est = estimate_dispersion(SpectrumTrace(pts, TraceUnit::Ratio), 194.0);
    CHECK(std::abs(est.d_ps_per_nm - 0.033) / 0.033 < 0.01);
}

TEST_CASE("flat trace has no ripples")
{
    const auto flat = spectrum(DispersionModel(0.0, 194.0, kPi / 2), QuadLevels(0.5, 2.0), standard_grid());
    CHECK(error_kind([&] { estimate_dispersion(flat, 194.0); }) == ErrorKind::InsufficientRipples);
}

TEST_CASE("compensating fiber design")
{
    const std::vector<FiberSegment> link{{1.0, 0.033}};
    CHECK(design_dcf(link, oracle::dcf_rate, 0.0045) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(design_dcf(link, -0.0407, 0.0045) == doctest::Approx(0.7002).epsilon(1e-4));
    CHECK(design_dcf(link, -0.0407, 0.0) == doctest::Approx(0.8108).epsilon(1e-4));
    CHECK(design_dcf(link, oracle::dcf_rate, 0.0) == doctest::Approx(oracle::dcf_len_target0).epsilon(1e-12));
    CHECK(design_dcf(std::vector<FiberSegment>{}, -0.0407, 0.0) == 0.0);
    CHECK(error_kind([&] { design_dcf(link, 0.0407, 0.0); }) == ErrorKind::Design);
    CHECK(error_kind([&] { design_dcf(link, 0.0, 0.0); }) == ErrorKind::Design);

    const std::vector<FiberSegment> two{{2.0, 0.01}, {0.5, 0.026}};
    CHECK(net_dispersion(two) == doctest::Approx(0.033).epsilon(1e-14));
}

TEST_CASE("phase-maintained band")
{
    const FrequencyBand limits{frequency_thz(1590.0), frequency_thz(1500.0)};
    const auto full = phase_maintained_band(DispersionModel(0.0, 194.0), 194.0, 0.1, limits);
    CHECK(full.band.f_lo_thz == limits.f_lo_thz);
    CHECK(full.band.f_hi_thz == limits.f_hi_thz);

    const auto b45 = phase_maintained_band(DispersionModel(0.0045, 194.0), 194.0, 0.12, limits);
    CHECK(b45.toward_shorter_thz() == doctest::Approx(oracle::band_0045_0_12).epsilon(1e-12));
    CHECK(b45.toward_longer_thz() == doctest::Approx(oracle::band_0045_0_12).epsilon(1e-12));
    CHECK(b45.band.width_thz() == doctest::Approx(2.0).epsilon(0.05));
    CHECK(wavelength_nm(b45.band.f_hi_thz) < 1537.5);

    const auto b33 = phase_maintained_band(DispersionModel(0.033, 194.0), 194.0, 0.12, limits);
    CHECK(b33.toward_shorter_thz() == doctest::Approx(oracle::band_033_0_12).epsilon(1e-12));
    CHECK(b45.band.width_thz() / b33.band.width_thz() == doctest::Approx(std::sqrt(0.033 / 0.0045)).epsilon(1e-12));

    const auto lv = QuadLevels::from_db(-1.2, 7.1);
    CHECK(degradation_phase(lv) == doctest::Approx(oracle::deg_phase_1db).epsilon(1e-13));
    const double lock = frequency_thz(1545.0);
    const auto s45 = phase_maintained_band(DispersionModel(0.0045, 194.0), lock, degradation_phase(lv), limits);
    const auto s33 = phase_maintained_band(DispersionModel(0.033, 194.0), lock, degradation_phase(lv), limits);
    CHECK(s45.toward_shorter_thz() == doctest::Approx(oracle::band_0045_deg).epsilon(1e-12));
    CHECK(s33.toward_shorter_thz() == doctest::Approx(oracle::band_033_deg).epsilon(1e-12));

    CHECK(error_kind([&] { phase_maintained_band(DispersionModel(0.03, 194.0), 100.0, 0.1, limits); }) ==
          ErrorKind::Domain);
}

TEST_CASE("band edges sit exactly at the threshold")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ud(0.001, 0.1), ul(1520.0, 1570.0), um(0.02, 0.5);
    const FrequencyBand limits{frequency_thz(1700.0), frequency_thz(1400.0)};
    for (int i = 0; i < 500; ++i)
    {
        const DispersionModel m(ud(rng), 194.0);
        const double lock = frequency_thz(ul(rng));
        const double dev = um(rng);
        const auto b = phase_maintained_band(m, lock, dev, limits);
        const double p0 = phase_at(m, lock);
        for (double f : {b.band.f_lo_thz, b.band.f_hi_thz})
            if (f != limits.f_lo_thz && f != limits.f_hi_thz)
                REQUIRE(std::abs(std::abs(phase_at(m, f) - p0) - dev) < 1e-9);
        REQUIRE(b.band.f_lo_thz <= lock);
        REQUIRE(b.band.f_hi_thz >= lock);
    }
}
