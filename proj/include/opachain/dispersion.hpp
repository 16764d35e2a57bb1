#ifndef OPACHAIN_DISPERSION_HPP
#define OPACHAIN_DISPERSION_HPP

// Second-order chromatic dispersion between the two OPAs.
//
// The relative phase of squeezer and measuring amplifier varies parabolically
// around the center frequency f0:
//
//   phi(f) = pi D c ((f0 - f) / f0)^2 + phi0
//
// and the vacuum-normalized spectrum after the second OPA ripples as
//
//   R(f) = R+ cos^2(phi(f)) + R- sin^2(phi(f)).
//
// Units: D in ps/nm, c in nm/ps (so D c is dimensionless), frequencies in THz,
// wavelengths in nm. f = c / lambda with these units gives THz directly.

#include "opachain/sideband_model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opachain
{
inline constexpr double kSpeedOfLightNmPerPs = 2.99792458e5;

double frequency_thz(double wavelength_nm);
double wavelength_nm(double frequency_thz);

// Uniform grid start, start+step, ... up to stop (inclusive within step/1e6).
std::vector<double> wavelength_grid(double start_nm, double stop_nm, double step_nm);

class DispersionModel
{
public:
    DispersionModel(double d_ps_per_nm, double f0_thz, double phi0_rad = 0.0);

    double d_ps_per_nm() const noexcept { return d_; }
    double f0_thz() const noexcept { return f0_; }
    double phi0_rad() const noexcept { return phi0_; }

    DispersionModel with_phi0(double phi0_rad) const { return {d_, f0_, phi0_rad}; }

private:
    double d_;
    double f0_;
    double phi0_;
};

double phase_at(const DispersionModel &model, double f_thz);

// Dispersion-only part of phase_at, i.e. phase_at with phi0 = 0.
double dispersion_phase(const DispersionModel &model, double f_thz);

enum class TraceUnit
{
    Ratio,
    Db,
};

struct TracePoint
{
    double wavelength_nm = 0.0;
    double value = 0.0;

    bool operator==(const TracePoint &) const = default;
};

struct TraceMetadata
{
    double resolution_nm = 0.0;
    double smoothing_nm = 0.0;
    std::string label;

    bool operator==(const TraceMetadata &) const = default;
};

// Sampled spectrum, strictly increasing in wavelength, one unit for all points.
class SpectrumTrace
{
public:
    SpectrumTrace(std::vector<TracePoint> points, TraceUnit unit, TraceMetadata metadata = {});

    std::span<const TracePoint> points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    TraceUnit unit() const noexcept { return unit_; }
    const TraceMetadata &metadata() const noexcept { return metadata_; }

    SpectrumTrace to_ratio() const;
    SpectrumTrace to_db() const;
    std::vector<double> ratio_values() const;

    bool operator==(const SpectrumTrace &) const = default;

private:
    std::vector<TracePoint> points_;
    TraceUnit unit_;
    TraceMetadata metadata_;
};

// Ratio-valued trace of R(f) over the wavelength grid.
SpectrumTrace spectrum(const DispersionModel &model, const QuadLevels &levels,
                       std::span<const double> grid_nm);

double spectrum_value(const DispersionModel &model, const QuadLevels &levels, double f_thz);

enum class ExtremumKind
{
    Minimum,
    Maximum,
};

struct Extremum
{
    double wavelength_nm = 0.0;
    double frequency_thz = 0.0;
    double value = 0.0; // ratio, smoothed
    ExtremumKind kind = ExtremumKind::Minimum;
};

struct ExtremumOptions
{
    // Moving-average window in nm; no smoothing when it is below the grid pitch.
    double smoothing_nm = 0.1;
    // Hysteresis as a fraction of the smoothed trace's full range.
    double prominence_fraction = 0.01;
};

// Interior local extrema in wavelength order, positions refined by a
// three-point parabola.
std::vector<Extremum> find_extrema(const SpectrumTrace &trace, const ExtremumOptions &options = {});

struct DispersionEstimate
{
    // |D|: the spectrum is unchanged under (D, phi0) -> (-D, -phi0).
    double d_ps_per_nm = 0.0;
    double phi0_rad = 0.0;
    double r_minus = 1.0;
    double r_plus = 1.0;
    // Estimate from extremum spacing alone, when at least one side of f0
    // shows two ripple extrema.
    std::optional<double> ripple_estimate;
    std::size_t extrema = 0;
    double residual_rms = 0.0;
};

// Scans |D| with the levels and phi0 solved linearly, then refines
// (D, phi0, R-, R+) by least squares over the whole trace. The extremum
// ladder adds a seed. Needs >= 2 extrema. Only |D| is identifiable.
DispersionEstimate estimate_dispersion(const SpectrumTrace &trace, double f0_thz,
                                       const ExtremumOptions &options = {});

struct FiberSegment
{
    double length_m = 0.0;
    double d_ps_per_nm_per_m = 0.0;

    double dispersion_ps_per_nm() const noexcept { return length_m * d_ps_per_nm_per_m; }
};

double net_dispersion(std::span<const FiberSegment> segments);

// Length of compensating fiber (rate in ps/nm/m, opposite sign to the link)
// that leaves target_residual ps/nm. Clamped at 0.
double design_dcf(std::span<const FiberSegment> segments, double dcf_ps_per_nm_per_m,
                  double target_residual_ps_per_nm);

struct FrequencyBand
{
    double f_lo_thz = 0.0;
    double f_hi_thz = 0.0;

    double width_thz() const noexcept { return f_hi_thz - f_lo_thz; }
};

struct PhaseBand
{
    FrequencyBand band;
    double lock_thz = 0.0;

    // Extent above the lock frequency (shorter wavelengths) and below it.
    double toward_shorter_thz() const noexcept { return band.f_hi_thz - lock_thz; }
    double toward_longer_thz() const noexcept { return lock_thz - band.f_lo_thz; }
};

// Largest interval around lock_f where |phi(f) - phi(lock_f)| <= max_dev,
// clipped to `limits` (which also bounds the D = 0 case).
PhaseBand phase_maintained_band(const DispersionModel &model, double lock_thz, double max_dev_rad,
                                const FrequencyBand &limits);

// Phase offset from the squeezing point at which R rises degradation_db above R-.
double degradation_phase(const QuadLevels &levels, double degradation_db = 1.0);

} // namespace opachain

#endif // OPACHAIN_DISPERSION_HPP
