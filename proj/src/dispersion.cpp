#include "opachain/dispersion.hpp"

#include "opachain/errors.hpp"
#include "opachain/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace opachain
{
namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kMaxScanSteps = 20000.0;
constexpr std::size_t kRefinedSeeds = 4;

double wrap_pi(double phase)
{
    double r = std::fmod(phase, kPi);
    return r < 0.0 ? r + kPi : r;
}

struct Sample
{
    double f;
    double x; // ((f0 - f)/f0)^2
    double value;
};

// For fixed D the ripple is linear in (A, B1, B2):
//   R = A + B1 cos 2t + B2 sin 2t,  t = pi D c x,
// with R+- = A +- |B| and phi0 = atan2(-B2, B1) / 2.
struct HarmonicFit
{
    double r_plus = 1.0;
    double r_minus = 1.0;
    double phi0 = 0.0;
    double cost = std::numeric_limits<double>::infinity();
};

HarmonicFit solve_harmonic(std::span<const Sample> samples, double dc)
{
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    double vv = 0.0;
    for (const auto &s : samples)
    {
        const double t = 2.0 * kPi * dc * s.x;
        const Eigen::Vector3d basis(1.0, std::cos(t), std::sin(t));
        m.noalias() += basis * basis.transpose();
        b.noalias() += basis * s.value;
        vv += s.value * s.value;
    }
    HarmonicFit out;
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(m);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 1e-12 * m.trace()))
        return out;
    const Eigen::Vector3d coef = ldlt.solve(b);
    const double amp = std::hypot(coef[1], coef[2]);
    out.r_plus = coef[0] + amp;
    out.r_minus = coef[0] - amp;
    out.phi0 = 0.5 * std::atan2(-coef[2], coef[1]);
    out.cost = std::max(0.0, vv - coef.dot(b));
    return out;
}

// Pooled slope of x against extremum index on each side of f0, using a
// common slope and a per-side intercept.
std::optional<double> ripple_ladder(std::span<const Extremum> extrema, double f0, double vertex_guard)
{
    std::vector<double> sides[2];
    for (const auto &e : extrema)
    {
        const double df = f0 - e.frequency_thz;
        if (std::abs(df) < vertex_guard)
            continue;
        sides[df > 0.0 ? 0 : 1].push_back((df / f0) * (df / f0));
    }
    double sxy = 0.0, sxx = 0.0;
    bool usable = false;
    for (auto &side : sides)
    {
        if (side.size() < 2)
            continue;
        usable = true;
        std::sort(side.begin(), side.end());
        const double n = static_cast<double>(side.size());
        const double mean_j = (n - 1.0) / 2.0;
        const double mean_x = std::accumulate(side.begin(), side.end(), 0.0) / n;
        for (std::size_t j = 0; j < side.size(); ++j)
        {
            const double dj = static_cast<double>(j) - mean_j;
            sxy += dj * (side[j] - mean_x);
            sxx += dj * dj;
        }
    }
    if (!usable || !(sxy > 0.0))
        return std::nullopt;
    // Adjacent extrema are pi/2 apart in phase: pi D c dx = pi/2.
    const double slope = sxy / sxx;
    return 1.0 / (2.0 * kSpeedOfLightNmPerPs * slope);
}

} // namespace

double frequency_thz(double wavelength_nm)
{
    if (!(std::isfinite(wavelength_nm) && wavelength_nm > 0.0))
        fail(ErrorKind::Domain, "wavelength must be > 0 nm");
    return kSpeedOfLightNmPerPs / wavelength_nm;
}

double wavelength_nm(double frequency_thz)
{
    if (!(std::isfinite(frequency_thz) && frequency_thz > 0.0))
        fail(ErrorKind::Domain, "frequency must be > 0 THz");
    return kSpeedOfLightNmPerPs / frequency_thz;
}

std::vector<double> wavelength_grid(double start_nm, double stop_nm, double step_nm)
{
    if (!(std::isfinite(step_nm) && step_nm > 0.0))
        fail(ErrorKind::Domain, "grid step must be > 0 nm");
    if (!(std::isfinite(start_nm) && std::isfinite(stop_nm) && start_nm > 0.0 && stop_nm >= start_nm))
        fail(ErrorKind::Domain, "grid needs 0 < start <= stop");
    const auto n = static_cast<std::size_t>(std::floor((stop_nm - start_nm) / step_nm + 1e-6)) + 1;
    if (n > 10'000'000)
        fail(ErrorKind::Domain, "grid has too many points");
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = start_nm + static_cast<double>(i) * step_nm;
    return grid;
}

DispersionModel::DispersionModel(double d_ps_per_nm, double f0_thz, double phi0_rad)
    : d_(d_ps_per_nm), f0_(f0_thz), phi0_(phi0_rad)
{
    if (!std::isfinite(d_ps_per_nm))
        fail(ErrorKind::Domain, "dispersion must be finite");
    if (!(std::isfinite(f0_thz) && f0_thz > 0.0))
        fail(ErrorKind::Domain, "center frequency must be > 0 THz");
    if (!std::isfinite(phi0_rad))
        fail(ErrorKind::Domain, "phase offset must be finite");
}

double dispersion_phase(const DispersionModel &model, double f_thz)
{
    if (!(f_thz > 0.0))
        fail(ErrorKind::Domain, "frequency must be > 0 THz");
    const double u = (model.f0_thz() - f_thz) / model.f0_thz();
    return kPi * model.d_ps_per_nm() * kSpeedOfLightNmPerPs * u * u;
}

double phase_at(const DispersionModel &model, double f_thz)
{
    return dispersion_phase(model, f_thz) + model.phi0_rad();
}

SpectrumTrace::SpectrumTrace(std::vector<TracePoint> points, TraceUnit unit, TraceMetadata metadata)
    : points_(std::move(points)), unit_(unit), metadata_(std::move(metadata))
{
    if (points_.empty())
        fail(ErrorKind::Domain, "spectrum trace needs at least one point");
    for (std::size_t i = 0; i < points_.size(); ++i)
    {
        const auto &p = points_[i];
        if (!(std::isfinite(p.wavelength_nm) && p.wavelength_nm > 0.0 && std::isfinite(p.value)))
        {
            std::ostringstream os;
            os << "trace point " << i << " is not finite/positive";
            fail(ErrorKind::Validation, os.str());
        }
        if (unit_ == TraceUnit::Ratio && !(p.value > 0.0))
        {
            std::ostringstream os;
            os << "trace point " << i << " has non-positive ratio " << p.value;
            fail(ErrorKind::Validation, os.str());
        }
        if (i > 0 && !(p.wavelength_nm > points_[i - 1].wavelength_nm))
        {
            std::ostringstream os;
            os << "trace wavelengths not strictly increasing at point " << i;
            fail(ErrorKind::Validation, os.str());
        }
    }
}

SpectrumTrace SpectrumTrace::to_ratio() const
{
    if (unit_ == TraceUnit::Ratio)
        return *this;
    std::vector<TracePoint> pts(points_);
    for (auto &p : pts)
        p.value = ratio_from_db(p.value);
    return {std::move(pts), TraceUnit::Ratio, metadata_};
}

SpectrumTrace SpectrumTrace::to_db() const
{
    if (unit_ == TraceUnit::Db)
        return *this;
    std::vector<TracePoint> pts(points_);
    for (auto &p : pts)
        p.value = db_from_ratio(p.value);
    return {std::move(pts), TraceUnit::Db, metadata_};
}

std::vector<double> SpectrumTrace::ratio_values() const
{
    std::vector<double> out;
    out.reserve(points_.size());
    for (const auto &p : points_)
        out.push_back(unit_ == TraceUnit::Ratio ? p.value : ratio_from_db(p.value));
    return out;
}

double spectrum_value(const DispersionModel &model, const QuadLevels &levels, double f_thz)
{
    const double c = std::cos(phase_at(model, f_thz));
    const double c2 = c * c;
    return levels.r_plus() * c2 + levels.r_minus() * (1.0 - c2);
}

SpectrumTrace spectrum(const DispersionModel &model, const QuadLevels &levels,
                       std::span<const double> grid_nm)
{
    if (grid_nm.empty())
        fail(ErrorKind::Domain, "spectrum grid is empty");
    std::vector<TracePoint> pts;
    pts.reserve(grid_nm.size());
    for (double wl : grid_nm)
    {
        // Convex combination; clamp away rounding outside [R-, R+].
        const double v = std::clamp(spectrum_value(model, levels, frequency_thz(wl)),
                                    levels.r_minus(), levels.r_plus());
        pts.push_back({wl, v});
    }
    return {std::move(pts), TraceUnit::Ratio};
}

std::vector<Extremum> find_extrema(const SpectrumTrace &trace, const ExtremumOptions &options)
{
    const auto pts = trace.points();
    const std::vector<double> raw = trace.ratio_values();
    const std::size_t n = raw.size();
    if (n < 3)
        return {};

    std::vector<double> v(n);
    const double half = 0.5 * options.smoothing_nm * (1.0 + 1e-9);
    for (std::size_t i = 0, lo = 0, hi = 0; i < n; ++i)
    {
        while (pts[i].wavelength_nm - pts[lo].wavelength_nm > half)
            ++lo;
        while (hi + 1 < n && pts[hi + 1].wavelength_nm - pts[i].wavelength_nm <= half)
            ++hi;
        hi = std::max(hi, i);
        double sum = 0.0;
        for (std::size_t j = lo; j <= hi; ++j)
            sum += raw[j];
        v[i] = sum / static_cast<double>(hi - lo + 1);
    }

    const auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
    const double delta = options.prominence_fraction * (*mx_it - *mn_it);
    if (!(delta > 0.0))
        return {};

    std::vector<std::pair<std::size_t, ExtremumKind>> found;
    double mx = -std::numeric_limits<double>::infinity();
    double mn = std::numeric_limits<double>::infinity();
    std::size_t mx_pos = 0, mn_pos = 0;
    bool look_for_max = true;
    for (std::size_t i = 0; i < n; ++i)
    {
        if (v[i] > mx)
        {
            mx = v[i];
            mx_pos = i;
        }
        if (v[i] < mn)
        {
            mn = v[i];
            mn_pos = i;
        }
        if (look_for_max && v[i] < mx - delta)
        {
            found.emplace_back(mx_pos, ExtremumKind::Maximum);
            mn = v[i];
            mn_pos = i;
            look_for_max = false;
        }
        else if (!look_for_max && v[i] > mn + delta)
        {
            found.emplace_back(mn_pos, ExtremumKind::Minimum);
            mx = v[i];
            mx_pos = i;
            look_for_max = true;
        }
    }

    std::vector<Extremum> out;
    for (const auto &[i, kind] : found)
    {
        if (i == 0 || i + 1 >= n)
            continue;
        // Vertex of the parabola through the three samples around i.
        const double x0 = pts[i - 1].wavelength_nm, x1 = pts[i].wavelength_nm, x2 = pts[i + 1].wavelength_nm;
        const double y0 = v[i - 1], y1 = v[i], y2 = v[i + 1];
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double curv = (d12 - d01) / (x2 - x0);
        double wl = x1;
        double val = y1;
        if (curv != 0.0)
        {
            const double b = d01 - curv * (x0 + x1);
            const double vertex = -b / (2.0 * curv);
            if (vertex > x0 && vertex < x2)
            {
                wl = vertex;
                val = y0 + (wl - x0) * (d01 + curv * (wl - x1));
            }
        }
        out.push_back({wl, frequency_thz(wl), val, kind});
    }
    return out;
}

DispersionEstimate estimate_dispersion(const SpectrumTrace &trace, double f0_thz,
                                       const ExtremumOptions &options)
{
    if (!(std::isfinite(f0_thz) && f0_thz > 0.0))
        fail(ErrorKind::Domain, "center frequency must be > 0 THz");

    const auto extrema = find_extrema(trace, options);
    if (extrema.size() < 2)
    {
        std::ostringstream os;
        os << "trace shows " << extrema.size() << " ripple extrema; at least 2 are needed";
        fail(ErrorKind::InsufficientRipples, os.str());
    }

    const auto pts = trace.points();
    const auto values = trace.ratio_values();
    std::vector<Sample> samples;
    samples.reserve(pts.size());
    double x_max = 0.0;
    double max_df = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
    {
        const double f = frequency_thz(pts[i].wavelength_nm);
        const double u = (f0_thz - f) / f0_thz;
        samples.push_back({f, u * u, values[i]});
        x_max = std::max(x_max, u * u);
        if (i > 0)
            max_df = std::max(max_df, std::abs(f - samples[i - 1].f));
    }
    if (!(x_max > 0.0))
        fail(ErrorKind::InsufficientRipples, "trace does not extend away from the center frequency");

    DispersionEstimate est;
    est.extrema = extrema.size();
    est.ripple_estimate = ripple_ladder(extrema, f0_thz, 3.0 * max_df);

    // Scan |D| up to the sampling limit (pi/2 of phase per sample step); the
    // deepest local minima and the ladder estimate seed the full fit.
    double max_dx = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i)
        max_dx = std::max(max_dx, std::abs(samples[i].x - samples[i - 1].x));
    const double d_max = 1.0 / (2.0 * kSpeedOfLightNmPerPs * std::max(max_dx, 1e-300));
    double d_step = 0.05 / (kPi * kSpeedOfLightNmPerPs * x_max);
    d_step = std::max(d_step, d_max / kMaxScanSteps);
    std::vector<std::pair<double, HarmonicFit>> scan;
    for (double d = d_step; d <= d_max; d += d_step)
        scan.emplace_back(d, solve_harmonic(samples, d * kSpeedOfLightNmPerPs));

    std::vector<std::pair<double, HarmonicFit>> seeds;
    for (std::size_t i = 0; i < scan.size(); ++i)
    {
        const double c = scan[i].second.cost;
        const bool left = i == 0 || c <= scan[i - 1].second.cost;
        const bool right = i + 1 == scan.size() || c <= scan[i + 1].second.cost;
        if (left && right && std::isfinite(c))
            seeds.push_back(scan[i]);
    }
    std::sort(seeds.begin(), seeds.end(), [](const auto &a, const auto &b) { return a.second.cost < b.second.cost; });
    if (seeds.size() > kRefinedSeeds)
        seeds.resize(kRefinedSeeds);
    if (est.ripple_estimate)
        seeds.emplace_back(*est.ripple_estimate, solve_harmonic(samples, *est.ripple_estimate * kSpeedOfLightNmPerPs));
    std::erase_if(seeds, [](const auto &s) { return !std::isfinite(s.second.cost); });
    if (seeds.empty())
        fail(ErrorKind::FitFailure, "could not seed the dispersion fit");

    // Refine all four parameters: (D, phi0, R+, R-).
    LevMarProblem problem;
    problem.num_params = 4;
    problem.num_residuals = static_cast<int>(samples.size());
    problem.evaluate = [&](const Eigen::VectorXd &p, Eigen::VectorXd &r, Eigen::MatrixXd *jac) {
        const double dc = p[0] * kSpeedOfLightNmPerPs;
        for (std::size_t i = 0; i < samples.size(); ++i)
        {
            const auto &s = samples[i];
            const double ph = kPi * dc * s.x + p[1];
            const double c = std::cos(ph), sn = std::sin(ph);
            const double c2 = c * c;
            r[static_cast<Eigen::Index>(i)] = p[2] * c2 + p[3] * (1.0 - c2) - s.value;
            if (jac)
            {
                const auto row = static_cast<Eigen::Index>(i);
                const double dr_dphase = (p[3] - p[2]) * 2.0 * sn * c;
                (*jac)(row, 0) = dr_dphase * kPi * kSpeedOfLightNmPerPs * s.x;
                (*jac)(row, 1) = dr_dphase;
                (*jac)(row, 2) = c2;
                (*jac)(row, 3) = 1.0 - c2;
            }
        }
        return true;
    };
    if (problem.num_residuals < problem.num_params)
        fail(ErrorKind::InsufficientRipples, "trace has too few samples for a dispersion fit");
    LevMarOptions lm;
    lm.step_tolerance = 1e-12;
    LevMarResult fit;
    fit.cost = std::numeric_limits<double>::infinity();
    for (const auto &[d_seed, lv] : seeds)
    {
        Eigen::VectorXd start(4);
        start << d_seed, lv.phi0, lv.r_plus, lv.r_minus;
        auto trial = levenberg_marquardt(problem, start, lm);
        if (trial.cost < fit.cost)
            fit = std::move(trial);
    }

    double d = fit.params[0];
    double phi0 = fit.params[1];
    double r_plus = fit.params[2];
    double r_minus = fit.params[3];
    if (d < 0.0)
    {
        d = -d;
        phi0 = -phi0;
    }
    if (r_plus < r_minus)
    {
        std::swap(r_plus, r_minus);
        phi0 += kPi / 2.0;
    }
    est.d_ps_per_nm = d;
    est.phi0_rad = wrap_pi(phi0);
    est.r_minus = r_minus;
    est.r_plus = r_plus;
    est.residual_rms = std::sqrt(fit.cost / static_cast<double>(samples.size()));
    return est;
}

double net_dispersion(std::span<const FiberSegment> segments)
{
    double total = 0.0;
    for (const auto &s : segments)
    {
        if (!(s.length_m >= 0.0) || !std::isfinite(s.length_m) || !std::isfinite(s.d_ps_per_nm_per_m))
            fail(ErrorKind::Domain, "fiber segment needs finite dispersion and length >= 0");
        total += s.dispersion_ps_per_nm();
    }
    return total;
}

double design_dcf(std::span<const FiberSegment> segments, double dcf_ps_per_nm_per_m,
                  double target_residual_ps_per_nm)
{
    if (!std::isfinite(dcf_ps_per_nm_per_m) || !std::isfinite(target_residual_ps_per_nm))
        fail(ErrorKind::Domain, "DCF rate and target must be finite");
    const double excess = net_dispersion(segments) - target_residual_ps_per_nm;
    if (excess == 0.0)
        return 0.0;
    if (dcf_ps_per_nm_per_m == 0.0 || (excess > 0.0) == (dcf_ps_per_nm_per_m > 0.0))
    {
        std::ostringstream os;
        os << "compensating fiber rate " << dcf_ps_per_nm_per_m
           << " ps/nm/m does not oppose the excess dispersion " << excess << " ps/nm";
        fail(ErrorKind::Design, os.str());
    }
    return std::max(0.0, excess / -dcf_ps_per_nm_per_m);
}

PhaseBand phase_maintained_band(const DispersionModel &model, double lock_thz, double max_dev_rad,
                                const FrequencyBand &limits)
{
    if (!(std::isfinite(max_dev_rad) && max_dev_rad > 0.0))
        fail(ErrorKind::Domain, "maximum phase deviation must be > 0");
    if (!(limits.f_lo_thz > 0.0 && limits.f_lo_thz <= lock_thz && lock_thz <= limits.f_hi_thz))
        fail(ErrorKind::Domain, "lock frequency must lie inside the band limits");

    PhaseBand out{limits, lock_thz};
    const double dc = std::abs(model.d_ps_per_nm()) * kSpeedOfLightNmPerPs;
    if (dc == 0.0)
        return out;

    // In u = f0 - f the condition is |u^2 - u_lock^2| <= delta.
    const double f0 = model.f0_thz();
    const double delta = max_dev_rad * f0 * f0 / (kPi * dc);
    const double u_lock = f0 - lock_thz;
    const double outer = std::sqrt(u_lock * u_lock + delta);
    double u_lo, u_hi;
    if (u_lock * u_lock <= delta)
    {
        u_lo = -outer;
        u_hi = outer;
    }
    else
    {
        const double inner = std::sqrt(u_lock * u_lock - delta);
        if (u_lock > 0.0)
        {
            u_lo = inner;
            u_hi = outer;
        }
        else
        {
            u_lo = -outer;
            u_hi = -inner;
        }
    }
    out.band.f_lo_thz = std::max(limits.f_lo_thz, f0 - u_hi);
    out.band.f_hi_thz = std::min(limits.f_hi_thz, f0 - u_lo);
    return out;
}

double degradation_phase(const QuadLevels &levels, double degradation_db)
{
    if (!(std::isfinite(degradation_db) && degradation_db > 0.0))
        fail(ErrorKind::Domain, "degradation must be > 0 dB");
    if (levels.swing() <= 0.0)
        return kPi / 2.0;
    const double s2 = levels.r_minus() * (ratio_from_db(degradation_db) - 1.0) / levels.swing();
    if (s2 >= 1.0)
        return kPi / 2.0;
    return std::asin(std::sqrt(s2));
}

} // namespace opachain
