#include "opachain/lockloop.hpp"

#include "opachain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace opachain
{
namespace
{
constexpr double kPi = std::numbers::pi;
constexpr double kIntegratorLimit = 1e15;
constexpr double kProbeStep = 1e-3;

double lock_dispersion_phase(const LockPlant &plant, double lock_wavelength_nm)
{
    return dispersion_phase(plant.model, frequency_thz(lock_wavelength_nm));
}
} // namespace

void LockLoopConfig::validate() const
{
    const auto bad = [](const char *what) { fail(ErrorKind::Validation, what); };
    if (!(std::isfinite(ki) && ki != 0.0))
        bad("lockloop.ki must be finite and non-zero");
    if (!(std::isfinite(dt_s) && dt_s > 0.0))
        bad("lockloop.dt must be > 0");
    if (!std::isfinite(target))
        bad("lockloop.target must be finite");
    if (!(std::isfinite(lock_wavelength_nm) && lock_wavelength_nm > 0.0))
        bad("lockloop.lock_wavelength_nm must be > 0");
    if (!(std::isfinite(noise_rms) && noise_rms >= 0.0))
        bad("lockloop.noise_rms must be >= 0");
    if (!(std::isfinite(drift_rate) && drift_rate >= 0.0))
        bad("lockloop.drift_rate must be >= 0");
    if (max_steps < 1)
        bad("lockloop.max_steps must be >= 1");
    if (!std::isfinite(tolerance))
        bad("lockloop.tolerance must be finite");
    if (!std::isfinite(initial_phase))
        bad("lockloop.initial_phase must be finite");
    if (!(std::isfinite(min_slope_fraction) && min_slope_fraction >= 0.0 && min_slope_fraction < 1.0))
        bad("lockloop.min_slope_fraction must be in [0, 1)");
}

double pd3_model(const DispersionModel &model, const QuadLevels &levels, double lock_wavelength_nm,
                 double phi_total)
{
    const double psi = dispersion_phase(model, frequency_thz(lock_wavelength_nm)) + phi_total;
    const double c = std::cos(psi);
    const double c2 = c * c;
    return levels.r_plus() * c2 + levels.r_minus() * (1.0 - c2);
}

LockLoopState initial_state(const LockLoopConfig &config, const LockPlant &plant, double noise)
{
    LockLoopState s;
    s.integrator = config.initial_phase;
    s.phi_actuated = config.initial_phase;
    s.pd3 = pd3_model(plant.model, plant.levels, config.lock_wavelength_nm,
                      plant.model.phi0_rad() + config.initial_phase) +
            noise;
    return s;
}

LockLoopState step(const LockLoopConfig &config, const LockPlant &plant, const LockLoopState &state,
                   const PlantInput &input)
{
    LockLoopState next;
    next.step = state.step + 1;
    next.integrator = state.integrator + config.ki * (config.target - state.pd3) * config.dt_s;
    if (!std::isfinite(next.integrator) || std::abs(next.integrator) > kIntegratorLimit)
    {
        std::ostringstream os;
        os << "integrator overflow at step " << next.step;
        fail(ErrorKind::Instability, os.str());
    }
    next.phi_actuated = next.integrator;
    next.phi_drift = state.phi_drift + input.drift_increment;
    next.pd3 = pd3_model(plant.model, plant.levels, config.lock_wavelength_nm,
                         plant.model.phi0_rad() + next.phi_actuated + next.phi_drift) +
               input.noise;
    return next;
}

OperatingPoint operating_point(const LockLoopConfig &config, const LockPlant &plant)
{
    OperatingPoint op;
    const auto &lv = plant.levels;
    const double swing = lv.swing();
    const double disp = lock_dispersion_phase(plant, config.lock_wavelength_nm);
    const double psi_start = disp + plant.model.phi0_rad() + config.initial_phase;
    if (swing <= 0.0)
    {
        op.reachable = config.target == lv.r_plus();
        op.phi_actuated = config.initial_phase;
        return op;
    }
    const double q = (lv.r_plus() - config.target) / swing;
    if (q < 0.0 || q > 1.0)
        return op;
    op.reachable = true;

    // R falls on [k pi, k pi + pi/2] and rises on [k pi + pi/2, (k+1) pi].
    const double beta = std::asin(std::sqrt(q));
    const double k = std::floor(psi_start / kPi);
    const double within = psi_start - k * kPi;
    const double psi = within < kPi / 2.0 ? k * kPi + beta : k * kPi + kPi - beta;
    op.phi_actuated = psi - disp - plant.model.phi0_rad();
    op.slope = (lv.r_minus() - lv.r_plus()) * std::sin(2.0 * psi);
    op.loop_gain = std::abs(config.ki) * config.dt_s * std::abs(op.slope);
    op.on_slope = std::abs(op.slope) >= config.min_slope_fraction * swing && std::abs(op.slope) > 0.0;
    return op;
}

const char *to_string(LockStatus status) noexcept
{
    switch (status)
    {
    case LockStatus::Locked: return "locked";
    case LockStatus::NotLocked: return "not_locked";
    case LockStatus::OffSlope: return "off_slope";
    case LockStatus::Unstable: return "unstable";
    }
    return "unknown";
}

LockResult run_lock(const LockLoopConfig &config, const DispersionModel &model, const QuadLevels &levels,
                    std::uint64_t seed)
{
    config.validate();
    const LockPlant plant{model, levels};

    LockResult out;
    out.tolerance = config.tolerance > 0.0 ? config.tolerance : std::max(0.01 * levels.swing(), 1e-12);

    LockLoopConfig run_cfg = config;
    if (config.auto_sign)
    {
        // One probe step of the actuator reveals which way PD3 moves.
        const double base = model.phi0_rad() + config.initial_phase;
        const double p0 = pd3_model(model, levels, config.lock_wavelength_nm, base);
        const double p1 = pd3_model(model, levels, config.lock_wavelength_nm, base + kProbeStep);
        run_cfg.ki = (p1 < p0 ? -1.0 : 1.0) * std::abs(config.ki);
    }
    out.signed_ki = run_cfg.ki;
    out.operating = operating_point(run_cfg, plant);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double drift_scale = config.drift_rate * std::sqrt(config.dt_s);

    out.trace.reserve(config.max_steps + 1);
    out.trace.push_back(initial_state(run_cfg, plant, config.noise_rms * gauss(rng)));
    bool diverged = false;
    for (std::size_t n = 0; n < config.max_steps; ++n)
    {
        PlantInput in;
        const double drift_draw = gauss(rng);
        const double noise_draw = gauss(rng);
        if (!config.drift_steps || n < *config.drift_steps)
            in.drift_increment = drift_scale * drift_draw;
        in.noise = config.noise_rms * noise_draw;
        try
        {
            out.trace.push_back(step(run_cfg, plant, out.trace.back(), in));
        }
        catch (const Error &e)
        {
            if (e.kind() != ErrorKind::Instability)
                throw;
            diverged = true;
            break;
        }
    }

    const std::size_t steps = out.trace.size() - 1;
    const std::size_t window = std::max<std::size_t>(1, steps / 5);
    double sum_sq = 0.0;
    for (std::size_t i = out.trace.size() - window; i < out.trace.size(); ++i)
    {
        const double e = config.target - out.trace[i].pd3;
        sum_sq += e * e;
    }
    out.steady_state_rms_error = std::sqrt(sum_sq / static_cast<double>(window));

    std::optional<std::size_t> last_outside;
    for (std::size_t i = 0; i < out.trace.size(); ++i)
        if (std::abs(config.target - out.trace[i].pd3) > out.tolerance)
            last_outside = i;
    if (!last_outside)
        out.settle_step = 0;
    else if (*last_outside + 1 < out.trace.size())
        out.settle_step = *last_outside + 1;

    const bool within = std::isfinite(out.steady_state_rms_error) && out.steady_state_rms_error <= out.tolerance;
    if (diverged)
        out.status = LockStatus::Unstable;
    else if (!out.operating.on_slope)
        out.status = LockStatus::OffSlope;
    else if (within)
        out.status = LockStatus::Locked;
    else if (out.operating.loop_gain >= 2.0)
        out.status = LockStatus::Unstable;
    else
        out.status = LockStatus::NotLocked;
    out.locked = out.status == LockStatus::Locked;
    return out;
}

std::vector<LockResult> run_lock_batch(std::span<const LockJob> jobs)
{
    std::vector<LockResult> results(jobs.size());
    const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t begin = 0; begin < jobs.size(); begin += width)
    {
        const std::size_t end = std::min(jobs.size(), begin + width);
        std::vector<std::future<LockResult>> pending;
        for (std::size_t i = begin; i < end; ++i)
        {
            const auto &job = jobs[i];
            pending.push_back(std::async(std::launch::async, [&job] {
                return run_lock(job.config, job.plant.model, job.plant.levels, job.seed);
            }));
        }
        for (std::size_t i = begin; i < end; ++i)
            results[i] = pending[i - begin].get();
    }
    return results;
}

} // namespace opachain
