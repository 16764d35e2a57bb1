#ifndef OPACHAIN_LOCKLOOP_HPP
#define OPACHAIN_LOCKLOOP_HPP

// Discrete-time model of the integral phase lock.
//
// A bandpass filter picks one wavelength of the amplified output; its
// vacuum-normalized power (PD3) is subtracted from a target and integrated,
// and the integral drives the relative pump phase. Because dispersion makes
// the phase wavelength-dependent, moving the filter moves the lock point.
//
//   integrator += ki (target - pd3) dt
//   phi_actuated = integrator
//   pd3 = R(f_lock; phi0 + phi_actuated + phi_drift) + noise

#include "opachain/dispersion.hpp"
#include "opachain/sideband_model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace opachain
{
struct LockLoopConfig
{
    double ki = 1e3;        // 1/(ratio s)
    double dt_s = 1e-5;
    double target = 1.0;    // vacuum-normalized PD3 set point
    double lock_wavelength_nm = 1545.0;
    double noise_rms = 0.0;  // additive Gaussian on PD3
    double drift_rate = 0.0; // rad/sqrt(s), Wiener phase drift
    std::size_t max_steps = 2000;
    // Absolute error tolerance; <= 0 selects 1% of (R+ - R-).
    double tolerance = 0.0;
    double initial_phase = 0.0;
    // Drift is applied only for steps below this count, when set.
    std::optional<std::size_t> drift_steps;
    // Choose the sign of ki from a probe of the local slope.
    bool auto_sign = true;
    // Operating points with |dR/dphi| below this fraction of (R+ - R-) are
    // treated as extrema, where integral control cannot hold.
    double min_slope_fraction = 0.05;

    void validate() const;
};

struct LockPlant
{
    DispersionModel model;
    QuadLevels levels;
};

struct LockLoopState
{
    std::size_t step = 0;
    double integrator = 0.0;
    double phi_actuated = 0.0;
    double phi_drift = 0.0;
    double pd3 = 1.0;

    bool operator==(const LockLoopState &) const = default;
};

struct PlantInput
{
    double drift_increment = 0.0;
    double noise = 0.0;
};

// R at the filter wavelength with the model's phi0 replaced by phi_total.
double pd3_model(const DispersionModel &model, const QuadLevels &levels, double lock_wavelength_nm,
                 double phi_total);

LockLoopState initial_state(const LockLoopConfig &config, const LockPlant &plant, double noise = 0.0);

// One controller update followed by one plant reading. Uses config.ki as is
// (no sign selection). Throws Instability if the integrator leaves the
// finite range.
LockLoopState step(const LockLoopConfig &config, const LockPlant &plant, const LockLoopState &state,
                   const PlantInput &input);

struct OperatingPoint
{
    bool reachable = false;      // target lies within [R-, R+]
    double phi_actuated = 0.0;   // actuated phase that puts PD3 on target (no drift)
    double slope = 0.0;          // dPD3/dphi there
    double loop_gain = 0.0;      // |ki| dt |slope|; the linearized loop is stable below 2
    bool on_slope = false;
};

// Crossing of the target inside the monotone half-period that contains the
// starting phase.
OperatingPoint operating_point(const LockLoopConfig &config, const LockPlant &plant);

enum class LockStatus
{
    Locked,
    NotLocked,
    OffSlope,
    Unstable,
};

const char *to_string(LockStatus status) noexcept;

struct LockResult
{
    LockStatus status = LockStatus::NotLocked;
    bool locked = false;
    std::optional<std::size_t> settle_step;
    double steady_state_rms_error = 0.0; // over the final 20% of steps
    double tolerance = 0.0;
    double signed_ki = 0.0;
    OperatingPoint operating;
    std::vector<LockLoopState> trace; // initial state first
};

// Deterministic for a given seed.
LockResult run_lock(const LockLoopConfig &config, const DispersionModel &model, const QuadLevels &levels,
                    std::uint64_t seed);

struct LockJob
{
    LockLoopConfig config;
    LockPlant plant;
    std::uint64_t seed = 0;
};

// Independent runs evaluated concurrently; results in job order.
std::vector<LockResult> run_lock_batch(std::span<const LockJob> jobs);

} // namespace opachain

#endif // OPACHAIN_LOCKLOOP_HPP
