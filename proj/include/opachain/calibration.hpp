#ifndef OPACHAIN_CALIBRATION_HPP
#define OPACHAIN_CALIBRATION_HPP

// Calibration of the squeezer from pump-power sweeps, plus loss bookkeeping.

#include "opachain/sideband_model.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace opachain
{
struct SweepPoint
{
    double pump_w = 0.0;
    double r_minus_db = 0.0;
    double r_plus_db = 0.0;
};

struct FitOptions
{
    double initial_damping = 1e-3;
    double step_tolerance = 1e-10;
    int max_iterations = 500;
};

struct FitResult
{
    double efficiency_per_w = 0.0;
    double loss = 0.0;
    double residual_rms_db = 0.0;
    // Parameter covariance in (a, L) order, scaled by the residual variance.
    std::array<std::array<double, 2>, 2> covariance{};
    int iterations = 0;
    // Objective (sum of squared dB residuals) after each accepted step.
    std::vector<double> cost_history;
    // Data-quality notes (points with R- above 0 dB or R+ below 0 dB).
    std::vector<std::string> warnings;

    double efficiency_sigma() const;
    double loss_sigma() const;
};

// Fits R± = L + (1-L) exp(±2 sqrt(a p)) to both branches with equally
// weighted dB residuals.
FitResult fit_calibration(std::span<const SweepPoint> points, const FitOptions &options = {});

// Noise-free sweep generated from known parameters, for round-trip checks.
std::vector<SweepPoint> synthesize_sweep(double efficiency_per_w, double loss,
                                         std::span<const double> pumps_w);

struct LossElement
{
    std::string label;
    double transmission = 1.0;
};

class LossChain
{
public:
    LossChain() = default;
    explicit LossChain(std::vector<LossElement> elements);

    LossChain &add(std::string label, double transmission);
    std::span<const LossElement> elements() const noexcept { return elements_; }

private:
    std::vector<LossElement> elements_;
};

// Product of element transmissions; 1 for an empty chain.
double chain_efficiency(const LossChain &chain);

// Transmission of an unknown stage given the overall transmission and the
// known part of the chain. A ratio above 1 is reported as inconsistent.
double infer_stage_efficiency(double total_transmission, double known_upstream_transmission);

// Levels after a beamsplitter-like loss of transmission T: R -> T R + (1 - T).
QuadLevels attenuate(const QuadLevels &levels, double transmission);

} // namespace opachain

#endif // OPACHAIN_CALIBRATION_HPP
