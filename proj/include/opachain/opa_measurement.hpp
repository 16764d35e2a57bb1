#ifndef OPACHAIN_OPA_MEASUREMENT_HPP
#define OPACHAIN_OPA_MEASUREMENT_HPP

// Finite-gain phase-sensitive detection with a second OPA.
//
// Intensities are never materialized: every quantity is normalized by the
// amplified-vacuum intensity I0, so the photon-energy prefactor cancels.
// With gain G the measured extremes are
//
//   R-' = Imin/I0 = (G² R- + R+) / (1 + G²)
//   R+' = Imax/I0 = (G² R+ + R-) / (1 + G²)
//
// which is the same mixing as a phase error of asin(sqrt(1/(1+G²))).

#include "opachain/sideband_model.hpp"

namespace opachain
{
class OpaGain
{
public:
    explicit OpaGain(double linear);
    static OpaGain from_db(double db);

    double linear() const noexcept { return g_; }
    double db() const;

private:
    double g_;
};

class MeasuredLevels
{
public:
    MeasuredLevels(double r_minus_meas, double r_plus_meas);

    double r_minus_meas() const noexcept { return r_minus_; }
    double r_plus_meas() const noexcept { return r_plus_; }

private:
    double r_minus_;
    double r_plus_;
};

MeasuredLevels measured_from_true(const QuadLevels &levels, OpaGain gain);

// Exact inverse of measured_from_true. Needs G > 1 (SingularCorrection) and a
// measurement consistent with a positive squeezing level (UnphysicalInput).
QuadLevels true_from_measured(const MeasuredLevels &meas, OpaGain gain);

// Phase deviation equivalent to the finite-gain bias, in (0, pi/2] radians.
double effective_phase_deviation(OpaGain gain);

struct GainSearch
{
    double lower = 1.0;
    double upper = 1e6;
    int max_iterations = 200;
    // Result is rounded up onto a grid of this many dB (gains are quoted in
    // whole dB). 0 returns the continuous bisection result.
    double step_db = 1.0;
};

// Smallest gain for which |dB(R-') - dB(R-)| <= tolerance_db.
OpaGain required_gain(const QuadLevels &levels, double tolerance_db, const GainSearch &search = {});

// Squeezing-level bias dB(R-') - dB(R-) at the given gain; >= 0.
double squeezing_bias_db(const QuadLevels &levels, OpaGain gain);

} // namespace opachain

#endif // OPACHAIN_OPA_MEASUREMENT_HPP
