#ifndef OPACHAIN_SIDEBAND_MODEL_HPP
#define OPACHAIN_SIDEBAND_MODEL_HPP

// Quadrature-variance model of the squeezer (first OPA).
//
// All levels are linear variance ratios relative to vacuum (vacuum = 1).
// Decibels appear only through db_from_ratio / ratio_from_db at I/O edges.

namespace opachain
{
// Relative tolerance used for closed-form comparisons.
inline constexpr double kRelTol = 1e-9;

class SqueezerParams
{
public:
    // efficiency a in 1/W, total optical loss L in [0,1), pump power p in W.
    SqueezerParams(double efficiency_per_w, double loss, double pump_w);

    double efficiency_per_w() const noexcept { return efficiency_; }
    double loss() const noexcept { return loss_; }
    double pump_w() const noexcept { return pump_; }

    SqueezerParams with_pump(double pump_w) const { return {efficiency_, loss_, pump_w}; }

private:
    double efficiency_;
    double loss_;
    double pump_;
};

// Squeezing / anti-squeezing pair (R-, R+). Requires 0 < r_minus <= r_plus.
class QuadLevels
{
public:
    QuadLevels(double r_minus, double r_plus);
    static QuadLevels from_db(double r_minus_db, double r_plus_db);

    double r_minus() const noexcept { return r_minus_; }
    double r_plus() const noexcept { return r_plus_; }
    double r_minus_db() const;
    double r_plus_db() const;

    // R+ - R-, the full swing of any phase scan.
    double swing() const noexcept { return r_plus_ - r_minus_; }

    bool operator==(const QuadLevels &) const = default;

private:
    double r_minus_;
    double r_plus_;
};

// Phase of the first OPA relative to the measurement axis, radians.
class PhaseAngle
{
public:
    explicit PhaseAngle(double radians);

    double radians() const noexcept { return radians_; }
    // Representative in [0, pi); the variances are pi-periodic.
    PhaseAngle canonical() const;

private:
    double radians_;
};

struct QuadratureVariances
{
    double vx = 1.0;
    double vp = 1.0;
};

// R± = L + (1-L) exp(±2 sqrt(a p))
QuadLevels true_levels(const SqueezerParams &params);

// vx = R- cos²θ + R+ sin²θ, vp = R- sin²θ + R+ cos²θ
QuadratureVariances variance_at_phase(const QuadLevels &levels, PhaseAngle theta);

// 10 log10(r); r must be > 0.
double db_from_ratio(double ratio);
double ratio_from_db(double db);

// |a - b| <= rel * max(1, |a|, |b|)
bool nearly_equal(double a, double b, double rel = kRelTol);

} // namespace opachain

#endif // OPACHAIN_SIDEBAND_MODEL_HPP
