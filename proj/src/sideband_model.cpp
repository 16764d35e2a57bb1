#include "opachain/sideband_model.hpp"

#include "opachain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace opachain
{
namespace
{
std::string describe(const char *what, double value)
{
    std::ostringstream os;
    os << what << " (got " << value << ")";
    return os.str();
}
} // namespace

SqueezerParams::SqueezerParams(double efficiency_per_w, double loss, double pump_w)
    : efficiency_(efficiency_per_w), loss_(loss), pump_(pump_w)
{
    if (!(std::isfinite(efficiency_per_w) && efficiency_per_w > 0.0))
        fail(ErrorKind::Domain, describe("squeezer efficiency must be > 0", efficiency_per_w));
    if (!(std::isfinite(loss) && loss >= 0.0 && loss < 1.0))
        fail(ErrorKind::Domain, describe("squeezer loss must be in [0, 1)", loss));
    if (!(std::isfinite(pump_w) && pump_w >= 0.0))
        fail(ErrorKind::Domain, describe("pump power must be >= 0", pump_w));
}

QuadLevels::QuadLevels(double r_minus, double r_plus) : r_minus_(r_minus), r_plus_(r_plus)
{
    if (!(std::isfinite(r_minus) && std::isfinite(r_plus)))
        fail(ErrorKind::Domain, "quadrature levels must be finite");
    if (!(r_minus > 0.0))
        fail(ErrorKind::Domain, describe("squeezing level must be > 0", r_minus));
    if (!(r_minus <= r_plus))
    {
        std::ostringstream os;
        os << "squeezing level " << r_minus << " exceeds anti-squeezing level " << r_plus;
        fail(ErrorKind::Domain, os.str());
    }
}

QuadLevels QuadLevels::from_db(double r_minus_db, double r_plus_db)
{
    return {ratio_from_db(r_minus_db), ratio_from_db(r_plus_db)};
}

double QuadLevels::r_minus_db() const { return db_from_ratio(r_minus_); }
double QuadLevels::r_plus_db() const { return db_from_ratio(r_plus_); }

PhaseAngle::PhaseAngle(double radians) : radians_(radians)
{
    if (!std::isfinite(radians))
        fail(ErrorKind::Domain, "phase angle must be finite");
}

PhaseAngle PhaseAngle::canonical() const
{
    double r = std::fmod(radians_, std::numbers::pi);
    if (r < 0.0)
        r += std::numbers::pi;
    if (r >= std::numbers::pi)
        r = 0.0;
    return PhaseAngle(r);
}

QuadLevels true_levels(const SqueezerParams &params)
{
    const double s = 2.0 * std::sqrt(params.efficiency_per_w() * params.pump_w());
    const double l = params.loss();
    return {l + (1.0 - l) * std::exp(-s), l + (1.0 - l) * std::exp(s)};
}

QuadratureVariances variance_at_phase(const QuadLevels &levels, PhaseAngle theta)
{
    const double c = std::cos(theta.radians());
    const double s = std::sin(theta.radians());
    const double c2 = c * c;
    const double s2 = s * s;
    return {levels.r_minus() * c2 + levels.r_plus() * s2,
            levels.r_minus() * s2 + levels.r_plus() * c2};
}

double db_from_ratio(double ratio)
{
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        fail(ErrorKind::Domain, describe("ratio must be positive and finite for dB conversion", ratio));
    return 10.0 * std::log10(ratio);
}

double ratio_from_db(double db)
{
    if (!std::isfinite(db))
        fail(ErrorKind::Domain, "dB value must be finite");
    return std::pow(10.0, db / 10.0);
}

bool nearly_equal(double a, double b, double rel)
{
    return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace opachain
