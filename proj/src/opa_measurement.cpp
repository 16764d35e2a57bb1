#include "opachain/opa_measurement.hpp"

#include "opachain/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opachain
{
OpaGain::OpaGain(double linear) : g_(linear)
{
    if (!(std::isfinite(linear) && linear > 0.0))
    {
        std::ostringstream os;
        os << "OPA gain must be > 0 (got " << linear << ")";
        fail(ErrorKind::Domain, os.str());
    }
}

OpaGain OpaGain::from_db(double db) { return OpaGain(ratio_from_db(db)); }

double OpaGain::db() const { return db_from_ratio(g_); }

MeasuredLevels::MeasuredLevels(double r_minus_meas, double r_plus_meas)
    : r_minus_(r_minus_meas), r_plus_(r_plus_meas)
{
    if (!(std::isfinite(r_minus_meas) && std::isfinite(r_plus_meas) && r_minus_meas > 0.0 &&
          r_minus_meas <= r_plus_meas))
    {
        std::ostringstream os;
        os << "measured levels need 0 < R-' <= R+' (got " << r_minus_meas << ", " << r_plus_meas
           << ")";
        fail(ErrorKind::Domain, os.str());
    }
}

MeasuredLevels measured_from_true(const QuadLevels &levels, OpaGain gain)
{
    const double g2 = gain.linear() * gain.linear();
    const double norm = 1.0 + g2;
    const double rm = (g2 * levels.r_minus() + levels.r_plus()) / norm;
    const double rp = (g2 * levels.r_plus() + levels.r_minus()) / norm;
    return {rm, rp};
}

QuadLevels true_from_measured(const MeasuredLevels &meas, OpaGain gain)
{
    if (!(gain.linear() > 1.0))
    {
        std::ostringstream os;
        os << "finite-gain correction needs G > 1 (got " << gain.linear() << ")";
        fail(ErrorKind::SingularCorrection, os.str());
    }
    const double g2 = gain.linear() * gain.linear();
    const double denom = g2 - 1.0;
    const double rm = (g2 * meas.r_minus_meas() - meas.r_plus_meas()) / denom;
    const double rp = (g2 * meas.r_plus_meas() - meas.r_minus_meas()) / denom;
    if (!(rm > 0.0))
    {
        std::ostringstream os;
        os << "measurement (" << meas.r_minus_meas() << ", " << meas.r_plus_meas()
           << ") at G=" << gain.linear() << " implies non-positive squeezing level " << rm;
        fail(ErrorKind::UnphysicalInput, os.str());
    }
    return {rm, rp};
}

double effective_phase_deviation(OpaGain gain)
{
    const double g = gain.linear();
    return std::asin(std::sqrt(1.0 / (1.0 + g * g)));
}

double squeezing_bias_db(const QuadLevels &levels, OpaGain gain)
{
    return db_from_ratio(measured_from_true(levels, gain).r_minus_meas()) - levels.r_minus_db();
}

OpaGain required_gain(const QuadLevels &levels, double tolerance_db, const GainSearch &search)
{
    if (!(std::isfinite(tolerance_db) && tolerance_db > 0.0))
        fail(ErrorKind::Domain, "digit tolerance must be > 0 dB");
    if (!(search.lower > 0.0 && search.lower < search.upper && search.max_iterations > 0 &&
          search.step_db >= 0.0))
        fail(ErrorKind::Domain, "invalid gain search settings");

    const auto meets = [&](double g) { return std::abs(squeezing_bias_db(levels, OpaGain(g))) <= tolerance_db; };

    double hi = search.upper;
    if (meets(search.lower))
        hi = search.lower;
    else
    {
        if (!meets(hi))
        {
            std::ostringstream os;
            os << "no gain up to " << search.upper << " reaches " << tolerance_db << " dB tolerance";
            fail(ErrorKind::NoSolution, os.str());
        }
        // Bias is strictly decreasing in G, so the bracket [lo fails, hi meets] shrinks to the edge.
        double lo = search.lower;
        for (int i = 0; i < search.max_iterations; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            (meets(mid) ? hi : lo) = mid;
        }
    }

    if (search.step_db == 0.0)
        return OpaGain(hi);

    // Round up onto the dB grid; the small slack keeps exact grid points in place.
    const double steps = std::ceil(db_from_ratio(hi) / search.step_db - 1e-9);
    double g = ratio_from_db(steps * search.step_db);
    if (!meets(g))
        g = ratio_from_db((steps + 1.0) * search.step_db);
    return OpaGain(std::max(g, search.lower));
}

} // namespace opachain
