#include "opachain/calibration.hpp"

#include "opachain/errors.hpp"
#include "opachain/levmar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace opachain
{
namespace
{
const double kDbPerNeper = 10.0 / std::numbers::ln10;

void check_transmission(double t, const std::string &what)
{
    if (!(std::isfinite(t) && t > 0.0 && t <= 1.0))
    {
        std::ostringstream os;
        os << what << " transmission must be in (0, 1] (got " << t << ")";
        fail(ErrorKind::Domain, os.str());
    }
}
} // namespace

double FitResult::efficiency_sigma() const { return std::sqrt(std::max(0.0, covariance[0][0])); }
double FitResult::loss_sigma() const { return std::sqrt(std::max(0.0, covariance[1][1])); }

FitResult fit_calibration(std::span<const SweepPoint> points, const FitOptions &options)
{
    FitResult out;
    std::set<double> pumps;
    double max_pump = 0.0;
    double min_rm_db = 0.0;
    std::size_t max_idx = 0;
    for (std::size_t i = 0; i < points.size(); ++i)
    {
        const auto &p = points[i];
        if (!(std::isfinite(p.pump_w) && p.pump_w >= 0.0 && std::isfinite(p.r_minus_db) &&
              std::isfinite(p.r_plus_db)))
        {
            std::ostringstream os;
            os << "sweep point " << i << " needs finite values and pump >= 0";
            fail(ErrorKind::Domain, os.str());
        }
        if (p.r_minus_db > 0.0 || p.r_plus_db < 0.0)
        {
            std::ostringstream os;
            os << "sweep point " << i << " (" << p.pump_w << " W) is not a squeezed state: "
               << p.r_minus_db << " / " << p.r_plus_db << " dB";
            out.warnings.push_back(os.str());
        }
        pumps.insert(p.pump_w);
        if (i == 0 || p.r_minus_db < min_rm_db)
            min_rm_db = p.r_minus_db;
        if (p.pump_w > max_pump)
        {
            max_pump = p.pump_w;
            max_idx = i;
        }
    }
    if (pumps.size() < 2)
        fail(ErrorKind::Domain, "calibration fit needs at least 2 distinct pump powers");
    if (!(max_pump > 0.0))
        fail(ErrorKind::Domain, "calibration fit needs a non-zero pump power");

    // Start: L from the deepest squeezing, a by inverting the anti-squeezing
    // branch at the strongest pump.
    const double l0 = std::clamp(1.0 - ratio_from_db(min_rm_db), 0.05, 0.9);
    const double excess = (ratio_from_db(points[max_idx].r_plus_db) - l0) / (1.0 - l0);
    double a0 = 1.0;
    if (excess > 1.0)
    {
        const double s = 0.5 * std::log(excess);
        a0 = s * s / max_pump;
    }

    const auto n = static_cast<int>(points.size());
    LevMarProblem problem;
    problem.num_params = 2;
    problem.num_residuals = 2 * n;
    problem.evaluate = [&](const Eigen::VectorXd &x, Eigen::VectorXd &r, Eigen::MatrixXd *jac) {
        const double a = x[0];
        const double l = x[1];
        if (!(a > 0.0 && l >= 0.0 && l < 1.0))
            return false;
        for (int i = 0; i < n; ++i)
        {
            const auto &pt = points[static_cast<std::size_t>(i)];
            const double s = std::sqrt(a * pt.pump_w);
            // d(2 sqrt(a p))/da = sqrt(p / a)
            const double ds_da = std::sqrt(pt.pump_w / a);
            for (int branch = 0; branch < 2; ++branch)
            {
                const double sign = branch == 0 ? -1.0 : 1.0;
                const double e = std::exp(sign * 2.0 * s);
                const double level = l + (1.0 - l) * e;
                const double data = branch == 0 ? pt.r_minus_db : pt.r_plus_db;
                const int row = 2 * i + branch;
                r[row] = kDbPerNeper * std::log(level) - data;
                if (jac)
                {
                    (*jac)(row, 0) = kDbPerNeper * (1.0 - l) * e * sign * ds_da / level;
                    (*jac)(row, 1) = kDbPerNeper * (1.0 - e) / level;
                }
            }
        }
        return true;
    };

    LevMarOptions lm;
    lm.initial_damping = options.initial_damping;
    lm.step_tolerance = options.step_tolerance;
    lm.max_iterations = options.max_iterations;
    Eigen::Vector2d start(a0, l0);
    const auto res = levenberg_marquardt(problem, start, lm);
    if (!res.converged)
    {
        std::ostringstream os;
        os << "calibration fit did not converge in " << res.iterations << " iterations (a=" << res.params[0]
           << ", L=" << res.params[1] << ", cost=" << res.cost << ", damping=" << res.final_damping << ")";
        fail(ErrorKind::FitFailure, os.str());
    }

    out.efficiency_per_w = res.params[0];
    out.loss = res.params[1];
    out.iterations = res.iterations;
    out.cost_history = res.accepted_costs;
    const double m = static_cast<double>(problem.num_residuals);
    out.residual_rms_db = std::sqrt(res.cost / m);
    const double dof = m - 2.0;
    const double sigma2 = dof > 0.0 ? res.cost / dof : 0.0;
    const Eigen::Matrix2d jtj = res.jacobian.transpose() * res.jacobian;
    Eigen::FullPivLU<Eigen::Matrix2d> lu(jtj);
    if (lu.isInvertible())
    {
        const Eigen::Matrix2d inv = lu.inverse();
        const Eigen::Matrix2d cov = sigma2 * 0.5 * (inv + inv.transpose());
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.covariance[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = cov(i, j);
    }
    return out;
}

std::vector<SweepPoint> synthesize_sweep(double efficiency_per_w, double loss, std::span<const double> pumps_w)
{
    std::vector<SweepPoint> out;
    out.reserve(pumps_w.size());
    for (double p : pumps_w)
    {
        const auto lv = true_levels(SqueezerParams(efficiency_per_w, loss, p));
        out.push_back({p, lv.r_minus_db(), lv.r_plus_db()});
    }
    return out;
}

LossChain::LossChain(std::vector<LossElement> elements)
{
    for (auto &e : elements)
        add(std::move(e.label), e.transmission);
}

LossChain &LossChain::add(std::string label, double transmission)
{
    check_transmission(transmission, label.empty() ? std::string("loss element") : label);
    elements_.push_back({std::move(label), transmission});
    return *this;
}

double chain_efficiency(const LossChain &chain)
{
    double t = 1.0;
    for (const auto &e : chain.elements())
        t *= e.transmission;
    return t;
}

double infer_stage_efficiency(double total_transmission, double known_upstream_transmission)
{
    check_transmission(total_transmission, "total");
    check_transmission(known_upstream_transmission, "known");
    const double ratio = total_transmission / known_upstream_transmission;
    if (ratio > 1.0)
    {
        std::ostringstream os;
        os << "total transmission " << total_transmission << " exceeds the known part "
           << known_upstream_transmission << " (implied stage transmission " << ratio << ")";
        fail(ErrorKind::InconsistentEfficiencies, os.str());
    }
    return ratio;
}

QuadLevels attenuate(const QuadLevels &levels, double transmission)
{
    check_transmission(transmission, "attenuation");
    return {transmission * levels.r_minus() + (1.0 - transmission),
            transmission * levels.r_plus() + (1.0 - transmission)};
}

} // namespace opachain
