#include "opachain/levmar.hpp"

#include "opachain/errors.hpp"

#include <algorithm>
#include <cmath>

namespace opachain
{
LevMarResult levenberg_marquardt(const LevMarProblem &problem, const Eigen::VectorXd &start,
                                 const LevMarOptions &options)
{
    const int n = problem.num_params;
    const int m = problem.num_residuals;
    if (n <= 0 || m < n || start.size() != n || !problem.evaluate)
        fail(ErrorKind::Domain, "ill-formed least-squares problem");

    LevMarResult out;
    out.params = start;
    out.residuals.resize(m);
    out.jacobian.resize(m, n);
    if (!problem.evaluate(out.params, out.residuals, &out.jacobian))
        fail(ErrorKind::Domain, "least-squares start point is outside the model domain");
    out.cost = out.residuals.squaredNorm();
    out.accepted_costs.push_back(out.cost);

    double lambda = options.initial_damping;
    Eigen::VectorXd trial_r(m);
    Eigen::MatrixXd trial_j(m, n);

    for (out.iterations = 0; out.iterations < options.max_iterations; ++out.iterations)
    {
        const Eigen::MatrixXd jtj = out.jacobian.transpose() * out.jacobian;
        const Eigen::VectorXd grad = out.jacobian.transpose() * out.residuals;

        // Marquardt scaling: damp each parameter relative to its own curvature.
        Eigen::MatrixXd a = jtj;
        for (int i = 0; i < n; ++i)
            a(i, i) += lambda * std::max(jtj(i, i), 1e-12);
        const Eigen::VectorXd step = a.ldlt().solve(-grad);

        if (!step.allFinite())
        {
            lambda *= options.damping_increase;
            continue;
        }
        if (step.norm() < options.step_tolerance * (out.params.norm() + options.step_tolerance))
        {
            out.converged = true;
            break;
        }

        const Eigen::VectorXd trial = out.params + step;
        const bool inside = problem.evaluate(trial, trial_r, &trial_j);
        const double trial_cost = inside ? trial_r.squaredNorm() : 0.0;
        if (inside && std::isfinite(trial_cost) && trial_cost < out.cost)
        {
            out.params = trial;
            out.residuals = trial_r;
            out.jacobian = trial_j;
            out.cost = trial_cost;
            out.accepted_costs.push_back(trial_cost);
            lambda = std::max(lambda / options.damping_decrease, 1e-15);
        }
        else
        {
            lambda *= options.damping_increase;
            if (lambda > 1e16)
            {
                // No descent direction left at machine precision.
                out.converged = true;
                break;
            }
        }
    }
    out.final_damping = lambda;
    return out;
}

} // namespace opachain
