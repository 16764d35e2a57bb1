#ifndef OPACHAIN_LEVMAR_HPP
#define OPACHAIN_LEVMAR_HPP

// Small dense damped Gauss-Newton (Levenberg-Marquardt) solver shared by the
// calibration fit and the dispersion refinement. Problems here have 2-4
// parameters and at most a few thousand residuals.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace opachain
{
struct LevMarOptions
{
    double initial_damping = 1e-3;
    double damping_increase = 10.0;
    double damping_decrease = 10.0;
    // Converged when ||step|| < step_tolerance * (||x|| + step_tolerance).
    double step_tolerance = 1e-10;
    int max_iterations = 500;
};

struct LevMarProblem
{
    int num_params = 0;
    int num_residuals = 0;
    // Fills residuals (size num_residuals) and, when jacobian != nullptr, the
    // num_residuals x num_params Jacobian. Returns false if x is outside the
    // model's domain; the solver treats that as a rejected step.
    std::function<bool(const Eigen::VectorXd &x, Eigen::VectorXd &residuals, Eigen::MatrixXd *jacobian)>
        evaluate;
};

struct LevMarResult
{
    Eigen::VectorXd params;
    double cost = 0.0; // sum of squared residuals
    int iterations = 0;
    bool converged = false;
    double final_damping = 0.0;
    // Cost after the start point and after every accepted step.
    std::vector<double> accepted_costs;
    Eigen::MatrixXd jacobian; // at params
    Eigen::VectorXd residuals;
};

LevMarResult levenberg_marquardt(const LevMarProblem &problem, const Eigen::VectorXd &start,
                                 const LevMarOptions &options = {});

} // namespace opachain

#endif // OPACHAIN_LEVMAR_HPP
