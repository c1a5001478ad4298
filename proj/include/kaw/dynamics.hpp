#pragma once

#include "kaw/grid.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace kaw {

// Largest state dimension the fixed-size integrator scratch supports.
inline constexpr std::size_t kMaxStateDim = 8;

// dx = f(x, u); all spans have the system's dimensions.
using VectorField = std::function<void(std::span<const double> x, std::span<const double> u, std::span<double> dx)>;

// A set of half-widths, one per dimension.
struct ReachSet {
    Vec center;
    Vec radius;

    [[nodiscard]] HyperRect rect() const;
};

/*
 * Sampled continuous-time system  xdot in f(x,u) + W.
 *
 * lipschitz bounds |df_i/dx_j| over X x U (diagonal entries may carry the
 * one-sided bound of df_i/dx_i); input_gain bounds |df_i/du_j| and is only
 * needed when reach sets must cover a whole input cell.
 */
class ContinuousSystem {
public:
    ContinuousSystem(std::string name, std::size_t state_dim, std::size_t input_dim, VectorField field,
                     HyperRect disturbance, double tau, Eigen::MatrixXd lipschitz,
                     Eigen::MatrixXd input_gain = {}, std::vector<bool> periodic = {});

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::size_t state_dim() const noexcept { return state_dim_; }
    [[nodiscard]] std::size_t input_dim() const noexcept { return input_dim_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    [[nodiscard]] const HyperRect& disturbance() const noexcept { return disturbance_; }
    [[nodiscard]] const Eigen::MatrixXd& lipschitz() const noexcept { return lipschitz_; }
    [[nodiscard]] const Eigen::MatrixXd& input_gain() const noexcept { return input_gain_; }
    [[nodiscard]] const std::vector<bool>& periodic() const noexcept { return periodic_; }
    // e^{L tau} and the integral of e^{L s} over [0, tau].
    [[nodiscard]] const Eigen::MatrixXd& growth() const noexcept { return growth_; }
    [[nodiscard]] const Eigen::MatrixXd& growth_integral() const noexcept { return growth_integral_; }

    void eval(std::span<const double> x, std::span<const double> u, std::span<double> dx) const
    {
        field_(x, u, dx);
    }

private:
    std::string name_;
    std::size_t state_dim_;
    std::size_t input_dim_;
    VectorField field_;
    HyperRect disturbance_;
    double tau_;
    Eigen::MatrixXd lipschitz_;
    Eigen::MatrixXd input_gain_;
    std::vector<bool> periodic_;
    Eigen::MatrixXd growth_;
    Eigen::MatrixXd growth_integral_;
};

// Unicycle with unit (or given) forward speed: x1' = v cos x3, x2' = v sin x3, x3' = u.
ContinuousSystem make_dubins_car(double tau, HyperRect disturbance, double speed = 1.0);

// Built-in model lookup; throws ValidationError for unknown names.
ContinuousSystem make_system(const std::string& model, double tau, HyperRect disturbance);

inline constexpr int kFlowSubsteps = 8;

// RK4 integration of xdot = f(x,u) + w over [0,t] with a piecewise-constant
// disturbance: w_pieces holds k equal-duration pieces of state_dim values each
// (empty means w = 0). Periodic coordinates are wrapped to [-pi, pi].
Vec flow(const ContinuousSystem& sys, std::span<const double> x0, std::span<const double> u, double t,
         std::span<const double> w_pieces = {});

// In-place variant used in hot loops; x has state_dim entries.
void flow_inplace(const ContinuousSystem& sys, std::span<double> x, std::span<const double> u, double t,
                  std::span<const double> w_pieces = {});

// Growth-bound over-approximation of Sol(x, u, tau) for every x in the input
// rectangle. input_radius widens the set to cover every u' in [u - r, u + r].
ReachSet reach_over_approx(const ContinuousSystem& sys, const ReachSet& cell, std::span<const double> u,
                           std::span<const double> input_radius = {});

// Radius part of reach_over_approx; it does not depend on the center or input.
Vec growth_radius(const ContinuousSystem& sys, std::span<const double> radius,
                  std::span<const double> input_radius = {});

// Scaling-and-squaring Taylor evaluation of e^{A}, relative error < 1e-12.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a);

double wrap_angle(double a) noexcept;

} // namespace kaw
