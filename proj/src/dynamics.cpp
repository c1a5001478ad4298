#include "kaw/dynamics.hpp"

#include "kaw/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace kaw {

double wrap_angle(double a) noexcept
{
    constexpr double two_pi = 2 * std::numbers::pi;
    double r = std::fmod(a + std::numbers::pi, two_pi);
    if (r < 0) r += two_pi;
    return r - std::numbers::pi;
}

HyperRect ReachSet::rect() const
{
    HyperRect r;
    r.lower.resize(center.size());
    r.upper.resize(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        r.lower[i] = center[i] - radius[i];
        r.upper[i] = center[i] + radius[i];
    }
    return r;
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a)
{
    const auto n = a.rows();
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);

    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-17 * std::max(1.0, result.cwiseAbs().maxCoeff())) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

ContinuousSystem::ContinuousSystem(std::string name, std::size_t state_dim, std::size_t input_dim, VectorField field,
                                   HyperRect disturbance, double tau, Eigen::MatrixXd lipschitz,
                                   Eigen::MatrixXd input_gain, std::vector<bool> periodic)
    : name_(std::move(name)), state_dim_(state_dim), input_dim_(input_dim), field_(std::move(field)),
      disturbance_(std::move(disturbance)), tau_(tau), lipschitz_(std::move(lipschitz)),
      input_gain_(std::move(input_gain)), periodic_(std::move(periodic))
{
    const auto n = static_cast<Eigen::Index>(state_dim_);
    if (state_dim_ == 0 || state_dim_ > kMaxStateDim)
        throw ValidationError("state dimension must be in [1, " + std::to_string(kMaxStateDim) + "]");
    if (!(tau_ > 0)) throw ValidationError("sampling time must be positive");
    if (disturbance_.dim() != state_dim_) throw ValidationError("disturbance box has wrong dimension");
    for (std::size_t i = 0; i < state_dim_; ++i)
        if (disturbance_.lower[i] > 0 || disturbance_.upper[i] < 0)
            throw ValidationError("disturbance set must contain the origin");
    if (lipschitz_.rows() != n || lipschitz_.cols() != n)
        throw ValidationError("Lipschitz matrix must be state_dim x state_dim");
    if ((lipschitz_.array() < 0).any()) throw ValidationError("Lipschitz matrix entries must be non-negative");
    if (input_gain_.size() == 0) input_gain_ = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(input_dim_));
    if (input_gain_.rows() != n || input_gain_.cols() != static_cast<Eigen::Index>(input_dim_))
        throw ValidationError("input gain must be state_dim x input_dim");
    if (periodic_.empty()) periodic_.assign(state_dim_, false);
    if (periodic_.size() != state_dim_) throw ValidationError("periodic mask has wrong length");

    growth_ = matrix_exponential(lipschitz_ * tau_);
    // Upper-right block of exp([[L, I], [0, 0]] tau) is the integral of e^{Ls} over [0, tau].
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    augmented.topLeftCorner(n, n) = lipschitz_ * tau_;
    augmented.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n) * tau_;
    growth_integral_ = matrix_exponential(augmented).topRightCorner(n, n);
}

ContinuousSystem make_dubins_car(double tau, HyperRect disturbance, double speed)
{
    auto field = [speed](std::span<const double> x, std::span<const double> u, std::span<double> dx) {
        dx[0] = speed * std::cos(x[2]);
        dx[1] = speed * std::sin(x[2]);
        dx[2] = u[0];
    };
    Eigen::MatrixXd lipschitz{{0, 0, std::abs(speed)}, {0, 0, std::abs(speed)}, {0, 0, 0}};
    Eigen::MatrixXd input_gain{{0}, {0}, {1}};
    return ContinuousSystem("dubins_car", 3, 1, field, std::move(disturbance), tau, lipschitz, input_gain,
                            {false, false, true});
}

ContinuousSystem make_system(const std::string& model, double tau, HyperRect disturbance)
{
    if (model == "dubins_car") return make_dubins_car(tau, std::move(disturbance));
    throw ValidationError("unknown system model '" + model + "'");
}

void flow_inplace(const ContinuousSystem& sys, std::span<double> x, std::span<const double> u, double t,
                  std::span<const double> w_pieces)
{
    const std::size_t n = sys.state_dim();
    const std::size_t pieces = w_pieces.empty() ? 1 : w_pieces.size() / n;
    if (!w_pieces.empty() && pieces * n != w_pieces.size())
        throw ValidationError("disturbance pieces must be a multiple of the state dimension");

    std::array<double, kMaxStateDim> k1{}, k2{}, k3{}, k4{}, tmp{};
    const std::span<double> s1(k1.data(), n), s2(k2.data(), n), s3(k3.data(), n), s4(k4.data(), n),
        st(tmp.data(), n);

    // Substeps per disturbance piece, keeping at least kFlowSubsteps in total.
    const std::size_t per_piece = (kFlowSubsteps + pieces - 1) / pieces;
    const double h = t / static_cast<double>(pieces * per_piece);

    for (std::size_t p = 0; p < pieces; ++p) {
        const double* w = w_pieces.empty() ? nullptr : w_pieces.data() + p * n;
        auto rhs = [&](std::span<const double> xs, std::span<double> dx) {
            sys.eval(xs, u, dx);
            if (w)
                for (std::size_t i = 0; i < n; ++i) dx[i] += w[i];
        };
        for (std::size_t s = 0; s < per_piece; ++s) {
            rhs(x, s1);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h / 2 * k1[i];
            rhs(st, s2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h / 2 * k2[i];
            rhs(st, s3);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
            rhs(st, s4);
            for (std::size_t i = 0; i < n; ++i) x[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (sys.periodic()[i]) x[i] = wrap_angle(x[i]);
}

Vec flow(const ContinuousSystem& sys, std::span<const double> x0, std::span<const double> u, double t,
         std::span<const double> w_pieces)
{
    Vec x(x0.begin(), x0.end());
    flow_inplace(sys, x, u, t, w_pieces);
    return x;
}

Vec growth_radius(const ContinuousSystem& sys, std::span<const double> radius, std::span<const double> input_radius)
{
    const std::size_t n = sys.state_dim();
    if (radius.size() != n) throw ValidationError("radius has wrong dimension");
    Eigen::VectorXd r0(static_cast<Eigen::Index>(n));
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        r0[k] = radius[i];
        w[k] = std::max(std::abs(sys.disturbance().lower[i]), std::abs(sys.disturbance().upper[i]));
    }
    if (!input_radius.empty() && sys.input_gain().size() != 0) {
        if (input_radius.size() != sys.input_dim()) throw ValidationError("input radius has wrong dimension");
        Eigen::VectorXd ru(static_cast<Eigen::Index>(input_radius.size()));
        for (std::size_t j = 0; j < input_radius.size(); ++j) ru[static_cast<Eigen::Index>(j)] = input_radius[j];
        // Input deviation enters like an additive disturbance bounded by |df/du| r_u.
        w += sys.input_gain() * ru;
    }
    const Eigen::VectorXd r = sys.growth() * r0 + sys.growth_integral() * w;

    Vec out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = r[static_cast<Eigen::Index>(i)];
        if (sys.periodic()[i]) out[i] = std::min(out[i], std::numbers::pi);
    }
    return out;
}

ReachSet reach_over_approx(const ContinuousSystem& sys, const ReachSet& cell, std::span<const double> u,
                           std::span<const double> input_radius)
{
    return {flow(sys, cell.center, u, sys.tau()), growth_radius(sys, cell.radius, input_radius)};
}

} // namespace kaw
