#pragma once

#include "girsanov/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace girsanov {

struct ChainEvent {
    double time = 0.0;
    int state = 0;

    friend bool operator==(const ChainEvent&, const ChainEvent&) = default;
};

/**
 * Cadlag trajectory of a finite chain on [0, horizon].
 *
 * Event times are strictly increasing in (0, horizon] and every event
 * changes the state. After killed_at the path sits at kCemetery.
 */
class ChainPath {
public:
    ChainPath(int x0, std::vector<ChainEvent> events, double horizon,
              std::optional<double> killed_at = std::nullopt);

    int x0() const { return x0_; }
    const std::vector<ChainEvent>& events() const { return events_; }
    double horizon() const { return horizon_; }
    const std::optional<double>& killed_at() const { return killed_at_; }

    /// X_s (right-continuous); kCemetery from killed_at on.
    int state_at(double s) const;

    /// X_{s-}; equals x0 at s = 0.
    int left_limit(double s) const;

    bool alive_at(double s) const { return !killed_at_ || s < *killed_at_; }

    friend bool operator==(const ChainPath&, const ChainPath&) = default;

private:
    int x0_;
    std::vector<ChainEvent> events_;
    double horizon_;
    std::optional<double> killed_at_;
};

/**
 * Jump-diffusion trajectory in R^d.
 *
 * The continuous component C (Brownian part plus the Gaussian small-jump
 * correction) is stored on a uniform grid k*dt, k = 0..steps, and is
 * linear in between; jumps are an explicit event list. The position is
 * X_s = C(s) + sum_{tau_j <= s} z_j.
 */
class DiffusionPath {
public:
    DiffusionPath(int dim, double dt, std::vector<double> continuous,
                  std::vector<double> jump_times, std::vector<double> jump_displacements);

    int dim() const { return dim_; }
    double dt() const { return dt_; }
    std::size_t steps() const { return continuous_.size() / static_cast<std::size_t>(dim_) - 1; }
    double horizon() const { return dt_ * static_cast<double>(steps()); }

    const std::vector<double>& continuous() const { return continuous_; }
    const std::vector<double>& jump_times() const { return jump_times_; }
    const std::vector<double>& jump_displacements() const { return jump_displacements_; }
    std::size_t jump_count() const { return jump_times_.size(); }
    std::span<const double> jump(std::size_t j) const;

    std::vector<double> x0() const;
    std::vector<double> continuous_at(double s) const;
    std::vector<double> position(double s) const;
    std::vector<double> left_position(double s) const;

    /// Subinterval endpoints of [0, t]: grid points and jump epochs in (0, t).
    std::vector<double> partition(double t) const;

private:
    int dim_;
    double dt_;
    std::vector<double> continuous_;
    std::vector<double> jump_times_;
    std::vector<double> jump_displacements_;
};

using PointFunction = std::function<double(std::span<const double>)>;
using PairFunction = std::function<double(std::span<const double>, std::span<const double>)>;
using StatePairFunction = std::function<double(int, int)>;

/// Value of a state function with the cemetery convention f(Delta) = 0.
inline double eval_state(const Eigen::VectorXd& f, int x) { return x == kCemetery ? 0.0 : f(x); }

/// Time reversal r_t: s -> X((t-s)-) on [0, t].
ChainPath reverse(const ChainPath& path, double t);

/// Time reversal of a diffusion path; t must lie on the sample grid.
DiffusionPath reverse(const DiffusionPath& path, double t);

/// Path restarted at time s (theta_s), with horizon reduced by s.
ChainPath shift(const ChainPath& path, double s);

/// int_0^t f(X_s) ds, exact for piecewise-constant chain paths.
double integrate_along(const ChainPath& path, const Eigen::VectorXd& f, double t);

/// int_0^t f(X_s) ds by the trapezoidal rule on the grid-and-jump partition.
double integrate_along(const DiffusionPath& path, const PointFunction& f, double t);

/// sum_{0<s<=t} F(X_{s-}, X_s) over recorded jump events (killing excluded).
double jump_sum(const ChainPath& path, const StatePairFunction& f, double t);

double jump_sum(const DiffusionPath& path, const PairFunction& f, double t);

/// |int_0^t f(X_s)ds - same integral along reverse(path, t)|
double evenness_residual(const ChainPath& path, const Eigen::VectorXd& f, double t);

double evenness_residual(const DiffusionPath& path, const PointFunction& f, double t);

/// Ito sum of grad u(X) against the continuous component over [0, t].
double continuous_martingale(const DiffusionPath& path, const PointFunction& u, double t);

/**
 * Forward-backward residual
 *   |u(X_t) - u(X_0) - (M_t - M_t o r_t)/2 - sum_{s<=t} (u(X_s) - u(X_{s-}))|
 * where M is the continuous martingale part of u(X). On chains M = 0.
 */
double lyons_zheng_residual(const ChainPath& path, const Eigen::VectorXd& u,
                            const FiniteSymmetricModel& model, double t);

double lyons_zheng_residual(const DiffusionPath& path, const PointFunction& u,
                            const JumpDiffusionModel& model, double t);

/// Debug dump: columns time,state,event_flag (one row at 0, one per event,
/// one for killing with state -1, one at the horizon).
void write_csv(std::ostream& out, const ChainPath& path);

/// Debug dump: columns time,x1..xd,event_flag (grid rows flag 0, jump rows flag 1).
void write_csv(std::ostream& out, const DiffusionPath& path);

} // namespace girsanov
