#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vortexscale/atomic_measure.hpp"
#include "vortexscale/geometry.hpp"

namespace vortexscale {

/// One ball of an epoch: geometry at the epoch entry time plus the indices of
/// the previous-epoch balls it absorbed (itself, if it just kept expanding).
struct EpochBall {
    Point center;
    double entry_radius{0.0};
    std::vector<std::size_t> parents;
};

struct Epoch {
    double start{0.0};  // entry time T_k
    std::vector<EpochBall> balls;
};

/// Time-parametrized expansion/merging family. Within epoch k every ball has
/// radius entry_radius * (1+t)/(1+T_k); at the first contact time the touching
/// cluster is replaced by the iterated pairwise smallest enclosing ball and a
/// new epoch begins. Merging cascades until the family is pairwise disjoint.
class BallTrajectory {
public:
    /// Initial closures must be pairwise disjoint.
    static BallTrajectory construct(std::vector<Ball> initial, double t_max);

    const std::vector<Epoch>& epochs() const { return epochs_; }
    const std::vector<double>& merge_times() const { return merge_times_; }
    double horizon() const { return horizon_; }

    std::size_t epoch_index_at(double t) const;
    std::vector<Ball> balls_at(double t) const;
    /// Sum of radii at time t.
    double total_radius_at(double t) const;

    /// Event log {merge_times, per-epoch balls, parent_map} for plotting.
    std::string event_log_json() const;

private:
    std::vector<Epoch> epochs_;
    std::vector<double> merge_times_;
    double horizon_{0.0};
};

/// A trajectory together with the atomic measure carried by its balls.
/// Charges are assigned on the initial balls and follow the parent links, so
/// they are conserved along every lineage between merge times.
class WeightedBalls {
public:
    WeightedBalls(BallTrajectory trajectory, AtomicMeasure mu);

    const BallTrajectory& trajectory() const { return trajectory_; }
    const AtomicMeasure& measure() const { return mu_; }
    double charge(std::size_t epoch, std::size_t ball) const {
        return charges_[epoch][ball];
    }
    const std::vector<double>& charges_at_epoch(std::size_t epoch) const {
        return charges_[epoch];
    }

private:
    BallTrajectory trajectory_;
    AtomicMeasure mu_;
    std::vector<std::vector<double>> charges_;
};

/// Runs the expansion/merging construction from the given initial balls,
/// carrying the measure. supp(mu) must lie inside the union of the initial
/// balls and the initial closures must be pairwise disjoint.
WeightedBalls run_construction(std::vector<Ball> initial, const AtomicMeasure& mu, double t_max);

/// Smallest ball produced by iterated pairwise merging of the input family.
/// Contains every input ball; its radius is at most the sum of input radii.
Ball merge_cluster(std::vector<Ball> balls);

/// pi * sum over balls at t2 contained in U of |charge| * log((1+t2)/(1+t1)).
/// U = nullopt means the whole plane.
double epoch_lower_bound(const WeightedBalls& w, const std::optional<Rect>& U, double t1,
                         double t2);

/// Sum of epoch lower bounds with U = domain over consecutive partition
/// intervals: a certified lower bound for the annulus-family functional and
/// hence for half the Dirichlet energy of any admissible order parameter.
double lower_bound_F(const WeightedBalls& w, const Rect& domain, double t_stop,
                     std::vector<double> partition);

/// Times 2^k - 1 up to t_stop, plus t_stop itself.
std::vector<double> dyadic_partition(double t_stop);

/// For each epoch ball, the time at which it stops being contained in the
/// domain (radius reaches the center's boundary distance), when that happens
/// before the next merge. Useful partition refinements.
std::vector<double> containment_exit_times(const BallTrajectory& trajectory, const Rect& domain,
                                           double t_stop);

}  // namespace vortexscale
