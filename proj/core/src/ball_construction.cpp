#include "vortexscale/ball_construction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace vortexscale {

namespace {

std::vector<std::size_t> sorted_order(const std::vector<Ball>& balls) {
    std::vector<std::size_t> order(balls.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&balls](std::size_t a, std::size_t b) {
        const Ball& ba = balls[a];
        const Ball& bb = balls[b];
        if (ba.center.x != bb.center.x) return ba.center.x < bb.center.x;
        if (ba.center.y != bb.center.y) return ba.center.y < bb.center.y;
        return ba.radius < bb.radius;
    });
    return order;
}

// Cascade of pairwise merges at a fixed instant, tracking which original
// indices each surviving ball absorbed. Scan order is lexicographic in the
// centers so the outcome is independent of the input order.
std::vector<EpochBall> cascade_with_parents(const std::vector<Ball>& balls) {
    struct Tracked {
        Ball ball;
        std::vector<std::size_t> parents;
    };
    std::vector<Tracked> family;
    family.reserve(balls.size());
    for (std::size_t idx : sorted_order(balls)) {
        family.push_back(Tracked{balls[idx], {idx}});
    }
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i + 1 < family.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < family.size() && !merged; ++j) {
                if (closures_intersect(family[i].ball, family[j].ball)) {
                    Tracked combined;
                    combined.ball = enclosing_ball(family[i].ball, family[j].ball);
                    combined.parents = family[i].parents;
                    combined.parents.insert(combined.parents.end(), family[j].parents.begin(),
                                            family[j].parents.end());
                    family.erase(family.begin() + static_cast<std::ptrdiff_t>(j));
                    family.erase(family.begin() + static_cast<std::ptrdiff_t>(i));
                    family.push_back(std::move(combined));
                    merged = true;
                }
            }
        }
    }
    std::vector<EpochBall> out;
    out.reserve(family.size());
    for (auto& tracked : family) {
        std::sort(tracked.parents.begin(), tracked.parents.end());
        out.push_back(EpochBall{tracked.ball.center, tracked.ball.radius,
                                std::move(tracked.parents)});
    }
    std::sort(out.begin(), out.end(), [](const EpochBall& a, const EpochBall& b) {
        if (a.center.x != b.center.x) return a.center.x < b.center.x;
        return a.center.y < b.center.y;
    });
    return out;
}

}  // namespace

BallTrajectory BallTrajectory::construct(std::vector<Ball> initial, double t_max) {
    if (t_max < 0.0) throw std::invalid_argument("construct: negative horizon");
    for (const auto& b : initial) {
        if (!(b.radius > 0.0)) throw std::invalid_argument("construct: nonpositive radius");
    }
    for (std::size_t i = 0; i < initial.size(); ++i) {
        for (std::size_t j = i + 1; j < initial.size(); ++j) {
            if (!closures_disjoint(initial[i], initial[j])) {
                throw std::invalid_argument("construct: initial ball closures overlap");
            }
        }
    }
    BallTrajectory traj;
    traj.horizon_ = t_max;
    Epoch first;
    first.start = 0.0;
    for (std::size_t idx : sorted_order(initial)) {
        first.balls.push_back(EpochBall{initial[idx].center, initial[idx].radius, {idx}});
    }
    traj.epochs_.push_back(std::move(first));

    while (true) {
        const Epoch& epoch = traj.epochs_.back();
        if (epoch.balls.size() <= 1) break;
        // First contact within the epoch: (r_i + r_j)(1+t)/(1+T_k) = dist.
        const double scale0 = 1.0 + epoch.start;
        double next = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < epoch.balls.size(); ++i) {
            for (std::size_t j = i + 1; j < epoch.balls.size(); ++j) {
                const double d = distance(epoch.balls[i].center, epoch.balls[j].center);
                const double rsum = epoch.balls[i].entry_radius + epoch.balls[j].entry_radius;
                const double t_contact = d * scale0 / rsum - 1.0;
                next = std::min(next, t_contact);
            }
        }
        if (!(next <= t_max)) break;
        const double growth = (1.0 + next) / scale0;
        std::vector<Ball> grown;
        grown.reserve(epoch.balls.size());
        for (const auto& b : epoch.balls) {
            grown.push_back(Ball{b.center, b.entry_radius * growth});
        }
        Epoch merged;
        merged.start = next;
        merged.balls = cascade_with_parents(grown);
        traj.merge_times_.push_back(next);
        traj.epochs_.push_back(std::move(merged));
    }
    return traj;
}

std::size_t BallTrajectory::epoch_index_at(double t) const {
    if (t < 0.0 || t > horizon_ * (1.0 + 1e-12) + 1e-12) {
        throw std::out_of_range("balls_at: time outside [0, horizon]");
    }
    std::size_t k = 0;
    while (k + 1 < epochs_.size() && epochs_[k + 1].start <= t) ++k;
    return k;
}

std::vector<Ball> BallTrajectory::balls_at(double t) const {
    const std::size_t k = epoch_index_at(t);
    const Epoch& epoch = epochs_[k];
    const double growth = (1.0 + t) / (1.0 + epoch.start);
    std::vector<Ball> out;
    out.reserve(epoch.balls.size());
    for (const auto& b : epoch.balls) out.push_back(Ball{b.center, b.entry_radius * growth});
    return out;
}

double BallTrajectory::total_radius_at(double t) const {
    double sum = 0.0;
    for (const auto& b : balls_at(t)) sum += b.radius;
    return sum;
}

std::string BallTrajectory::event_log_json() const {
    nlohmann::json log;
    log["merge_times"] = merge_times_;
    log["horizon"] = horizon_;
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& epoch : epochs_) {
        nlohmann::json balls = nlohmann::json::array();
        for (const auto& b : epoch.balls) {
            balls.push_back({{"x", b.center.x},
                             {"y", b.center.y},
                             {"entry_radius", b.entry_radius},
                             {"parents", b.parents}});
        }
        epochs.push_back({{"start", epoch.start}, {"balls", std::move(balls)}});
    }
    log["epochs"] = std::move(epochs);
    return log.dump(2);
}

WeightedBalls::WeightedBalls(BallTrajectory trajectory, AtomicMeasure mu)
    : trajectory_(std::move(trajectory)), mu_(std::move(mu)) {
    const auto& epochs = trajectory_.epochs();
    charges_.resize(epochs.size());
    // Initial charges from geometry, then propagated through parent links.
    charges_[0].resize(epochs[0].balls.size());
    for (std::size_t i = 0; i < epochs[0].balls.size(); ++i) {
        const auto& b = epochs[0].balls[i];
        charges_[0][i] = mu_.weight_in(Ball{b.center, b.entry_radius});
    }
    for (const auto& atom : mu_.atoms()) {
        bool covered = false;
        for (const auto& b : epochs[0].balls) {
            if (Ball{b.center, b.entry_radius}.contains_point(atom.position)) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            throw std::invalid_argument(
                "WeightedBalls: measure support not inside the initial balls");
        }
    }
    for (std::size_t k = 1; k < epochs.size(); ++k) {
        charges_[k].resize(epochs[k].balls.size(), 0.0);
        for (std::size_t i = 0; i < epochs[k].balls.size(); ++i) {
            double sum = 0.0;
            for (std::size_t parent : epochs[k].balls[i].parents) {
                sum += charges_[k - 1][parent];
            }
            charges_[k][i] = sum;
        }
    }
}

WeightedBalls run_construction(std::vector<Ball> initial, const AtomicMeasure& mu, double t_max) {
    return WeightedBalls(BallTrajectory::construct(std::move(initial), t_max), mu);
}

Ball merge_cluster(std::vector<Ball> balls) {
    if (balls.empty()) throw std::invalid_argument("merge_cluster: empty family");
    while (balls.size() > 1) {
        // Force-merge: treat the family as one touching cluster, pairwise.
        std::vector<Ball> reduced = cascade_to_disjoint(std::move(balls));
        if (reduced.size() > 1) {
            // Disjoint remainder: merge the lexicographically first pair.
            Ball e = enclosing_ball(reduced[0], reduced[1]);
            reduced.erase(reduced.begin(), reduced.begin() + 2);
            reduced.push_back(e);
        }
        balls = std::move(reduced);
    }
    return balls[0];
}

double epoch_lower_bound(const WeightedBalls& w, const std::optional<Rect>& U, double t1,
                         double t2) {
    if (!(t1 < t2)) throw std::invalid_argument("epoch_lower_bound: requires t1 < t2");
    const auto& traj = w.trajectory();
    const std::size_t k = traj.epoch_index_at(t2);
    const Epoch& epoch = traj.epochs()[k];
    const double growth = (1.0 + t2) / (1.0 + epoch.start);
    double count = 0.0;
    for (std::size_t i = 0; i < epoch.balls.size(); ++i) {
        const Ball ball{epoch.balls[i].center, epoch.balls[i].entry_radius * growth};
        if (U.has_value() && !U->contains_ball(ball)) continue;
        count += std::abs(w.charge(k, i));
    }
    return kPi * count * std::log((1.0 + t2) / (1.0 + t1));
}

double lower_bound_F(const WeightedBalls& w, const Rect& domain, double t_stop,
                     std::vector<double> partition) {
    if (w.measure().empty()) return 0.0;
    partition.erase(std::remove_if(partition.begin(), partition.end(),
                                   [t_stop](double t) { return t < 0.0 || t > t_stop; }),
                    partition.end());
    partition.push_back(0.0);
    partition.push_back(t_stop);
    std::sort(partition.begin(), partition.end());
    partition.erase(std::unique(partition.begin(), partition.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-15; }),
                    partition.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
        total += epoch_lower_bound(w, domain, partition[i], partition[i + 1]);
    }
    return total;
}

std::vector<double> dyadic_partition(double t_stop) {
    std::vector<double> times;
    for (double v = 2.0; v - 1.0 < t_stop; v *= 2.0) times.push_back(v - 1.0);
    times.push_back(t_stop);
    return times;
}

std::vector<double> containment_exit_times(const BallTrajectory& trajectory, const Rect& domain,
                                           double t_stop) {
    std::vector<double> times;
    const auto& epochs = trajectory.epochs();
    for (std::size_t k = 0; k < epochs.size(); ++k) {
        const double entry = epochs[k].start;
        const double next = (k + 1 < epochs.size()) ? epochs[k + 1].start
                                                    : std::numeric_limits<double>::infinity();
        for (const auto& b : epochs[k].balls) {
            const double bd = domain.boundary_distance(b.center);
            if (bd <= 0.0 || b.entry_radius >= bd) continue;
            // radius(t) = entry_radius (1+t)/(1+entry) reaches bd at:
            const double t_exit = bd * (1.0 + entry) / b.entry_radius - 1.0;
            if (t_exit > entry && t_exit < next && t_exit <= t_stop) times.push_back(t_exit);
        }
    }
    std::sort(times.begin(), times.end());
    return times;
}

}  // namespace vortexscale
