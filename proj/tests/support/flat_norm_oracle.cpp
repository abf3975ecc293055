#include "flat_norm_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vortexscale::testing {

namespace {

struct Candidate {
    // psi_i = sign[i] * m(root[i]) + L * delta[i]
    std::vector<int> root;
    std::vector<double> sign;
    std::vector<double> delta;
};

struct OracleProblem {
    std::vector<Point> nodes;
    std::vector<double> weights;
    std::vector<double> bd;
    std::vector<std::vector<double>> dist;
    std::vector<Candidate> candidates;
};

// Assignment per node: anchor with sign, or edge to a parent with sign.
// Resolving the parent chains turns an acyclic assignment into a candidate
// vertex; cyclic assignments are discarded.
void enumerate_assignments(OracleProblem& problem, std::vector<int>& parent,
                           std::vector<double>& edge_sign, std::size_t node) {
    const std::size_t n = problem.nodes.size();
    if (node == n) {
        Candidate cand;
        cand.root.assign(n, -1);
        cand.sign.assign(n, 0.0);
        cand.delta.assign(n, 0.0);
        std::vector<int> state(n, 0);  // 0 unvisited, 1 visiting, 2 done
        for (std::size_t start = 0; start < n; ++start) {
            if (state[start] == 2) continue;
            std::vector<std::size_t> chain;
            std::size_t cur = start;
            while (true) {
                if (state[cur] == 1) return;  // cycle
                if (state[cur] == 2) break;
                state[cur] = 1;
                chain.push_back(cur);
                if (parent[cur] < 0) break;
                cur = static_cast<std::size_t>(parent[cur]);
            }
            // Walk the chain backwards from the resolved end.
            for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
                const std::size_t i = *it;
                if (parent[i] < 0) {
                    cand.root[i] = static_cast<int>(i);
                    cand.sign[i] = edge_sign[i];
                    cand.delta[i] = 0.0;
                } else {
                    const std::size_t p = static_cast<std::size_t>(parent[i]);
                    cand.root[i] = cand.root[p];
                    cand.sign[i] = cand.sign[p];
                    cand.delta[i] = cand.delta[p] + edge_sign[i] * problem.dist[i][p];
                }
                state[i] = 2;
            }
        }
        problem.candidates.push_back(std::move(cand));
        return;
    }
    for (double s : {1.0, -1.0}) {
        parent[node] = -1;
        edge_sign[node] = s;
        enumerate_assignments(problem, parent, edge_sign, node + 1);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (j == node) continue;
        for (double s : {1.0, -1.0}) {
            parent[node] = static_cast<int>(j);
            edge_sign[node] = s;
            enumerate_assignments(problem, parent, edge_sign, node + 1);
        }
    }
}

double best_value_at(const OracleProblem& problem, double big_l) {
    const std::size_t n = problem.nodes.size();
    std::vector<double> box(n);
    for (std::size_t i = 0; i < n; ++i) {
        box[i] = std::min(big_l * problem.bd[i], 1.0 - big_l);
    }
    const double tol = 1e-9;
    double best = 0.0;  // psi = 0 is always feasible
    std::vector<double> psi(n);
    for (const auto& cand : problem.candidates) {
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            psi[i] = cand.sign[i] * box[static_cast<std::size_t>(cand.root[i])] +
                     big_l * cand.delta[i];
            if (std::abs(psi[i]) > box[i] + tol) feasible = false;
        }
        for (std::size_t i = 0; i < n && feasible; ++i) {
            for (std::size_t j = i + 1; j < n && feasible; ++j) {
                if (std::abs(psi[i] - psi[j]) > big_l * problem.dist[i][j] + tol) {
                    feasible = false;
                }
            }
        }
        if (!feasible) continue;
        double value = 0.0;
        for (std::size_t i = 0; i < n; ++i) value += problem.weights[i] * psi[i];
        best = std::max(best, value);
    }
    return best;
}

}  // namespace

Point snap_to_oracle_grid(Point p, const Rect& domain, int grid_nodes) {
    const double hx = domain.width / (grid_nodes - 1);
    const double hy = domain.height / (grid_nodes - 1);
    const double i = std::clamp(std::round((p.x - domain.x0) / hx), 0.0,
                                static_cast<double>(grid_nodes - 1));
    const double j = std::clamp(std::round((p.y - domain.y0) / hy), 0.0,
                                static_cast<double>(grid_nodes - 1));
    return {domain.x0 + i * hx, domain.y0 + j * hy};
}

double flat_norm_oracle(const AtomicMeasure& mu, const Rect& domain, int grid_nodes) {
    if (mu.empty()) return 0.0;
    if (mu.size() > 6) {
        throw std::invalid_argument("flat_norm_oracle: enumeration limited to 6 atoms");
    }
    // Snap atoms to grid nodes, merging collisions.
    std::vector<WeightedAtom> snapped;
    for (const auto& atom : mu.atoms()) {
        snapped.push_back(
            WeightedAtom{snap_to_oracle_grid(atom.position, domain, grid_nodes), atom.weight});
    }
    const AtomicMeasure snapped_mu(std::move(snapped));
    if (snapped_mu.empty()) return 0.0;

    OracleProblem problem;
    for (const auto& atom : snapped_mu.atoms()) {
        problem.nodes.push_back(atom.position);
        problem.weights.push_back(atom.weight);
        problem.bd.push_back(domain.boundary_distance(atom.position));
    }
    const std::size_t n = problem.nodes.size();
    problem.dist.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            problem.dist[i][j] = distance(problem.nodes[i], problem.nodes[j]);
        }
    }
    std::vector<int> parent(n, -1);
    std::vector<double> edge_sign(n, 1.0);
    enumerate_assignments(problem, parent, edge_sign, 0);

    // Golden section on the concave value function of L.
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = 1.0;
    double m1 = hi - phi * (hi - lo), m2 = lo + phi * (hi - lo);
    double f1 = best_value_at(problem, m1), f2 = best_value_at(problem, m2);
    for (int iter = 0; iter < 120; ++iter) {
        if (f1 < f2) {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + phi * (hi - lo);
            f2 = best_value_at(problem, m2);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - phi * (hi - lo);
            f1 = best_value_at(problem, m1);
        }
    }
    return std::max({f1, f2, best_value_at(problem, 0.0), best_value_at(problem, 1.0)});
}

}  // namespace vortexscale::testing
