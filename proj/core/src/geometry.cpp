#include "vortexscale/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace vortexscale {

Ball enclosing_ball(const Ball& a, const Ball& b) {
    const double d = distance(a.center, b.center);
    if (d + b.radius <= a.radius) return a;
    if (d + a.radius <= b.radius) return b;
    const double r = (a.radius + b.radius + d) / 2.0;
    // Center sits on the segment, r - a.radius away from a's center.
    const double t = (r - a.radius) / d;
    return Ball{a.center + t * (b.center - a.center), r};
}

namespace {

bool lex_less(Point a, Point b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
}

Ball circle_from(Point a, Point b) {
    return Ball{0.5 * (a + b), distance(a, b) / 2.0};
}

Ball circle_from(Point a, Point b, Point c) {
    const double bx = b.x - a.x, by = b.y - a.y;
    const double cx = c.x - a.x, cy = c.y - a.y;
    const double d = 2.0 * (bx * cy - by * cx);
    if (std::abs(d) < 1e-30) {
        // Degenerate (collinear): fall back to the widest pair.
        Ball best = circle_from(a, b);
        for (const Ball& cand : {circle_from(a, c), circle_from(b, c)}) {
            if (cand.radius > best.radius) best = cand;
        }
        return best;
    }
    const double b2 = bx * bx + by * by;
    const double c2 = cx * cx + cy * cy;
    const Point center{a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
    return Ball{center, distance(center, a)};
}

bool in_ball(const Ball& ball, Point p) {
    return distance(ball.center, p) <= ball.radius * (1.0 + 1e-12) + 1e-300;
}

Ball welzl(std::vector<Point>& pts, std::size_t n, std::vector<Point>& boundary) {
    if (n == 0 || boundary.size() == 3) {
        switch (boundary.size()) {
            case 0: return Ball{{0, 0}, 0.0};
            case 1: return Ball{boundary[0], 0.0};
            case 2: return circle_from(boundary[0], boundary[1]);
            default: return circle_from(boundary[0], boundary[1], boundary[2]);
        }
    }
    const Point p = pts[n - 1];
    Ball ball = welzl(pts, n - 1, boundary);
    if (in_ball(ball, p)) return ball;
    boundary.push_back(p);
    ball = welzl(pts, n - 1, boundary);
    boundary.pop_back();
    return ball;
}

}  // namespace

Ball smallest_enclosing_ball(std::vector<Point> points) {
    if (points.empty()) throw std::invalid_argument("smallest_enclosing_ball: empty point set");
    // Deterministic shuffle-free order: sort, then interleave from both ends.
    std::sort(points.begin(), points.end(), lex_less);
    points.erase(std::unique(points.begin(), points.end(),
                             [](Point a, Point b) { return a.x == b.x && a.y == b.y; }),
                 points.end());
    std::vector<Point> order;
    order.reserve(points.size());
    std::size_t lo = 0, hi = points.size();
    while (lo < hi) {
        order.push_back(points[lo++]);
        if (lo < hi) order.push_back(points[--hi]);
    }
    std::vector<Point> boundary;
    return welzl(order, order.size(), boundary);
}

std::vector<Ball> cascade_to_disjoint(std::vector<Ball> balls, double tol) {
    auto ball_less = [](const Ball& a, const Ball& b) {
        if (a.center.x != b.center.x) return a.center.x < b.center.x;
        if (a.center.y != b.center.y) return a.center.y < b.center.y;
        return a.radius < b.radius;
    };
    std::sort(balls.begin(), balls.end(), ball_less);
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i + 1 < balls.size() && !merged; ++i) {
            for (std::size_t j = i + 1; j < balls.size() && !merged; ++j) {
                if (closures_intersect(balls[i], balls[j], tol)) {
                    Ball e = enclosing_ball(balls[i], balls[j]);
                    balls.erase(balls.begin() + static_cast<std::ptrdiff_t>(j));
                    balls.erase(balls.begin() + static_cast<std::ptrdiff_t>(i));
                    balls.insert(std::lower_bound(balls.begin(), balls.end(), e, ball_less), e);
                    merged = true;
                }
            }
        }
    }
    return balls;
}

}  // namespace vortexscale
