#pragma once

#include <cmath>
#include <vector>

namespace vortexscale {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGeomTol = 1e-12;

struct Point {
    double x{0.0};
    double y{0.0};
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point p) { return {s * p.x, s * p.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm2(Point p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point p) { return std::sqrt(norm2(p)); }
inline double distance(Point a, Point b) { return norm(a - b); }

/// Rotation by +pi/2.
inline Point perp(Point p) { return {-p.y, p.x}; }

struct Vec2 {
    double x{0.0};
    double y{0.0};
};

struct Ball {
    Point center;
    double radius{0.0};

    bool contains_point(Point p, double tol = kGeomTol) const {
        return distance(center, p) <= radius + tol;
    }
    bool contains_ball(const Ball& other, double tol = kGeomTol) const {
        return distance(center, other.center) + other.radius <= radius + tol;
    }
};

inline bool closures_disjoint(const Ball& a, const Ball& b, double tol = kGeomTol) {
    return distance(a.center, b.center) > a.radius + b.radius + tol;
}

inline bool closures_intersect(const Ball& a, const Ball& b, double tol = kGeomTol) {
    return distance(a.center, b.center) <= a.radius + b.radius + tol;
}

/// Axis-aligned rectangle; the planar domain used everywhere in this library.
struct Rect {
    double x0{0.0};
    double y0{0.0};
    double width{1.0};
    double height{1.0};

    double x1() const { return x0 + width; }
    double y1() const { return y0 + height; }
    double area() const { return width * height; }
    double diameter() const { return std::hypot(width, height); }
    Point center() const { return {x0 + width / 2.0, y0 + height / 2.0}; }

    bool contains_point(Point p, double tol = 0.0) const {
        return p.x >= x0 - tol && p.x <= x1() + tol && p.y >= y0 - tol && p.y <= y1() + tol;
    }
    bool strictly_inside(Point p) const {
        return p.x > x0 && p.x < x1() && p.y > y0 && p.y < y1();
    }
    bool contains_ball(const Ball& b, double tol = kGeomTol) const {
        return b.center.x - b.radius >= x0 - tol && b.center.x + b.radius <= x1() + tol &&
               b.center.y - b.radius >= y0 - tol && b.center.y + b.radius <= y1() + tol;
    }

    /// Distance to the rectangle boundary. Zero exactly on the boundary,
    /// positive elsewhere (inside and outside), 1-Lipschitz.
    double boundary_distance(Point p) const {
        if (contains_point(p)) {
            const double dx = std::min(p.x - x0, x1() - p.x);
            const double dy = std::min(p.y - y0, y1() - p.y);
            return std::min(dx, dy);
        }
        const double dx = std::max({x0 - p.x, 0.0, p.x - x1()});
        const double dy = std::max({y0 - p.y, 0.0, p.y - y1()});
        return std::hypot(dx, dy);
    }
};

/// Smallest ball containing two given balls. If one contains the other the
/// larger ball is returned; otherwise the radius is (r1 + r2 + dist)/2 with
/// the center on the segment between the two centers.
Ball enclosing_ball(const Ball& a, const Ball& b);

/// Smallest enclosing ball of a point cloud (Welzl, deterministic order).
Ball smallest_enclosing_ball(std::vector<Point> points);

/// Iterated pairwise merging until the family is pairwise disjoint.
/// Candidate pairs are scanned in lexicographic center order, so the result
/// does not depend on the input order. Total radius never increases beyond
/// the input sum.
std::vector<Ball> cascade_to_disjoint(std::vector<Ball> balls, double tol = kGeomTol);

}  // namespace vortexscale
