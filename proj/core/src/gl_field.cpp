#include "vortexscale/gl_field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <queue>
#include <random>
#include <stdexcept>

#include <fftw3.h>
#include <json.hpp>

#include "vortexscale/flat_norm.hpp"

namespace vortexscale {

GLField::GLField(int nx, int ny, double h, Point origin, double epsilon)
    : nx_(nx), ny_(ny), h_(h), origin_(origin), epsilon_(epsilon) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("GLField: grid needs at least 2x2 nodes");
    if (!(h > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("GLField: h and epsilon must be positive");
    }
    if (h > epsilon / 4.0 * (1.0 + 1e-12)) {
        throw std::invalid_argument("GLField: grid spacing must be at most eps/4");
    }
    vals_.assign(2 * static_cast<std::size_t>(nx) * ny, 0.0);
}

Vec2 GLField::sample(Point p) const {
    const double fx = (p.x - origin_.x) / h_;
    const double fy = (p.y - origin_.y) / h_;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
    const double ax = std::clamp(fx - i, 0.0, 1.0);
    const double ay = std::clamp(fy - j, 0.0, 1.0);
    const Vec2 v00 = value(i, j), v10 = value(i + 1, j);
    const Vec2 v01 = value(i, j + 1), v11 = value(i + 1, j + 1);
    return {(1 - ax) * (1 - ay) * v00.x + ax * (1 - ay) * v10.x + (1 - ax) * ay * v01.x +
                ax * ay * v11.x,
            (1 - ax) * (1 - ay) * v00.y + ax * (1 - ay) * v10.y + (1 - ax) * ay * v01.y +
                ax * ay * v11.y};
}

void GLField::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("GLField::save: cannot open " + path);
    const std::int64_t nx = nx_, ny = ny_;
    out.write(reinterpret_cast<const char*>(&nx), sizeof(nx));
    out.write(reinterpret_cast<const char*>(&ny), sizeof(ny));
    const double header[4] = {h_, origin_.x, origin_.y, epsilon_};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(vals_.data()),
              static_cast<std::streamsize>(vals_.size() * sizeof(double)));
    nlohmann::json sidecar{{"nx", nx_},          {"ny", ny_},   {"h", h_},
                           {"x0", origin_.x},    {"y0", origin_.y},
                           {"epsilon", epsilon_}, {"encoding", "row-major float64 pairs"}};
    std::ofstream side(path + ".json");
    side << sidecar.dump(2) << "\n";
}

GLField GLField::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("GLField::load: cannot open " + path);
    std::int64_t nx = 0, ny = 0;
    in.read(reinterpret_cast<char*>(&nx), sizeof(nx));
    in.read(reinterpret_cast<char*>(&ny), sizeof(ny));
    double header[4];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    GLField field(static_cast<int>(nx), static_cast<int>(ny), header[0], {header[1], header[2]},
                  header[3]);
    in.read(reinterpret_cast<char*>(field.vals_.data()),
            static_cast<std::streamsize>(field.vals_.size() * sizeof(double)));
    if (!in) throw std::runtime_error("GLField::load: truncated file " + path);
    return field;
}

Potential Potential::standard() {
    Potential p;
    p.w = [](double t) {
        const double s = 1.0 - t * t;
        return s * s / 4.0;
    };
    return p;
}

namespace {

// Gradient of one component at a node, central inside, one-sided on edges.
inline void node_gradient(const GLField& u, int i, int j, Vec2& gx, Vec2& gy) {
    const double h = u.h();
    const int il = std::max(i - 1, 0), ir = std::min(i + 1, u.nx() - 1);
    const int jl = std::max(j - 1, 0), jr = std::min(j + 1, u.ny() - 1);
    const Vec2 vxr = u.value(ir, j), vxl = u.value(il, j);
    const Vec2 vyr = u.value(i, jr), vyl = u.value(i, jl);
    const double dx = (ir - il) * h, dy = (jr - jl) * h;
    gx = {(vxr.x - vxl.x) / dx, (vxr.y - vxl.y) / dx};
    gy = {(vyr.x - vyl.x) / dy, (vyr.y - vyl.y) / dy};
}

}  // namespace

double gl_energy(const GLField& u, const Potential& W) {
    const double h2 = u.h() * u.h();
    const double inv_eps2 = 1.0 / (u.epsilon() * u.epsilon());
    std::vector<double> rows(static_cast<std::size_t>(u.ny()), 0.0);
    for (int j = 0; j < u.ny(); ++j) {
        const double wy = (j == 0 || j == u.ny() - 1) ? 0.5 : 1.0;
        double row = 0.0;
        for (int i = 0; i < u.nx(); ++i) {
            const double wx = (i == 0 || i == u.nx() - 1) ? 0.5 : 1.0;
            Vec2 gx, gy;
            node_gradient(u, i, j, gx, gy);
            const double grad2 = gx.x * gx.x + gx.y * gx.y + gy.x * gy.x + gy.y * gy.y;
            row += wx * (0.5 * grad2 + inv_eps2 * W(u.modulus(i, j)));
        }
        rows[static_cast<std::size_t>(j)] = row * h2 * wy;
    }
    double total = 0.0;
    for (double r : rows) total += r;
    return total;
}

std::vector<double> gl_energy_density(const GLField& u, const Potential& W) {
    const double inv_eps2 = 1.0 / (u.epsilon() * u.epsilon());
    std::vector<double> density(static_cast<std::size_t>(u.nx()) * u.ny(), 0.0);
    for (int j = 0; j < u.ny(); ++j) {
        for (int i = 0; i < u.nx(); ++i) {
            Vec2 gx, gy;
            node_gradient(u, i, j, gx, gy);
            const double grad2 = gx.x * gx.x + gx.y * gx.y + gy.x * gy.x + gy.y * gy.y;
            density[static_cast<std::size_t>(j) * u.nx() + i] =
                0.5 * grad2 + inv_eps2 * W(u.modulus(i, j));
        }
    }
    return density;
}

namespace {

JacobianField cell_jacobian_of(const GLField& u,
                               const std::function<Vec2(int, int)>& value_at) {
    JacobianField jf;
    jf.nx = u.nx() - 1;
    jf.ny = u.ny() - 1;
    jf.h = u.h();
    jf.origin = u.origin();
    jf.det.assign(static_cast<std::size_t>(jf.nx) * jf.ny, 0.0);
    const double inv2h = 1.0 / (2.0 * u.h());
    for (int j = 0; j < jf.ny; ++j) {
        for (int i = 0; i < jf.nx; ++i) {
            const Vec2 sw = value_at(i, j), se = value_at(i + 1, j);
            const Vec2 nw = value_at(i, j + 1), ne = value_at(i + 1, j + 1);
            const double u1x = (se.x + ne.x - sw.x - nw.x) * inv2h;
            const double u1y = (nw.x + ne.x - sw.x - se.x) * inv2h;
            const double u2x = (se.y + ne.y - sw.y - nw.y) * inv2h;
            const double u2y = (nw.y + ne.y - sw.y - se.y) * inv2h;
            jf.det[static_cast<std::size_t>(j) * jf.nx + i] = u1x * u2y - u1y * u2x;
        }
    }
    return jf;
}

}  // namespace

double JacobianField::integral() const {
    double sum = 0.0;
    for (double d : det) sum += d;
    return sum * h * h;
}

double JacobianField::integral_over(const Ball& ball) const {
    double sum = 0.0;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (ball.contains_point(cell_center(i, j))) sum += at(i, j);
        }
    }
    return sum * h * h;
}

double JacobianField::total_variation() const {
    double sum = 0.0;
    for (double d : det) sum += std::abs(d);
    return sum * h * h;
}

JacobianField jacobian(const GLField& u) {
    return cell_jacobian_of(u, [&u](int i, int j) { return u.value(i, j); });
}

double jacobian_pairing(const GLField& u, const std::function<double(Point)>& psi) {
    // - int u1 (u2)_y psi_x - u1 (u2)_x psi_y, discrete derivatives of psi,
    // interior nodes only (psi compactly supported).
    const double h = u.h();
    const double inv2h = 1.0 / (2.0 * h);
    std::vector<double> psi_vals(static_cast<std::size_t>(u.nx()) * u.ny());
    for (int j = 0; j < u.ny(); ++j) {
        for (int i = 0; i < u.nx(); ++i) {
            psi_vals[static_cast<std::size_t>(j) * u.nx() + i] = psi(u.node(i, j));
        }
    }
    auto psi_at = [&psi_vals, &u](int i, int j) {
        return psi_vals[static_cast<std::size_t>(j) * u.nx() + i];
    };
    double sum = 0.0;
    for (int j = 1; j + 1 < u.ny(); ++j) {
        for (int i = 1; i + 1 < u.nx(); ++i) {
            const double u1 = u.value(i, j).x;
            const double u2y = (u.value(i, j + 1).y - u.value(i, j - 1).y) * inv2h;
            const double u2x = (u.value(i + 1, j).y - u.value(i - 1, j).y) * inv2h;
            const double px = (psi_at(i + 1, j) - psi_at(i - 1, j)) * inv2h;
            const double py = (psi_at(i, j + 1) - psi_at(i, j - 1)) * inv2h;
            sum += -(u1 * u2y * px - u1 * u2x * py);
        }
    }
    return sum * h * h;
}

DegreeResult degree(const GLField& u, Point center, double radius, int samples) {
    std::vector<Vec2> loop(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
        const double theta = 2.0 * kPi * k / samples;
        const Point p{center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
        const Vec2 v = u.sample(p);
        const double m = std::hypot(v.x, v.y);
        if (m < 0.1) {
            throw std::invalid_argument(
                "degree: modulus below 0.1 on the loop, winding undefined");
        }
        loop[static_cast<std::size_t>(k)] = {v.x / m, v.y / m};
    }
    double winding = 0.0;
    for (int k = 0; k < samples; ++k) {
        const Vec2 a = loop[static_cast<std::size_t>(k)];
        const Vec2 b = loop[static_cast<std::size_t>((k + 1) % samples)];
        const double mx = 0.5 * (a.x + b.x), my = 0.5 * (a.y + b.y);
        winding += mx * (b.y - a.y) - my * (b.x - a.x);
    }
    winding /= 2.0 * kPi;
    DegreeResult result;
    result.degree = static_cast<int>(std::llround(winding));
    result.residual = std::abs(winding - result.degree);
    return result;
}

JacobianField modified_jacobian(const GLField& u, double tau) {
    if (!(tau > 0.0) || !(tau < 1.0)) {
        throw std::invalid_argument("modified_jacobian: tau must lie in (0, 1)");
    }
    auto truncated = [&u, tau](int i, int j) -> Vec2 {
        const Vec2 v = u.value(i, j);
        const double m = std::hypot(v.x, v.y);
        if (m == 0.0) return {0.0, 0.0};
        const double target = std::min(m / tau, 1.0);
        return {v.x * target / m, v.y * target / m};
    };
    return cell_jacobian_of(u, truncated);
}

namespace {

// Linear convolution of a cell field with a radial kernel via FFT, zero
// padded so wrap-around never reaches the data.
JacobianField convolve_with_kernel(const JacobianField& src, double eta, const Mollifier& rho) {
    const int kr = static_cast<int>(std::ceil(eta / src.h)) + 1;
    const int px = src.nx + 2 * kr;
    const int py = src.ny + 2 * kr;
    const std::size_t real_count = static_cast<std::size_t>(px) * py;
    const std::size_t complex_count = static_cast<std::size_t>(py) * (px / 2 + 1);

    double* a = fftw_alloc_real(real_count);
    double* b = fftw_alloc_real(real_count);
    fftw_complex* fa = fftw_alloc_complex(complex_count);
    fftw_complex* fb = fftw_alloc_complex(complex_count);
    std::fill(a, a + real_count, 0.0);
    std::fill(b, b + real_count, 0.0);

    for (int j = 0; j < src.ny; ++j) {
        for (int i = 0; i < src.nx; ++i) {
            a[static_cast<std::size_t>(j + kr) * px + (i + kr)] = src.at(i, j);
        }
    }
    // Kernel centered at the origin with periodic wrapping.
    for (int j = -kr; j <= kr; ++j) {
        for (int i = -kr; i <= kr; ++i) {
            const double r = std::hypot(i * src.h, j * src.h);
            const double v = rho.profile(r / eta) / (eta * eta);
            if (v == 0.0) continue;
            const int jj = (j + py) % py;
            const int ii = (i + px) % px;
            b[static_cast<std::size_t>(jj) * px + ii] = v;
        }
    }

    fftw_plan pa = fftw_plan_dft_r2c_2d(py, px, a, fa, FFTW_ESTIMATE);
    fftw_plan pb = fftw_plan_dft_r2c_2d(py, px, b, fb, FFTW_ESTIMATE);
    fftw_execute(pa);
    fftw_execute(pb);
    const double scale = src.h * src.h / static_cast<double>(real_count);
    for (std::size_t k = 0; k < complex_count; ++k) {
        const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
        const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
        fa[k][0] = re * scale;
        fa[k][1] = im * scale;
    }
    fftw_plan pinv = fftw_plan_dft_c2r_2d(py, px, fa, a, FFTW_ESTIMATE);
    fftw_execute(pinv);

    JacobianField out;
    out.nx = px;
    out.ny = py;
    out.h = src.h;
    out.origin = {src.origin.x - kr * src.h, src.origin.y - kr * src.h};
    out.det.assign(real_count, 0.0);
    std::copy(a, a + real_count, out.det.begin());

    fftw_destroy_plan(pa);
    fftw_destroy_plan(pb);
    fftw_destroy_plan(pinv);
    fftw_free(a);
    fftw_free(b);
    fftw_free(fa);
    fftw_free(fb);
    return out;
}

}  // namespace

MollifiedJacobian::MollifiedJacobian(JacobianField conv, double eta)
    : conv_(std::move(conv)), eta_(eta) {}

double MollifiedJacobian::density(Point p) const {
    const double fx = (p.x - conv_.origin.x) / conv_.h - 0.5;
    const double fy = (p.y - conv_.origin.y) / conv_.h - 0.5;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, conv_.nx - 2);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, conv_.ny - 2);
    const double ax = std::clamp(fx - i, 0.0, 1.0);
    const double ay = std::clamp(fy - j, 0.0, 1.0);
    return (1 - ax) * (1 - ay) * conv_.at(i, j) + ax * (1 - ay) * conv_.at(i + 1, j) +
           (1 - ax) * ay * conv_.at(i, j + 1) + ax * ay * conv_.at(i + 1, j + 1);
}

double MollifiedJacobian::tv_on_region(const Rect& region) const {
    double sum = 0.0;
    for (int j = 0; j < conv_.ny; ++j) {
        for (int i = 0; i < conv_.nx; ++i) {
            if (region.contains_point(conv_.cell_center(i, j))) {
                sum += std::abs(conv_.at(i, j));
            }
        }
    }
    return sum * conv_.h * conv_.h;
}

double MollifiedJacobian::total_variation() const { return conv_.total_variation(); }

MollifiedJacobian mollified_jacobian(const GLField& u, double s, const Mollifier& rho) {
    const double eta = std::pow(u.epsilon(), s);
    if (eta < 4.0 * u.h() * (1.0 - 1e-12)) {
        throw std::invalid_argument(
            "mollified_jacobian: scale eps^s unresolved by the grid (needs eps^s >= 4h)");
    }
    return MollifiedJacobian(convolve_with_kernel(jacobian(u), eta, rho), eta);
}

SublevelCovering sublevel_covering(const GLField& u, double tau) {
    if (!(tau > 0.0) || !(tau < 1.0)) {
        throw std::invalid_argument("sublevel_covering: tau must lie in (0, 1)");
    }
    SublevelCovering cov;
    cov.tau = tau;
    const int cnx = u.nx() - 1, cny = u.ny() - 1;
    std::vector<char> marked(static_cast<std::size_t>(cnx) * cny, 0);
    auto mark_at = [&](int i, int j) -> char& {
        return marked[static_cast<std::size_t>(j) * cnx + i];
    };
    for (int j = 0; j < cny; ++j) {
        for (int i = 0; i < cnx; ++i) {
            const double m = std::min(std::min(u.modulus(i, j), u.modulus(i + 1, j)),
                                      std::min(u.modulus(i, j + 1), u.modulus(i + 1, j + 1)));
            if (m <= tau) {
                mark_at(i, j) = 1;
                cov.marked_cells.emplace_back(i, j);
            }
        }
    }
    // Interface length: marked/unmarked cell edges, domain boundary excluded.
    double interfaces = 0.0;
    for (int j = 0; j < cny; ++j) {
        for (int i = 0; i < cnx; ++i) {
            if (!mark_at(i, j)) continue;
            if (i + 1 < cnx && !mark_at(i + 1, j)) interfaces += 1.0;
            if (i > 0 && !mark_at(i - 1, j)) interfaces += 1.0;
            if (j + 1 < cny && !mark_at(i, j + 1)) interfaces += 1.0;
            if (j > 0 && !mark_at(i, j - 1)) interfaces += 1.0;
        }
    }
    cov.perimeter_estimate = interfaces * u.h();

    if (cov.marked_cells.empty()) {
        cov.balls = {Ball{u.domain().center(), u.epsilon()}};
        return cov;
    }
    if (cov.marked_cells.size() == static_cast<std::size_t>(cnx) * cny) {
        cov.balls = {Ball{u.domain().center(), u.domain().diameter() / 2.0 + u.epsilon()}};
        return cov;
    }
    // Connected components (4-neighbor), smallest enclosing ball of corners.
    std::vector<char> seen(marked.size(), 0);
    std::vector<Ball> balls;
    for (const auto& [si, sj] : cov.marked_cells) {
        if (seen[static_cast<std::size_t>(sj) * cnx + si]) continue;
        std::vector<Point> corners;
        std::queue<std::pair<int, int>> frontier;
        frontier.emplace(si, sj);
        seen[static_cast<std::size_t>(sj) * cnx + si] = 1;
        while (!frontier.empty()) {
            const auto [ci, cj] = frontier.front();
            frontier.pop();
            for (int dj = 0; dj <= 1; ++dj) {
                for (int di = 0; di <= 1; ++di) {
                    corners.push_back(u.node(ci + di, cj + dj));
                }
            }
            const int di[4] = {1, -1, 0, 0};
            const int dj[4] = {0, 0, 1, -1};
            for (int d = 0; d < 4; ++d) {
                const int ni = ci + di[d], nj = cj + dj[d];
                if (ni < 0 || nj < 0 || ni >= cnx || nj >= cny) continue;
                if (!mark_at(ni, nj) || seen[static_cast<std::size_t>(nj) * cnx + ni]) continue;
                seen[static_cast<std::size_t>(nj) * cnx + ni] = 1;
                frontier.emplace(ni, nj);
            }
        }
        balls.push_back(smallest_enclosing_ball(std::move(corners)));
    }
    balls = cascade_to_disjoint(std::move(balls));
    // Enlarge the largest ball by eps, then restore disjointness.
    std::size_t largest = 0;
    for (std::size_t i = 1; i < balls.size(); ++i) {
        if (balls[i].radius > balls[largest].radius) largest = i;
    }
    balls[largest].radius += u.epsilon();
    cov.balls = cascade_to_disjoint(std::move(balls));
    return cov;
}

GLField synthetic_field(const RecoveryPlan& plan, double epsilon, const Rect& domain, double h) {
    const VortexConfig cfg = build_recovery(plan, epsilon, domain);
    const int nx = static_cast<int>(std::llround(domain.width / h)) + 1;
    const int ny = static_cast<int>(std::llround(domain.height / h)) + 1;
    GLField field(nx, ny, h, Point{domain.x0, domain.y0}, epsilon);
    const auto& atoms = cfg.mu.atoms();
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Point p = field.node(i, j);
            double modulus = 1.0;
            std::complex<double> phase(1.0, 0.0);
            for (const auto& atom : atoms) {
                const double dx = p.x - atom.position.x;
                const double dy = p.y - atom.position.y;
                const double r = std::hypot(dx, dy);
                modulus *= std::min(r / epsilon, 1.0);
                if (r > 0.0) {
                    std::complex<double> unit(dx / r, dy / r);
                    phase *= (atom.weight > 0.0) ? unit : std::conj(unit);
                }
            }
            field.set_value(i, j, Vec2{modulus * phase.real(), modulus * phase.imag()});
        }
    }
    return field;
}

std::vector<TestFunction> random_test_functions(const Rect& domain, int count,
                                                unsigned long long seed) {
    static const Mollifier bump;
    // max |profile'| over [0, 1], for Lipschitz bounds of bump sums.
    static const double max_slope = [] {
        double m = 0.0;
        for (int k = 1; k < 4096; ++k) {
            m = std::max(m, std::abs(bump.profile_derivative(k / 4096.0)));
        }
        return m;
    }();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<TestFunction> dict;
    dict.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        const int bumps = 1 + static_cast<int>(unit(rng) * 3.0);
        struct BumpSpec {
            Point center;
            double sigma;
            double amp;
        };
        std::vector<BumpSpec> specs;
        double sup_bound = 0.0, lip_bound = 0.0;
        for (int b = 0; b < bumps; ++b) {
            BumpSpec spec;
            const double margin = 0.05 * std::min(domain.width, domain.height);
            spec.sigma = margin + unit(rng) * 0.4 * std::min(domain.width, domain.height);
            spec.center = {domain.x0 + spec.sigma + unit(rng) * (domain.width - 2 * spec.sigma),
                           domain.y0 + spec.sigma + unit(rng) * (domain.height - 2 * spec.sigma)};
            spec.amp = 2.0 * unit(rng) - 1.0;
            sup_bound += std::abs(spec.amp) * bump.profile(0.0);
            lip_bound += std::abs(spec.amp) * max_slope / spec.sigma;
            specs.push_back(spec);
        }
        const double scale = 1.0 / (1.0000001 * (sup_bound + lip_bound));
        dict.push_back(TestFunction{[specs, scale](Point p) {
            double v = 0.0;
            for (const auto& s : specs) {
                v += s.amp * bump.profile(distance(p, s.center) / s.sigma);
            }
            return v * scale;
        }});
    }
    return dict;
}

std::vector<TruncationGapReport> jacobian_truncation_gap(const GLField& u,
                                                         const std::vector<double>& taus,
                                                         double calibration_constant) {
    const Rect domain = u.domain();
    const double budget = calibration_constant * u.epsilon() * std::abs(std::log(u.epsilon()));
    // The bound lives in the logarithmic energy regime; out-of-regime fields
    // still get a report, flagged.
    const double log_eps = std::abs(std::log(u.epsilon()));
    const bool energy_ok = gl_energy(u, Potential::standard()) <= 20.0 * kPi * log_eps;
    if (!energy_ok) {
        std::fprintf(stderr,
                     "jacobian_truncation_gap: GL energy exceeds the logarithmic regime, "
                     "the budget comparison may be meaningless\n");
    }
    const JacobianField base = jacobian(u);
    const auto dict = random_test_functions(domain, 50, 0x5eedULL);

    // Support of Ju - J_tau u: cells with a corner strictly below modulus 1.
    const SublevelCovering cov = sublevel_covering(u, 1.0 - 1e-9);
    double rad = 0.0;
    for (const auto& b : cov.balls) rad += b.radius;

    std::vector<TruncationGapReport> reports;
    for (double tau : taus) {
        const JacobianField trunc = modified_jacobian(u, tau);
        JacobianField diff = base;
        double max_abs = 0.0;
        for (std::size_t k = 0; k < diff.det.size(); ++k) {
            diff.det[k] -= trunc.det[k];
            max_abs = std::max(max_abs, std::abs(diff.det[k]));
        }
        // The difference is supported where the modulus dips below one; the
        // rest is rounding dust, dropped below a relative threshold.
        const double threshold = 1e-12 * max_abs;
        struct SupportCell {
            int i, j;
            double value;
        };
        std::vector<SupportCell> support;
        for (int j = 0; j < diff.ny; ++j) {
            for (int i = 0; i < diff.nx; ++i) {
                const double d = diff.at(i, j);
                if (std::abs(d) > threshold) support.push_back({i, j, d});
            }
        }

        TruncationGapReport report;
        report.tau = tau;
        const double cell_area = diff.h * diff.h;
        for (const auto& test : dict) {
            double pairing = 0.0;
            for (const auto& cell : support) {
                pairing += cell.value * test.f(diff.cell_center(cell.i, cell.j));
            }
            report.lower = std::max(report.lower, std::abs(pairing * cell_area));
        }

        std::vector<WeightedAtom> net_atoms;
        double localized_tv = 0.0;
        for (const auto& ball : cov.balls) {
            double net = 0.0;
            for (const auto& cell : support) {
                if (ball.contains_point(diff.cell_center(cell.i, cell.j))) {
                    net += cell.value;
                    localized_tv += std::abs(cell.value);
                }
            }
            net_atoms.push_back(WeightedAtom{ball.center, net * cell_area});
        }
        localized_tv *= cell_area;
        const AtomicMeasure projected{std::move(net_atoms)};
        const double lp_part = projected.empty() ? 0.0 : flat_norm(projected, domain);
        report.upper = lp_part + 2.0 * rad * localized_tv;
        report.budget = budget;
        report.within_budget = report.upper <= budget;
        report.energy_bound_ok = energy_ok;
        reports.push_back(report);
    }
    return reports;
}

}  // namespace vortexscale
