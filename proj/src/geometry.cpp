/**
 * @file geometry.cpp
 * @brief Contour tracing/conditioning and polynomial curve machinery.
 */
#include "unwrap/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "unwrap/errors.hpp"

namespace unwrap::geom {

namespace {

constexpr size_t kMinForegroundPixels = 64;
constexpr double kConditionLimit = 1e10;

struct PixCoord {
    int x, y;
    bool operator==(const PixCoord& o) const { return x == o.x && y == o.y; }
};

struct PixHash {
    size_t operator()(const PixCoord& p) const {
        return std::hash<long long>()((static_cast<long long>(p.x) << 32) ^
                                      static_cast<unsigned>(p.y));
    }
};

bool adjacent8(const PixCoord& a, const PixCoord& b) {
    return std::abs(a.x - b.x) <= 1 && std::abs(a.y - b.y) <= 1 && !(a == b);
}

std::vector<PixCoord> round_chain(const std::vector<Vec2>& raw) {
    std::vector<PixCoord> pts;
    pts.reserve(raw.size());
    for (const Vec2& p : raw)
        pts.push_back({static_cast<int>(std::lround(p.x)),
                       static_cast<int>(std::lround(p.y))});
    if (pts.size() > 1 && pts.front() == pts.back()) pts.pop_back();
    return pts;
}

Contour chain_to_contour(const std::vector<PixCoord>& pts) {
    Contour c;
    c.closed = true;
    c.points.reserve(pts.size());
    c.cumulative_length.reserve(pts.size());
    double acc = 0.0;
    for (size_t i = 0; i < pts.size(); ++i) {
        Vec2 p{static_cast<double>(pts[i].x), static_cast<double>(pts[i].y)};
        if (i > 0) acc += (p - c.points.back()).norm();
        c.points.push_back(p);
        c.cumulative_length.push_back(acc);
    }
    return c;
}

// Drops consecutive duplicates (cyclic). Returns true when changed.
bool pass_dedupe(std::vector<PixCoord>& pts) {
    bool changed = false;
    for (size_t i = 0; i < pts.size() && pts.size() > 1;) {
        size_t j = (i + 1) % pts.size();
        if (pts[i] == pts[j]) {
            pts.erase(pts.begin() + j);
            changed = true;
        } else {
            ++i;
        }
    }
    return changed;
}

// Removes out-and-back excursions: ... a, b, a ... -> ... a ...
bool pass_spurs(std::vector<PixCoord>& pts) {
    bool changed = false;
    bool again = true;
    while (again && pts.size() >= 3) {
        again = false;
        size_t n = pts.size();
        for (size_t i = 0; i < n; ++i) {
            const PixCoord& prev = pts[(i + n - 1) % n];
            const PixCoord& next = pts[(i + 1) % n];
            if (prev == next) {
                // drop the spur tip and one copy of the repeated pixel
                size_t tip = i, dup = (i + 1) % n;
                if (dup < tip) std::swap(tip, dup);
                pts.erase(pts.begin() + dup);
                pts.erase(pts.begin() + tip);
                changed = again = true;
                break;
            }
        }
    }
    return changed;
}

// Resolves repeated pixels at larger chain separation by dropping the
// shorter excursion. Throws when both loops are substantial.
bool pass_duplicates(std::vector<PixCoord>& pts) {
    std::unordered_map<PixCoord, size_t, PixHash> seen;
    size_t n = pts.size();
    for (size_t i = 0; i < n; ++i) {
        auto it = seen.find(pts[i]);
        if (it == seen.end()) {
            seen.emplace(pts[i], i);
            continue;
        }
        size_t first = it->second;
        size_t inner = i - first;      // points strictly between, plus one copy
        size_t outer = n - inner;
        if (std::min(inner, outer) > 8)
            throw UnrepairableError(
                "condition_contour: chain self-intersects (loop too large to drop)");
        if (inner <= outer) {
            pts.erase(pts.begin() + first, pts.begin() + i);
        } else {
            pts.erase(pts.begin() + i, pts.end());
            pts.erase(pts.begin(), pts.begin() + first);
        }
        return true;
    }
    return false;
}

bool is_unit4_step(const PixCoord& a, const PixCoord& b) {
    return std::abs(b.x - a.x) + std::abs(b.y - a.y) == 1;
}

// Compact right-angle rule. A corner pixel q in a perpendicular-step triple
// (p, q, r) is deleted when the fourth pixel of their 2x2 block is "open":
// background when a mask is supplied, otherwise a chain member (the chain
// pinches around the block). Ties are broken by first occurrence.
bool pass_corners(std::vector<PixCoord>& pts, const BinaryMask* mask) {
    size_t n = pts.size();
    if (n < 4) return false;
    std::unordered_set<PixCoord, PixHash> members;
    if (!mask) members.insert(pts.begin(), pts.end());
    for (size_t i = 0; i < n; ++i) {
        const PixCoord& p = pts[(i + n - 1) % n];
        const PixCoord& q = pts[i];
        const PixCoord& r = pts[(i + 1) % n];
        if (!is_unit4_step(p, q) || !is_unit4_step(q, r)) continue;
        int d1x = q.x - p.x, d1y = q.y - p.y;
        int d2x = r.x - q.x, d2y = r.y - q.y;
        if (d1x * d2x + d1y * d2y != 0) continue;  // not perpendicular
        PixCoord fourth{p.x + d2x, p.y + d2y};
        bool open = mask ? !mask->at(fourth.x, fourth.y)
                         : members.count(fourth) > 0;
        if (open) {
            pts.erase(pts.begin() + i);
            return true;
        }
    }
    return false;
}

std::vector<PixCoord> greedy_reorder(std::vector<PixCoord> pts) {
    std::vector<PixCoord> out;
    out.reserve(pts.size());
    out.push_back(pts.front());
    pts.erase(pts.begin());
    while (!pts.empty()) {
        const PixCoord& cur = out.back();
        size_t best = 0;
        long best_d = std::numeric_limits<long>::max();
        for (size_t i = 0; i < pts.size(); ++i) {
            long dx = pts[i].x - cur.x, dy = pts[i].y - cur.y;
            long d = dx * dx + dy * dy;
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        out.push_back(pts[best]);
        pts.erase(pts.begin() + best);
    }
    return out;
}

Contour condition_pixels(std::vector<PixCoord> pts, const BinaryMask* mask) {
    if (pts.size() < 4)
        throw UnrepairableError("condition_contour: chain too short");

    for (int pass = 0; pass < 256; ++pass) {
        bool changed = false;
        changed |= pass_dedupe(pts);
        changed |= pass_spurs(pts);
        changed |= pass_duplicates(pts);
        changed |= pass_corners(pts, mask);
        if (!changed) break;
        if (pts.size() < 4)
            throw UnrepairableError("condition_contour: chain collapsed");
    }

    // two-neighbor rule: consecutive points must be 8-adjacent
    size_t n = pts.size();
    bool ordered = true;
    for (size_t i = 0; i < n; ++i)
        if (!adjacent8(pts[i], pts[(i + 1) % n])) ordered = false;
    if (!ordered) {
        pts = greedy_reorder(std::move(pts));
        for (size_t i = 0; i < pts.size(); ++i)
            if (!adjacent8(pts[i], pts[(i + 1) % pts.size()]))
                throw UnrepairableError(
                    "condition_contour: chain cannot be re-ordered into an "
                    "8-connected cycle");
    }

    Contour c = chain_to_contour(pts);
    if (signed_area(c.points) < 0.0) {
        std::reverse(c.points.begin(), c.points.end());
        c = chain_to_contour([&] {
            std::vector<PixCoord> rp;
            rp.reserve(c.points.size());
            for (const Vec2& p : c.points)
                rp.push_back({static_cast<int>(p.x), static_cast<int>(p.y)});
            return rp;
        }());
    }
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Mask utilities
// ---------------------------------------------------------------------------

namespace {

std::vector<int> label_components(const BinaryMask& mask,
                                  std::vector<size_t>& sizes) {
    int w = mask.width(), h = mask.height();
    std::vector<int> label(static_cast<size_t>(w) * h, -1);
    sizes.clear();
    std::deque<PixCoord> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.at(x, y) || label[static_cast<size_t>(y) * w + x] >= 0)
                continue;
            int id = static_cast<int>(sizes.size());
            sizes.push_back(0);
            queue.push_back({x, y});
            label[static_cast<size_t>(y) * w + x] = id;
            while (!queue.empty()) {
                PixCoord p = queue.front();
                queue.pop_front();
                ++sizes[id];
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = p.x + dx, ny = p.y + dy;
                        if (!mask.at(nx, ny)) continue;
                        size_t idx = static_cast<size_t>(ny) * w + nx;
                        if (label[idx] < 0) {
                            label[idx] = id;
                            queue.push_back({nx, ny});
                        }
                    }
            }
        }
    }
    return label;
}

}  // namespace

std::vector<size_t> component_sizes(const BinaryMask& mask) {
    std::vector<size_t> sizes;
    label_components(mask, sizes);
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

BinaryMask largest_component(const BinaryMask& mask) {
    std::vector<size_t> sizes;
    std::vector<int> label = label_components(mask, sizes);
    if (sizes.empty()) return mask;
    int best = static_cast<int>(
        std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (label[static_cast<size_t>(y) * mask.width() + x] == best)
                out.set(x, y, true);
    return out;
}

BinaryMask fill_small_holes(const BinaryMask& mask, size_t max_hole) {
    int w = mask.width(), h = mask.height();
    BinaryMask inv(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) inv.set(x, y, !mask.at(x, y));
    std::vector<size_t> sizes;
    std::vector<int> label = label_components(inv, sizes);

    // background components touching the border stay background
    std::vector<bool> touches(sizes.size(), false);
    for (int x = 0; x < w; ++x) {
        if (label[x] >= 0) touches[label[x]] = true;
        if (label[static_cast<size_t>(h - 1) * w + x] >= 0)
            touches[label[static_cast<size_t>(h - 1) * w + x]] = true;
    }
    for (int y = 0; y < h; ++y) {
        if (label[static_cast<size_t>(y) * w] >= 0)
            touches[label[static_cast<size_t>(y) * w]] = true;
        if (label[static_cast<size_t>(y) * w + w - 1] >= 0)
            touches[label[static_cast<size_t>(y) * w + w - 1]] = true;
    }
    BinaryMask out = mask;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int id = label[static_cast<size_t>(y) * w + x];
            if (id >= 0 && !touches[id] && sizes[id] <= max_hole)
                out.set(x, y, true);
        }
    return out;
}

BinaryMask pad_to_margin(const BinaryMask& mask, int margin) {
    int w = mask.width(), h = mask.height();
    int min_x = w, min_y = h, max_x = -1, max_y = -1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y)) {
                min_x = std::min(min_x, x);
                min_y = std::min(min_y, y);
                max_x = std::max(max_x, x);
                max_y = std::max(max_y, y);
            }
    if (max_x < 0) return mask;
    if (min_x >= margin && min_y >= margin && max_x < w - margin &&
        max_y < h - margin)
        return mask;
    int shift_x = std::max(0, margin - min_x);
    int shift_y = std::max(0, margin - min_y);
    BinaryMask out(std::max(w, max_x + 1 + shift_x + margin),
                   std::max(h, max_y + 1 + shift_y + margin));
    for (int y = min_y; y <= max_y; ++y)
        for (int x = min_x; x <= max_x; ++x)
            if (mask.at(x, y)) out.set(x + shift_x, y + shift_y, true);
    return out;
}

// ---------------------------------------------------------------------------
// Contour operations
// ---------------------------------------------------------------------------

double signed_area(const std::vector<Vec2>& points) {
    double a = 0.0;
    size_t n = points.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = points[i];
        const Vec2& q = points[(i + 1) % n];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

Contour extract_contour(const BinaryMask& mask) {
    std::vector<size_t> sizes = component_sizes(mask);
    size_t significant = 0;
    for (size_t s : sizes)
        if (s >= kMinForegroundPixels) ++significant;
    if (significant == 0)
        throw EmptyMaskError(
            "extract_contour: no foreground component with >= 64 pixels");
    if (significant > 1)
        throw MultipleComponentsError(
            "extract_contour: more than one foreground component after cleanup");

    BinaryMask body = largest_component(mask);

    // start pixel: topmost, then leftmost
    PixCoord start{-1, -1};
    for (int y = 0; y < body.height() && start.x < 0; ++y)
        for (int x = 0; x < body.width(); ++x)
            if (body.at(x, y)) {
                start = {x, y};
                break;
            }

    // Moore neighborhood, clockwise from west
    static const int offs[8][2] = {{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                   {1, 0},  {1, 1},   {0, 1},  {-1, 1}};
    auto offset_index = [](int dx, int dy) {
        for (int k = 0; k < 8; ++k)
            if (offs[k][0] == dx && offs[k][1] == dy) return k;
        return -1;
    };

    std::vector<PixCoord> chain{start};
    std::unordered_map<long long, size_t> visited_states;
    auto state_key = [&](const PixCoord& p, int b) {
        return ((static_cast<long long>(p.x) * body.height() + p.y) << 3) | b;
    };
    PixCoord cur = start;
    int back = 0;  // backtrack points west initially
    visited_states[state_key(cur, back)] = 0;

    size_t cap = 8 * body.count() + 64;
    for (size_t iter = 0; iter < cap; ++iter) {
        bool found = false;
        for (int k = 1; k <= 8; ++k) {
            int idx = (back + k) % 8;
            PixCoord p{cur.x + offs[idx][0], cur.y + offs[idx][1]};
            if (!body.at(p.x, p.y)) continue;
            int prev_idx = (back + k - 1) % 8;
            PixCoord prev_bg{cur.x + offs[prev_idx][0], cur.y + offs[prev_idx][1]};
            cur = p;
            back = offset_index(prev_bg.x - cur.x, prev_bg.y - cur.y);
            found = true;
            break;
        }
        if (!found) break;  // isolated pixel, chain stays a single point
        long long key = state_key(cur, back);
        auto it = visited_states.find(key);
        if (it != visited_states.end()) {
            chain.erase(chain.begin(), chain.begin() + it->second);
            break;
        }
        visited_states[key] = chain.size();
        chain.push_back(cur);
    }

    if (chain.size() < 4)
        throw EmptyMaskError("extract_contour: boundary chain degenerate");
    return condition_pixels(std::move(chain), &body);
}

Contour condition_contour(const std::vector<Vec2>& raw) {
    return condition_pixels(round_chain(raw), nullptr);
}

bool audit_two_neighbor_rule(const Contour& contour) {
    size_t n = contour.points.size();
    if (n < 4) return false;
    std::unordered_set<PixCoord, PixHash> seen;
    for (size_t i = 0; i < n; ++i) {
        PixCoord p{static_cast<int>(std::lround(contour.points[i].x)),
                   static_cast<int>(std::lround(contour.points[i].y))};
        if (!seen.insert(p).second) return false;
        PixCoord q{static_cast<int>(std::lround(contour.points[(i + 1) % n].x)),
                   static_cast<int>(std::lround(contour.points[(i + 1) % n].y))};
        if (!adjacent8(p, q)) return false;
    }
    for (size_t i = 1; i < n; ++i)
        if (contour.cumulative_length[i] <= contour.cumulative_length[i - 1])
            return false;
    return true;
}

// ---------------------------------------------------------------------------
// Curve fitting
// ---------------------------------------------------------------------------

Vec2 PolyCurve2D::eval(double s) const {
    double L = length();
    double u = L > 0.0 ? (s - s_begin) / L : 0.0;
    double vx = 0.0, vy = 0.0;
    for (int k = degree; k >= 0; --k) {
        vx = vx * u + coeffs_x[k];
        vy = vy * u + coeffs_y[k];
    }
    return {vx, vy};
}

Vec2 PolyCurve2D::derivative(double s) const {
    double L = length();
    double u = L > 0.0 ? (s - s_begin) / L : 0.0;
    double vx = 0.0, vy = 0.0;
    for (int k = degree; k >= 1; --k) {
        vx = vx * u + k * coeffs_x[k];
        vy = vy * u + k * coeffs_y[k];
    }
    double inv = L > 0.0 ? 1.0 / L : 0.0;
    return {vx * inv, vy * inv};
}

Vec2 PolyCurve2D::second_derivative(double s) const {
    double L = length();
    double u = L > 0.0 ? (s - s_begin) / L : 0.0;
    double vx = 0.0, vy = 0.0;
    for (int k = degree; k >= 2; --k) {
        vx = vx * u + k * (k - 1) * coeffs_x[k];
        vy = vy * u + k * (k - 1) * coeffs_y[k];
    }
    double inv = L > 0.0 ? 1.0 / (L * L) : 0.0;
    return {vx * inv, vy * inv};
}

PolyCurve2D fit_polycurve(std::span<const Vec2> points,
                          std::span<const double> arc_lengths, int degree,
                          FitInfo* info) {
    if (degree < 1) throw Error("fit_polycurve: degree must be >= 1");
    size_t m = points.size();
    if (m != arc_lengths.size() || m < static_cast<size_t>(degree) + 1)
        throw Error("fit_polycurve: need at least degree+1 points");
    for (size_t i = 1; i < m; ++i)
        if (!(arc_lengths[i] > arc_lengths[i - 1]))
            throw Error("fit_polycurve: arc lengths must be strictly increasing");

    double s0 = arc_lengths.front();
    double L = arc_lengths.back() - s0;

    Eigen::MatrixXd A(m, degree + 1);
    Eigen::VectorXd bx(m), by(m);
    for (size_t i = 0; i < m; ++i) {
        double u = (arc_lengths[i] - s0) / L;
        double pw = 1.0;
        for (int k = 0; k <= degree; ++k) {
            A(i, k) = pw;
            pw *= u;
        }
        bx(i) = points[i].x;
        by(i) = points[i].y;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(degree);
    double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!std::isfinite(cond) || cond > kConditionLimit)
        throw IllConditionedError(
            "fit_polycurve: design matrix condition number above limit; lower "
            "the degree or rescale the parameter");

    Eigen::VectorXd cx = svd.solve(bx);
    Eigen::VectorXd cy = svd.solve(by);

    PolyCurve2D curve;
    curve.degree = degree;
    curve.s_begin = s0;
    curve.s_end = arc_lengths.back();
    curve.coeffs_x.assign(cx.data(), cx.data() + degree + 1);
    curve.coeffs_y.assign(cy.data(), cy.data() + degree + 1);

    if (info) {
        double sum = 0.0, worst = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double e = (points[i] - curve.eval(arc_lengths[i])).squared_norm();
            sum += e;
            worst = std::max(worst, e);
        }
        info->rms = std::sqrt(sum / m);
        info->max_error = std::sqrt(worst);
        info->condition = cond;
    }
    return curve;
}

DegreeChoice choose_degree(std::span<const Vec2> points,
                           std::span<const double> arc_lengths,
                           double rms_limit) {
    DegreeChoice out;
    for (int n = 3; n <= 12; ++n) {
        if (points.size() < static_cast<size_t>(n) + 1) break;
        FitInfo info;
        PolyCurve2D curve;
        try {
            curve = fit_polycurve(points, arc_lengths, n, &info);
        } catch (const IllConditionedError&) {
            break;  // keep the last fit that solved
        }
        out.degree = n;
        out.curve = std::move(curve);
        out.info = info;
        if (info.rms <= rms_limit) {
            out.capped = false;
            return out;
        }
    }
    out.capped = true;
    return out;
}

FrameSample frame_at(const PolyCurve2D& curve, double s) {
    Vec2 d1 = curve.derivative(s);
    double speed = d1.norm();
    if (speed < 1e-9)
        throw SingularSpeedError("frame_at: vanishing speed, reparameterize");
    Vec2 d2 = curve.second_derivative(s);
    FrameSample f;
    f.s = s;
    f.position = curve.eval(s);
    f.tangent = d1 / speed;
    f.normal = f.tangent.rot90();
    f.curvature = d1.cross(d2) / (speed * speed * speed);
    return f;
}

std::vector<double> contour_curvature(const Contour& contour, double half_window,
                                      int degree) {
    size_t n = contour.points.size();
    std::vector<double> kappa(n, 0.0);
    if (n < 7) return kappa;
    double total = contour.total_length();

    for (size_t i = 0; i < n; ++i) {
        std::vector<Vec2> pts;
        std::vector<double> svals;
        // walk left
        std::vector<std::pair<double, Vec2>> left;
        double acc = 0.0;
        size_t j = i;
        while (acc < half_window && left.size() + 1 < n / 2) {
            size_t k = (j + n - 1) % n;
            acc += (contour.points[j] - contour.points[k]).norm();
            left.push_back({-acc, contour.points[k]});
            j = k;
        }
        for (auto it = left.rbegin(); it != left.rend(); ++it) {
            svals.push_back(it->first);
            pts.push_back(it->second);
        }
        svals.push_back(0.0);
        pts.push_back(contour.points[i]);
        acc = 0.0;
        j = i;
        while (acc < half_window && pts.size() < n) {
            size_t k = (j + 1) % n;
            acc += (contour.points[k] - contour.points[j]).norm();
            svals.push_back(acc);
            pts.push_back(contour.points[k]);
            j = k;
        }
        (void)total;
        int deg = std::min<int>(degree, static_cast<int>(pts.size()) - 1);
        if (deg < 2) continue;
        try {
            PolyCurve2D local = fit_polycurve(pts, svals, deg);
            kappa[i] = frame_at(local, 0.0).curvature;
        } catch (const Error&) {
            kappa[i] = 0.0;
        }
    }
    return kappa;
}

// ---------------------------------------------------------------------------
// Polyline helpers
// ---------------------------------------------------------------------------

SampledCurve resample_polyline(const std::vector<Vec2>& points, double spacing,
                               bool closed) {
    SampledCurve out;
    size_t n = points.size();
    if (n == 0) return out;
    if (n == 1) {
        out.points = points;
        out.arc = {0.0};
        return out;
    }
    size_t segs = closed ? n : n - 1;
    double total = 0.0;
    std::vector<double> seg_len(segs);
    for (size_t i = 0; i < segs; ++i) {
        seg_len[i] = (points[(i + 1) % n] - points[i]).norm();
        total += seg_len[i];
    }
    size_t count = std::max<size_t>(2, static_cast<size_t>(total / spacing) + 1);
    double step = total / (closed ? count : count - 1);

    out.points.reserve(count);
    out.arc.reserve(count);
    size_t seg = 0;
    double seg_start = 0.0;
    for (size_t k = 0; k < count; ++k) {
        double target = std::min(k * step, total);
        while (seg + 1 < segs && seg_start + seg_len[seg] < target) {
            seg_start += seg_len[seg];
            ++seg;
        }
        double t = seg_len[seg] > 0.0 ? (target - seg_start) / seg_len[seg] : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        Vec2 p = points[seg] + (points[(seg + 1) % n] - points[seg]) * t;
        out.points.push_back(p);
        out.arc.push_back(target);
    }
    return out;
}

std::vector<Vec2> smooth_chain(const std::vector<Vec2>& points, int window) {
    if (window <= 1 || points.size() < 3) return points;
    int h = window / 2;
    int n = static_cast<int>(points.size());
    std::vector<Vec2> out(points.size());
    for (int i = 0; i < n; ++i) {
        int lo = std::max(0, i - h), hi = std::min(n - 1, i + h);
        int m = std::min(i - lo, hi - i);  // symmetric shrink at the ends
        Vec2 acc{0, 0};
        for (int j = i - m; j <= i + m; ++j) acc += points[j];
        out[i] = acc / static_cast<double>(2 * m + 1);
    }
    return out;
}

}  // namespace unwrap::geom
