/**
 * @file morph.cpp
 * @brief Field construction, flat-disk morphology and deformation inversion.
 */
#include "unwrap/morph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <cstdlib>

#include "unwrap/errors.hpp"

namespace unwrap::morph {

namespace {

constexpr double kGradientFloor = 1e-6;
const double kNan = std::numeric_limits<double>::quiet_NaN();
const double kInf = std::numeric_limits<double>::infinity();

template <typename Fn>
void for_each_interior(const BinaryMask& mask, Fn&& fn) {
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) fn(x, y);
}

/// Bilinear sample with nearest-defined fallback at field borders.
double sample_field(const ScalarField& f, double x, double y) {
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    double tx = x - x0, ty = y - y0;
    double best = kNan;
    double acc = 0.0, wsum = 0.0;
    for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) {
            if (!f.defined(x0 + dx, y0 + dy)) continue;
            double w = (dx ? tx : 1.0 - tx) * (dy ? ty : 1.0 - ty);
            acc += w * f.at(x0 + dx, y0 + dy);
            wsum += w;
            best = f.at(x0 + dx, y0 + dy);
        }
    if (wsum > 1e-9) return acc / wsum;
    return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Initial fields
// ---------------------------------------------------------------------------

CurveSamples sample_contour(const Contour& contour, double spacing,
                            bool with_curvature) {
    geom::SampledCurve sc =
        geom::resample_polyline(contour.points, spacing, contour.closed);
    CurveSamples out;
    out.points = std::move(sc.points);
    out.arc = std::move(sc.arc);
    if (with_curvature) {
        std::vector<double> kappa = geom::contour_curvature(contour);
        out.curvature.resize(out.points.size());
        // map each sample back to the nearest original contour point
        size_t n = contour.points.size();
        for (size_t i = 0; i < out.points.size(); ++i) {
            double target = out.arc[i];
            size_t j = std::lower_bound(contour.cumulative_length.begin(),
                                        contour.cumulative_length.end(), target) -
                       contour.cumulative_length.begin();
            if (j >= n) j = n - 1;
            if (j > 0 && target - contour.cumulative_length[j - 1] <
                             contour.cumulative_length[j] - target)
                --j;
            out.curvature[i] = kappa[j];
        }
    }
    return out;
}

namespace {

/// Uniform-grid nearest-sample index for exact minimum-distance queries.
class SampleGrid {
public:
    SampleGrid(const std::vector<Vec2>& pts, double cell) : cell_(cell) {
        min_x_ = min_y_ = 1e30;
        for (const Vec2& p : pts) {
            min_x_ = std::min(min_x_, p.x);
            min_y_ = std::min(min_y_, p.y);
        }
        nx_ = ny_ = 1;
        for (const Vec2& p : pts) {
            nx_ = std::max(nx_, cell_index_x(p.x) + 1);
            ny_ = std::max(ny_, cell_index_y(p.y) + 1);
        }
        buckets_.resize(static_cast<size_t>(nx_) * ny_);
        for (size_t i = 0; i < pts.size(); ++i)
            buckets_[bucket_of(pts[i])].push_back(static_cast<int>(i));
        points_ = &pts;
    }

    /// Index of the sample minimizing (distance^2, index) lexicographically.
    int nearest(const Vec2& q) const {
        int cx = cell_index_x(q.x), cy = cell_index_y(q.y);
        double best_d = kInf;
        int best_i = -1;
        for (int ring = 0;; ++ring) {
            double bound = (ring - 1) * cell_;
            if (ring > 0 && bound * bound > best_d && best_i >= 0) break;
            bool any_cell = false;
            for (int dy = -ring; dy <= ring; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
                    int bx = cx + dx, by = cy + dy;
                    if (bx < 0 || by < 0 || bx >= nx_ || by >= ny_) continue;
                    any_cell = true;
                    for (int i : buckets_[static_cast<size_t>(by) * nx_ + bx]) {
                        double d = ((*points_)[i] - q).squared_norm();
                        if (d < best_d || (d == best_d && i < best_i)) {
                            best_d = d;
                            best_i = i;
                        }
                    }
                }
            if (!any_cell && ring > nx_ + ny_) break;
        }
        return best_i;
    }

private:
    int cell_index_x(double x) const {
        return static_cast<int>(std::floor((x - min_x_) / cell_));
    }
    int cell_index_y(double y) const {
        return static_cast<int>(std::floor((y - min_y_) / cell_));
    }
    size_t bucket_of(const Vec2& p) const {
        return static_cast<size_t>(cell_index_y(p.y)) * nx_ + cell_index_x(p.x);
    }

    double cell_;
    double min_x_, min_y_;
    int nx_, ny_;
    std::vector<std::vector<int>> buckets_;
    const std::vector<Vec2>* points_ = nullptr;
};

}  // namespace

InitialFields initial_fields(const CurveSamples& curve, const BinaryMask& mask) {
    InitialFields out{ScalarField(mask.width(), mask.height(), FieldUnits::Pixels),
                      ScalarField(mask.width(), mask.height(), FieldUnits::Pixels)};
    if (curve.points.empty()) return out;
    SampleGrid grid(curve.points, 4.0);
    for_each_interior(mask, [&](int x, int y) {
        Vec2 q{static_cast<double>(x), static_cast<double>(y)};
        int i = grid.nearest(q);
        out.delta0.set(x, y, (curve.points[i] - q).norm());
        out.s0.set(x, y, curve.arc[i]);
    });
    return out;
}

ScalarField distance_field(const CurveSamples& curve, const BinaryMask& mask) {
    return initial_fields(curve, mask).delta0;
}

ScalarField footpoint_field(const CurveSamples& curve, const BinaryMask& mask) {
    return initial_fields(curve, mask).s0;
}

// ---------------------------------------------------------------------------
// Flat-disk morphology
// ---------------------------------------------------------------------------

namespace {

/// Sliding-window extreme over rows, window [x-w, x+w]. `take_max` selects
/// dilation vs erosion; undefined cells act as the identity element.
void row_extreme(const std::vector<double>& src, int width, int height, int w,
                 bool take_max, std::vector<double>& dst) {
    dst.assign(src.size(), take_max ? -kInf : kInf);
    std::deque<int> dq;
    auto better = [&](double a, double b) { return take_max ? a >= b : a <= b; };
    for (int y = 0; y < height; ++y) {
        dq.clear();
        const double* row = src.data() + static_cast<size_t>(y) * width;
        double* out = dst.data() + static_cast<size_t>(y) * width;
        for (int x = 0; x < width + w; ++x) {
            if (x < width) {
                while (!dq.empty() && better(row[x], row[dq.back()])) dq.pop_back();
                dq.push_back(x);
            }
            int cx = x - w;  // window center whose range just completed
            if (cx < 0) continue;
            while (!dq.empty() && dq.front() < cx - w) dq.pop_front();
            if (cx < width && !dq.empty()) out[cx] = row[dq.front()];
        }
    }
}

ScalarField disk_extreme(const ScalarField& f, int radius, bool take_max) {
    ScalarField out(f.width(), f.height(), f.units());
    int w = f.width(), h = f.height();
    if (radius < 0) radius = 0;

    // replace the NaN exterior by the identity element of the extreme
    std::vector<double> work(f.values());
    for (double& v : work)
        if (std::isnan(v)) v = take_max ? -kInf : kInf;

    std::vector<double> acc(work.size(), take_max ? -kInf : kInf);
    std::vector<double> rowbuf;

    // run decomposition: the disk is a union of horizontal runs, one per dy
    std::vector<int> half(radius + 1);
    for (int dy = 0; dy <= radius; ++dy)
        half[dy] = static_cast<int>(
            std::floor(std::sqrt(static_cast<double>(radius) * radius -
                                 static_cast<double>(dy) * dy)));

    for (int dy = 0; dy <= radius; ++dy) {
        bool fresh = dy == 0 || half[dy] != half[dy - 1];
        if (fresh) row_extreme(work, w, h, half[dy], take_max, rowbuf);
        for (int sgn : {-1, 1}) {
            if (dy == 0 && sgn == 1) continue;
            int off = sgn * dy;
            for (int y = 0; y < h; ++y) {
                int ys = y + off;
                if (ys < 0 || ys >= h) continue;
                const double* src = rowbuf.data() + static_cast<size_t>(ys) * w;
                double* dst = acc.data() + static_cast<size_t>(y) * w;
                if (take_max) {
                    for (int x = 0; x < w; ++x) dst[x] = std::max(dst[x], src[x]);
                } else {
                    for (int x = 0; x < w; ++x) dst[x] = std::min(dst[x], src[x]);
                }
            }
        }
    }

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            size_t i = static_cast<size_t>(y) * w + x;
            out.set(x, y, f.defined(x, y) ? acc[i] : kNan);
        }
    return out;
}

}  // namespace

ScalarField dilate(const ScalarField& f, int radius) {
    return disk_extreme(f, radius, true);
}

ScalarField erode(const ScalarField& f, int radius) {
    return disk_extreme(f, radius, false);
}

// ---------------------------------------------------------------------------
// Gradient and curvature reference
// ---------------------------------------------------------------------------

ScalarField gradient_magnitude(const ScalarField& f) {
    ScalarField out(f.width(), f.height(), FieldUnits::Ratio);
    for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) {
            if (!f.defined(x, y)) continue;
            double gx = 0.0, gy = 0.0;
            bool xm = f.defined(x - 1, y), xp = f.defined(x + 1, y);
            bool ym = f.defined(x, y - 1), yp = f.defined(x, y + 1);
            double c = f.at(x, y);
            if (xm && xp)
                gx = (f.at(x + 1, y) - f.at(x - 1, y)) / 2.0;
            else if (xp)
                gx = f.at(x + 1, y) - c;
            else if (xm)
                gx = c - f.at(x - 1, y);
            if (ym && yp)
                gy = (f.at(x, y + 1) - f.at(x, y - 1)) / 2.0;
            else if (yp)
                gy = f.at(x, y + 1) - c;
            else if (ym)
                gy = c - f.at(x, y - 1);
            out.set(x, y, std::hypot(gx, gy));
        }
    return out;
}

ScalarField phi0_field(const ScalarField& delta0) {
    ScalarField g = gradient_magnitude(delta0);
    ScalarField out(delta0.width(), delta0.height(), FieldUnits::Log);
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g.defined(x, y))
                out.set(x, y, std::log(std::max(g.at(x, y), kGradientFloor)));
    return out;
}

ScalarField kappa_reference(const CurveSamples& curve, const ScalarField& s0,
                            const BinaryMask& mask) {
    ScalarField out(mask.width(), mask.height(), FieldUnits::Ratio);
    for_each_interior(mask, [&](int x, int y) {
        if (!s0.defined(x, y)) return;
        double arc = s0.at(x, y);
        size_t i = std::lower_bound(curve.arc.begin(), curve.arc.end(), arc) -
                   curve.arc.begin();
        if (i >= curve.arc.size()) i = curve.arc.size() - 1;
        if (i > 0 && arc - curve.arc[i - 1] < curve.arc[i] - arc) --i;
        double c = curve.curvature.empty() ? 0.0 : curve.curvature[i];
        // kappa_phi = -sgn(c) * inf; zero curvature keeps the dilation
        // branch, with a tolerance absorbing fit noise on straight spans
        if (std::abs(c) < 1e-4) c = 0.0;
        out.set(x, y, c > 0.0 ? -kCurvatureSentinel : kCurvatureSentinel);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Alpha filter and scale space
// ---------------------------------------------------------------------------

ScalarField alpha_filter(const ScalarField& g, const ScalarField& kref,
                         int scale) {
    ScalarField dil = dilate(g, scale);
    ScalarField ero = erode(g, scale);
    ScalarField out(g.width(), g.height(), g.units());
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
            if (!g.defined(x, y)) continue;
            double clamped = std::min(dil.at(x, y), kref.at(x, y));
            out.set(x, y, std::max(ero.at(x, y), clamped));
        }
    return out;
}

ScalarField curvature_deformation(const ScalarField& phi0,
                                  const ScalarField& kref, int scale) {
    ScalarField a = alpha_filter(phi0, kref, scale);
    ScalarField out(phi0.width(), phi0.height(), FieldUnits::Ratio);
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            if (a.defined(x, y)) out.set(x, y, std::exp(a.at(x, y)));
    return out;
}

ScaleSpace curvature_stack(const ScalarField& phi0, const ScalarField& kref,
                           int max_scale) {
    ScaleSpace stack;
    stack.levels.reserve(max_scale + 1);
    for (int s = 0; s <= max_scale; ++s)
        stack.levels.push_back(curvature_deformation(phi0, kref, s));
    return stack;
}

ScalarField minimizing_scale(const ScaleSpace& stack) {
    const ScalarField& base = stack.levels.front();
    ScalarField out(base.width(), base.height(), FieldUnits::Pixels);
    for (int y = 0; y < base.height(); ++y)
        for (int x = 0; x < base.width(); ++x) {
            if (!base.defined(x, y)) continue;
            double best = base.at(x, y);
            int arg = 0;
            for (size_t s = 1; s < stack.levels.size(); ++s) {
                double v = stack.levels[s].at(x, y);
                if (v < best) {
                    best = v;
                    arg = static_cast<int>(s);
                }
            }
            out.set(x, y, static_cast<double>(arg));
        }
    return out;
}

ScalarField stack_minimum(const ScaleSpace& stack) {
    const ScalarField& base = stack.levels.front();
    ScalarField out(base.width(), base.height(), base.units());
    for (int y = 0; y < base.height(); ++y)
        for (int x = 0; x < base.width(); ++x) {
            if (!base.defined(x, y)) continue;
            double best = base.at(x, y);
            for (size_t s = 1; s < stack.levels.size(); ++s)
                best = std::min(best, stack.levels[s].at(x, y));
            out.set(x, y, best);
        }
    return out;
}

int default_max_scale(const ScalarField& delta0) {
    double worst = 0.0;
    for (double v : delta0.values())
        if (!std::isnan(v)) worst = std::max(worst, v);
    return static_cast<int>(std::ceil(2.0 * worst));
}

// ---------------------------------------------------------------------------
// Reference curve extraction
// ---------------------------------------------------------------------------

namespace {

/// Zhang-Suen thinning to a one-pixel-wide skeleton.
void thin_zhang_suen(std::vector<uint8_t>& img, int w, int h) {
    auto at = [&](int x, int y) -> uint8_t {
        if (x < 0 || y < 0 || x >= w || y >= h) return 0;
        return img[static_cast<size_t>(y) * w + x];
    };
    bool changed = true;
    std::vector<size_t> kill;
    while (changed) {
        changed = false;
        for (int phase = 0; phase < 2; ++phase) {
            kill.clear();
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (!at(x, y)) continue;
                    uint8_t p2 = at(x, y - 1), p3 = at(x + 1, y - 1),
                            p4 = at(x + 1, y), p5 = at(x + 1, y + 1),
                            p6 = at(x, y + 1), p7 = at(x - 1, y + 1),
                            p8 = at(x - 1, y), p9 = at(x - 1, y - 1);
                    int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    if (b < 2 || b > 6) continue;
                    int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) +
                            (p4 == 0 && p5 == 1) + (p5 == 0 && p6 == 1) +
                            (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                            (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
                    if (a != 1) continue;
                    if (phase == 0) {
                        if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
                    } else {
                        if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
                    }
                    kill.push_back(static_cast<size_t>(y) * w + x);
                }
            for (size_t i : kill) img[i] = 0;
            changed |= !kill.empty();
        }
    }
}

struct SkeletonPath {
    std::vector<Vec2> points;
};

/// Longest path through the skeleton graph: BFS to the farthest pixel, then
/// BFS back, collecting parents.
SkeletonPath longest_path(const std::vector<uint8_t>& img, int w, int h) {
    auto at = [&](int x, int y) -> bool {
        if (x < 0 || y < 0 || x >= w || y >= h) return false;
        return img[static_cast<size_t>(y) * w + x] != 0;
    };
    auto bfs = [&](int sx, int sy, std::vector<int>& parent) {
        std::vector<int> dist(static_cast<size_t>(w) * h, -1);
        parent.assign(static_cast<size_t>(w) * h, -1);
        std::queue<std::pair<int, int>> q;
        q.push({sx, sy});
        dist[static_cast<size_t>(sy) * w + sx] = 0;
        int far_idx = static_cast<int>(static_cast<size_t>(sy) * w + sx);
        int far_d = 0;
        while (!q.empty()) {
            auto [x, y] = q.front();
            q.pop();
            int d = dist[static_cast<size_t>(y) * w + x];
            if (d > far_d) {
                far_d = d;
                far_idx = static_cast<int>(static_cast<size_t>(y) * w + x);
            }
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (!dx && !dy) continue;
                    int nx = x + dx, ny = y + dy;
                    if (!at(nx, ny)) continue;
                    size_t ni = static_cast<size_t>(ny) * w + nx;
                    if (dist[ni] >= 0) continue;
                    dist[ni] = d + 1;
                    parent[ni] = static_cast<int>(static_cast<size_t>(y) * w + x);
                    q.push({nx, ny});
                }
        }
        return far_idx;
    };

    SkeletonPath path;
    int sx = -1, sy = -1;
    for (int y = 0; y < h && sx < 0; ++y)
        for (int x = 0; x < w; ++x)
            if (at(x, y)) {
                sx = x;
                sy = y;
                break;
            }
    if (sx < 0) return path;
    std::vector<int> parent;
    int a = bfs(sx, sy, parent);
    int b = bfs(a % w, a / w, parent);
    for (int idx = b; idx >= 0; idx = parent[idx])
        path.points.push_back(
            {static_cast<double>(idx % w), static_cast<double>(idx / w)});
    return path;
}

/// Moves a point to the sub-pixel maximum of delta0 along the local normal.
Vec2 snap_to_ridge(const Vec2& p, const Vec2& tangent, const ScalarField& delta0) {
    Vec2 n = tangent.rot90();
    double best_off = 0.0, best_val = -kInf;
    for (double off = -2.0; off <= 2.0; off += 0.5) {
        double v = sample_field(delta0, p.x + n.x * off, p.y + n.y * off);
        if (!std::isnan(v) && v > best_val) {
            best_val = v;
            best_off = off;
        }
    }
    if (std::isinf(best_val)) return p;
    // parabolic refinement around the best coarse offset
    double v0 = sample_field(delta0, p.x + n.x * (best_off - 0.5),
                             p.y + n.y * (best_off - 0.5));
    double v2 = sample_field(delta0, p.x + n.x * (best_off + 0.5),
                             p.y + n.y * (best_off + 0.5));
    if (!std::isnan(v0) && !std::isnan(v2)) {
        double denom = v0 - 2.0 * best_val + v2;
        if (std::abs(denom) > 1e-9) {
            double shift = 0.25 * (v0 - v2) / denom;
            best_off += std::clamp(shift, -0.5, 0.5);
        }
    }
    return p + n * best_off;
}

}  // namespace

ReferenceCurve reference_curve(const ScalarField& phi_min, double quantile,
                               const BinaryMask& mask, const ScalarField& delta0,
                               const ScalarField& s0) {
    ReferenceCurve out;
    int w = mask.width(), h = mask.height();

    // The inversion leaves the stress-free locus as the extreme tail of the
    // |phi - 1| distribution (the gradient-breakdown valley of delta0), so
    // the threshold keeps the farthest-from-unity fraction.
    std::vector<double> dev;
    dev.reserve(mask.count());
    for_each_interior(mask, [&](int x, int y) {
        if (phi_min.defined(x, y)) dev.push_back(std::abs(phi_min.at(x, y) - 1.0));
    });
    if (dev.empty() || quantile <= 0.0) {
        out.disconnected = true;
        return out;
    }
    std::vector<double> sorted = dev;
    std::sort(sorted.begin(), sorted.end());
    double q = std::clamp(1.0 - quantile, 0.0, 1.0);
    double cut = sorted[static_cast<size_t>(q * (sorted.size() - 1))];

    // The valley values spread continuously on deformed bodies, so a pure
    // top-quantile cut can land inside the valley cluster and fragment it.
    // Bound the cut by a two-cluster split of the deviation histogram; the
    // quantile stays the knob for keeping more.
    {
        double vmax = sorted.back();
        if (vmax > 0.0) {
            std::array<size_t, 256> hist{};
            for (double v : sorted)
                hist[std::min<size_t>(255, static_cast<size_t>(v / vmax * 255.0))]++;
            double total = static_cast<double>(sorted.size());
            double sum_all = 0.0;
            for (int i = 0; i < 256; ++i) sum_all += i * static_cast<double>(hist[i]);
            double w0 = 0.0, sum0 = 0.0, best_var = -1.0;
            int best_bin = 128;
            for (int i = 0; i < 256; ++i) {
                w0 += static_cast<double>(hist[i]);
                sum0 += i * static_cast<double>(hist[i]);
                double w1 = total - w0;
                if (w0 == 0.0 || w1 == 0.0) continue;
                double m0 = sum0 / w0, m1 = (sum_all - sum0) / w1;
                double var = w0 * w1 * (m0 - m1) * (m0 - m1);
                if (var > best_var) {
                    best_var = var;
                    best_bin = i;
                }
            }
            double otsu = (best_bin + 1) / 255.0 * vmax;
            cut = std::min(cut, otsu);
        }
    }

    // non-strict comparison: clean ridges tie exactly at the cut value
    std::vector<uint8_t> cand(static_cast<size_t>(w) * h, 0);
    size_t kept = 0;
    for_each_interior(mask, [&](int x, int y) {
        if (phi_min.defined(x, y) && std::abs(phi_min.at(x, y) - 1.0) >= cut) {
            cand[static_cast<size_t>(y) * w + x] = 1;
            ++kept;
        }
    });
    if (kept == 0) {
        out.disconnected = true;
        return out;
    }

    // largest 8-connected candidate component; others flag when significant
    BinaryMask cmask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            cmask.set(x, y, cand[static_cast<size_t>(y) * w + x] != 0);
    std::vector<size_t> sizes = geom::component_sizes(cmask);
    if (sizes.size() > 1 &&
        sizes[1] >= std::max<size_t>(12, sizes[0] / 5))
        out.disconnected = true;
    BinaryMask main = geom::largest_component(cmask);
    std::vector<uint8_t> skel(static_cast<size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            skel[static_cast<size_t>(y) * w + x] = main.at(x, y) ? 1 : 0;

    thin_zhang_suen(skel, w, h);
    SkeletonPath path = longest_path(skel, w, h);
    if (path.points.size() < 2) {
        out.disconnected = true;
        out.points = path.points;
        return out;
    }

    if (std::getenv("UNWRAP_DEBUG_REF")) {
        fprintf(stderr, "[ref] cut=%.6f kept=%zu path=%zu\n", cut, kept,
                path.points.size());
        for (size_t i = 0; i < path.points.size(); i += 10)
            fprintf(stderr, "[ref] raw %zu (%.1f, %.1f)\n", i, path.points[i].x,
                    path.points[i].y);
    }

    std::vector<Vec2> pts = geom::smooth_chain(path.points, 5);

    // keep the longest run free of sharp kinks (the thinned set can route
    // onto the diagonal medial branches of flat caps)
    if (pts.size() >= 7) {
        std::vector<uint8_t> kink(pts.size(), 0);
        for (size_t i = 2; i + 2 < pts.size(); ++i) {
            Vec2 a = (pts[i] - pts[i - 2]).normalized();
            Vec2 b = (pts[i + 2] - pts[i]).normalized();
            if (a.dot(b) < std::cos(0.5)) kink[i] = 1;
        }
        size_t best_lo = 0, best_len = 0, run_lo = 0;
        for (size_t i = 0; i <= pts.size(); ++i) {
            if (i == pts.size() || kink[i]) {
                if (i - run_lo > best_len) {
                    best_len = i - run_lo;
                    best_lo = run_lo;
                }
                run_lo = i + 1;
            }
        }
        if (best_len >= 5)
            pts = std::vector<Vec2>(pts.begin() + best_lo,
                                    pts.begin() + best_lo + best_len);
    }

    // snap to the delta0 ridge
    for (size_t i = 0; i < pts.size(); ++i) {
        size_t a = i >= 2 ? i - 2 : 0;
        size_t b = std::min(i + 2, pts.size() - 1);
        Vec2 t = (pts[b] - pts[a]).normalized();
        if (t.norm() > 0.5) {
            Vec2 before = pts[i];
            pts[i] = snap_to_ridge(pts[i], t, delta0);
            if (std::getenv("UNWRAP_DEBUG_REF") && i % 20 == 0)
                fprintf(stderr,
                        "[ref] snap %zu (%.2f,%.2f) t=(%.2f,%.2f) -> (%.2f,%.2f)\n",
                        i, before.x, before.y, t.x, t.y, pts[i].x, pts[i].y);
        }
    }

    // march outward along the ridge from both ends: half-gain snapping keeps
    // the step direction stable; sharp turns (cap diagonals) stop the march
    auto extend = [&](bool front) {
        for (int step = 0; step < 4 * (w + h); ++step) {
            size_t n = pts.size();
            size_t back_ref = std::min<size_t>(6, n - 1);
            Vec2 end = front ? pts.front() : pts.back();
            Vec2 inner = front ? pts[back_ref] : pts[n - 1 - back_ref];
            Vec2 dir = (end - inner).normalized();
            if (dir.norm() < 0.5) break;
            Vec2 cand_p = end + dir;
            Vec2 snapped = snap_to_ridge(cand_p, dir, delta0);
            Vec2 offset = snapped - cand_p;
            if (offset.norm() > 1.5) break;  // ridge lost
            if (offset.norm() > 1.0) offset = offset.normalized();
            Vec2 next = cand_p + offset * 0.5;
            double d0 = sample_field(delta0, next.x, next.y);
            int px = static_cast<int>(std::lround(next.x));
            int py = static_cast<int>(std::lround(next.y));
            if (std::isnan(d0) || d0 < 2.0 || !mask.at(px, py)) break;
            Vec2 moved = next - end;
            if (moved.norm() < 0.35 || moved.normalized().dot(dir) < 0.8) break;
            if (front)
                pts.insert(pts.begin(), next);
            else
                pts.push_back(next);
        }
    };
    extend(false);
    extend(true);

    pts = geom::smooth_chain(pts, 5);

    // orient by increasing footpoint parameter at the ends
    double s_front = sample_field(s0, pts.front().x, pts.front().y);
    double s_back = sample_field(s0, pts.back().x, pts.back().y);
    if (!std::isnan(s_front) && !std::isnan(s_back) && s_back < s_front)
        std::reverse(pts.begin(), pts.end());

    out.points = std::move(pts);
    return out;
}

// ---------------------------------------------------------------------------
// Image re-registration
// ---------------------------------------------------------------------------

UnwrappedImage unwrap_image(const Image8& image, const BinaryMask& mask,
                            const ReferenceCurve& reference,
                            const ScalarField& delta0, const ScalarField* sigma,
                            const UnwrapOptions& options) {
    UnwrappedImage out;
    if (reference.points.size() < 2)
        throw Error("unwrap_image: reference curve is empty");
    (void)delta0;

    geom::SampledCurve ref =
        geom::resample_polyline(reference.points, 0.5, false);
    size_t n = ref.points.size();
    std::vector<Vec2> tangents(n);
    for (size_t i = 0; i < n; ++i) {
        size_t a = i >= 2 ? i - 2 : 0;
        size_t b = std::min(i + 2, n - 1);
        tangents[i] = (ref.points[b] - ref.points[a]).normalized();
    }
    SampleGrid grid(ref.points, 4.0);

    struct Scatter {
        double sx, sy;  // straightened coordinates
        double value;
    };
    std::vector<Scatter> scatter;
    scatter.reserve(mask.count());

    ScalarField s_reg(mask.width(), mask.height(), FieldUnits::Pixels);
    for_each_interior(mask, [&](int x, int y) {
        Vec2 p{static_cast<double>(x), static_cast<double>(y)};
        int i = grid.nearest(p);
        Vec2 rel = p - ref.points[i];
        double along = ref.arc[i] + rel.dot(tangents[i]);
        double side = tangents[i].cross(rel) >= 0.0 ? 1.0 : -1.0;
        double perp = std::abs(tangents[i].cross(rel));
        s_reg.set(x, y, along);
        scatter.push_back({along, side * perp,
                           static_cast<double>(image.pixels.empty()
                                                   ? 255
                                                   : image.at(x, y))});
    });

    if (options.apply_scale_advance && sigma) {
        // literal footpoint dilation at the per-pixel minimizing scale
        size_t k = 0;
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                if (!mask.at(x, y)) continue;
                int r = static_cast<int>(sigma->defined(x, y) ? sigma->at(x, y) : 0);
                double best = s_reg.at(x, y);
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx) {
                        if (dx * dx + dy * dy > r * r) continue;
                        if (s_reg.defined(x + dx, y + dy))
                            best = std::max(best, s_reg.at(x + dx, y + dy));
                    }
                scatter[k++].sx = best;
            }
    }

    double min_sx = kInf, max_sx = -kInf, max_abs_sy = 0.0;
    for (const Scatter& s : scatter) {
        min_sx = std::min(min_sx, s.sx);
        max_sx = std::max(max_sx, s.sx);
        max_abs_sy = std::max(max_abs_sy, std::abs(s.sy));
    }
    const int margin = 4;
    int out_w = static_cast<int>(std::ceil(max_sx - min_sx)) + 2 * margin + 1;
    int out_h = 2 * (static_cast<int>(std::ceil(max_abs_sy)) + margin) + 1;
    int y_center = out_h / 2;

    std::vector<double> sum(static_cast<size_t>(out_w) * out_h, 0.0);
    std::vector<int> cnt(static_cast<size_t>(out_w) * out_h, 0);
    for (const Scatter& s : scatter) {
        int px = static_cast<int>(std::lround(s.sx - min_sx)) + margin;
        int py = static_cast<int>(std::lround(s.sy)) + y_center;
        if (px < 0 || py < 0 || px >= out_w || py >= out_h) continue;
        size_t i = static_cast<size_t>(py) * out_w + px;
        sum[i] += s.value;
        ++cnt[i];
    }

    Image8 img(out_w, out_h, 0);
    BinaryMask omask(out_w, out_h);
    for (int y = 0; y < out_h; ++y)
        for (int x = 0; x < out_w; ++x) {
            size_t i = static_cast<size_t>(y) * out_w + x;
            if (cnt[i] > 0) {
                img.set(x, y, static_cast<uint8_t>(
                                  std::clamp(sum[i] / cnt[i], 0.0, 255.0)));
                omask.set(x, y, true);
            }
        }

    // fill holes up to 2 px from the nearest scattered cell
    for (int pass = 0; pass < 2; ++pass) {
        BinaryMask grown = omask;
        for (int y = 0; y < out_h; ++y)
            for (int x = 0; x < out_w; ++x) {
                if (omask.at(x, y)) continue;
                int filled = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        if ((dx || dy) && omask.at(x + dx, y + dy)) ++filled;
                if (filled < 6) continue;
                // nearest filled neighbor by spiral scan
                for (int r = 1; r <= 2; ++r) {
                    bool done = false;
                    for (int dy = -r; dy <= r && !done; ++dy)
                        for (int dx = -r; dx <= r && !done; ++dx) {
                            if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                            if (omask.at(x + dx, y + dy)) {
                                grown.set(x, y, true);
                                img.set(x, y, img.at(x + dx, y + dy));
                                done = true;
                            }
                        }
                    if (done) break;
                }
            }
        omask = grown;
    }

    // half-width profile per unit station from the scattered coordinates
    int stations = static_cast<int>(std::ceil(max_sx - min_sx)) + 1;
    std::vector<double> lo(stations, kInf), hi(stations, -kInf);
    for (const Scatter& s : scatter) {
        int j = static_cast<int>(std::lround(s.sx - min_sx));
        if (j < 0 || j >= stations) continue;
        lo[j] = std::min(lo[j], s.sy);
        hi[j] = std::max(hi[j], s.sy);
    }
    for (int j = 0; j < stations; ++j) {
        if (hi[j] < lo[j]) continue;
        out.profile.station.push_back(static_cast<double>(j));
        out.profile.half_width.push_back((hi[j] - lo[j]) / 2.0 + 0.5);
    }

    out.image = std::move(img);
    out.mask = std::move(omask);
    out.station_origin = min_sx - margin;
    return out;
}

}  // namespace unwrap::morph
