/**
 * @file synth.cpp
 * @brief Template construction, Frenet bending and boundary noise.
 */
#include "unwrap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "unwrap/errors.hpp"
#include "unwrap/geometry.hpp"

namespace unwrap::synth {

namespace {

constexpr double kFrameStep = 0.25;       // arc-length integration step
constexpr double kMaxBendFactor = 0.8;    // |kappa| * lambda/2 limit

double lerp_profile(const std::vector<double>& prof, double x) {
    if (prof.empty()) return 0.0;
    if (x <= 0.0) return prof.front();
    double last = static_cast<double>(prof.size() - 1);
    if (x >= last) return prof.back();
    size_t i = static_cast<size_t>(x);
    double t = x - static_cast<double>(i);
    return prof[i] * (1.0 - t) + prof[i + 1] * t;
}

}  // namespace

double Template::width_at(double x) const {
    if (x < 0.0 || x > length) return 0.0;
    double w = lerp_profile(width_profile, x);
    switch (cap_style) {
        case CapStyle::Flat:
            return w;
        case CapStyle::Round: {
            double r0 = lerp_profile(width_profile, 0.0) / 2.0;
            double r1 = lerp_profile(width_profile, length) / 2.0;
            if (x < r0) w = std::min(w, 2.0 * std::sqrt(std::max(
                                            0.0, r0 * r0 - (r0 - x) * (r0 - x))));
            if (x > length - r1)
                w = std::min(w, 2.0 * std::sqrt(std::max(
                                    0.0, r1 * r1 - (x - (length - r1)) *
                                                       (x - (length - r1)))));
            return w;
        }
        case CapStyle::Taper: {
            // linear taper to a point over one local width from each end
            double t0 = lerp_profile(width_profile, 0.0);
            double t1 = lerp_profile(width_profile, length);
            if (x < t0) w = std::min(w, x);
            if (x > length - t1) w = std::min(w, length - x);
            return w;
        }
    }
    return w;
}

BendProfile BendProfile::constant(double kappa, double length) {
    BendProfile p;
    p.knot_s = {0.0, length};
    p.knot_kappa = {kappa, kappa};
    return p;
}

BendProfile BendProfile::linear(double kappa0, double kappa1, double length) {
    BendProfile p;
    p.knot_s = {0.0, length};
    p.knot_kappa = {kappa0, kappa1};
    return p;
}

double BendProfile::kappa_at(double s) const {
    if (knot_s.empty()) return 0.0;
    if (s <= knot_s.front()) return knot_kappa.front();
    if (s >= knot_s.back()) return knot_kappa.back();
    size_t i = 1;
    while (i < knot_s.size() && knot_s[i] < s) ++i;
    double t = (s - knot_s[i - 1]) / (knot_s[i] - knot_s[i - 1]);
    return knot_kappa[i - 1] * (1.0 - t) + knot_kappa[i] * t;
}

double BendProfile::max_abs_kappa(double length) const {
    double worst = 0.0;
    for (double s = 0.0; s <= length; s += 1.0)
        worst = std::max(worst, std::abs(kappa_at(s)));
    return worst;
}

namespace {

void validate_template(const Template& tpl) {
    if (tpl.length < 8.0 || tpl.width_profile.size() < 2)
        throw InvalidProfileError("make_template: template too small");
    double wmax = 0.0;
    for (double w : tpl.width_profile) {
        if (w <= 0.0)
            throw InvalidProfileError("make_template: width profile must stay positive");
        wmax = std::max(wmax, w);
    }
    if (wmax >= tpl.length / 3.0)
        throw InvalidProfileError(
            "make_template: body not slender (max width must be < L/3)");
}

struct FrameTrack {
    std::vector<Vec2> pos;    // mu(s) at kFrameStep spacing
    std::vector<double> theta;
};

// Unit-speed planar Frenet evolution theta' = kappa, RK4 on theta and the
// position quadrature.
FrameTrack integrate_frame(const BendProfile& profile, double length) {
    FrameTrack track;
    size_t steps = static_cast<size_t>(std::ceil(length / kFrameStep));
    track.pos.reserve(steps + 1);
    track.theta.reserve(steps + 1);
    double theta = 0.0;
    Vec2 pos{0.0, 0.0};
    track.pos.push_back(pos);
    track.theta.push_back(theta);
    for (size_t i = 0; i < steps; ++i) {
        double s = i * kFrameStep;
        double hs = std::min(kFrameStep, length - s);
        if (hs <= 0.0) break;
        double k1 = profile.kappa_at(s);
        double k2 = profile.kappa_at(s + hs / 2.0);
        double k4 = profile.kappa_at(s + hs);
        double th1 = theta;
        double th2 = theta + hs / 2.0 * k1;
        double th3 = theta + hs / 2.0 * k2;
        double th4 = theta + hs * k2;
        pos += Vec2{std::cos(th1) + 2.0 * std::cos(th2) + 2.0 * std::cos(th3) +
                        std::cos(th4),
                    std::sin(th1) + 2.0 * std::sin(th2) + 2.0 * std::sin(th3) +
                        std::sin(th4)} *
               (hs / 6.0);
        theta += hs / 6.0 * (k1 + 4.0 * k2 + k4);
        track.pos.push_back(pos);
        track.theta.push_back(theta);
    }
    return track;
}

}  // namespace

SynthResult make_template(const Template& tpl, int margin) {
    return bend(tpl, BendProfile::constant(0.0, tpl.length), margin);
}

SynthResult bend(const Template& tpl, const BendProfile& profile, int margin) {
    validate_template(tpl);

    for (double s = 0.0; s <= tpl.length; s += 1.0) {
        double factor = std::abs(profile.kappa_at(s)) * tpl.width_at(s) / 2.0;
        if (factor > kMaxBendFactor)
            throw SelfOverlapError(
                "bend: |kappa| * lambda/2 exceeds 0.8; deformation not invertible");
    }

    FrameTrack track = integrate_frame(profile, tpl.length);

    // bounding box of the sweep
    double min_x = 1e30, min_y = 1e30, max_x = -1e30, max_y = -1e30;
    for (size_t i = 0; i < track.pos.size(); ++i) {
        double s = i * kFrameStep;
        double half = tpl.width_at(s) / 2.0;
        Vec2 n{-std::sin(track.theta[i]), std::cos(track.theta[i])};
        for (double d : {-half, half}) {
            Vec2 p = track.pos[i] + n * d;
            min_x = std::min(min_x, p.x);
            min_y = std::min(min_y, p.y);
            max_x = std::max(max_x, p.x);
            max_y = std::max(max_y, p.y);
        }
    }
    Vec2 shift{margin - min_x, margin - min_y};
    int width = static_cast<int>(std::ceil(max_x - min_x)) + 2 * margin + 1;
    int height = static_cast<int>(std::ceil(max_y - min_y)) + 2 * margin + 1;

    BinaryMask mask(width, height);
    std::vector<int> claim(static_cast<size_t>(width) * height, -1);
    double lambda_max = 0.0;
    for (double w : tpl.width_profile) lambda_max = std::max(lambda_max, w);

    // sweep sections; each (s, delta) sample paints its pixel. The paint
    // range shrinks by half a pixel so the rasterized width matches lambda
    // after center rounding.
    for (size_t i = 0; i < track.pos.size(); ++i) {
        double s = i * kFrameStep;
        double half = tpl.width_at(s) / 2.0 - 0.5;
        if (half < 0.0) continue;
        Vec2 n{-std::sin(track.theta[i]), std::cos(track.theta[i])};
        Vec2 base = track.pos[i] + shift;
        int nd = static_cast<int>(std::ceil(2.0 * half / kFrameStep));
        for (int k = 0; k <= nd; ++k) {
            double d = -half + 2.0 * half * k / std::max(1, nd);
            Vec2 p = base + n * d;
            int px = static_cast<int>(std::lround(p.x));
            int py = static_cast<int>(std::lround(p.y));
            if (px < 0 || py < 0 || px >= width || py >= height) continue;
            size_t idx = static_cast<size_t>(py) * width + px;
            int prev = claim[idx];
            if (prev >= 0 &&
                std::abs(s - prev * kFrameStep) > 3.0 * lambda_max + 2.0)
                throw SelfOverlapError("bend: distant sections collide in raster");
            claim[idx] = static_cast<int>(i);
            mask.set(px, py, true);
        }
    }
    mask = geom::fill_small_holes(mask, 4);

    SynthResult out;
    out.mask = std::move(mask);
    size_t stations = static_cast<size_t>(std::floor(tpl.length)) + 1;
    out.truth.axis.reserve(stations);
    out.truth.lambda.reserve(stations);
    for (size_t j = 0; j < stations; ++j) {
        double s = std::min(static_cast<double>(j), tpl.length);
        size_t i = std::min<size_t>(static_cast<size_t>(s / kFrameStep),
                                    track.pos.size() - 1);
        Vec2 n{-std::sin(track.theta[i]), std::cos(track.theta[i])};
        Vec2 mu = track.pos[i] + shift;
        double half = tpl.width_at(s) / 2.0;
        out.truth.axis.push_back(mu);
        out.truth.lambda.push_back(2.0 * half);
        out.truth.sections.push_back({mu - n * half, mu + n * half});
    }
    double axis_len = 0.0;
    for (size_t j = 1; j < out.truth.axis.size(); ++j)
        axis_len += (out.truth.axis[j] - out.truth.axis[j - 1]).norm();
    out.truth.axis_length = axis_len;
    return out;
}

BinaryMask rasterize_polygon(const std::vector<Vec2>& polygon, int width,
                             int height) {
    BinaryMask out(width, height);
    size_t n = polygon.size();
    if (n < 3) return out;
    for (int y = 0; y < height; ++y) {
        double yc = static_cast<double>(y);
        std::vector<double> xs;
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = polygon[i];
            const Vec2& b = polygon[(i + 1) % n];
            if ((a.y <= yc && b.y > yc) || (b.y <= yc && a.y > yc)) {
                double t = (yc - a.y) / (b.y - a.y);
                xs.push_back(a.x + t * (b.x - a.x));
            }
        }
        std::sort(xs.begin(), xs.end());
        for (size_t k = 0; k + 1 < xs.size(); k += 2) {
            int x0 = static_cast<int>(std::ceil(xs[k]));
            int x1 = static_cast<int>(std::floor(xs[k + 1]));
            for (int x = x0; x <= x1; ++x) out.set(x, y, true);
        }
    }
    return out;
}

BinaryMask add_boundary_noise(const BinaryMask& mask, double amplitude,
                              uint64_t seed) {
    if (amplitude <= 0.0) return mask;
    if (amplitude > 2.0)
        throw InvalidProfileError("add_boundary_noise: amplitude must be <= 2 px");

    Contour contour = geom::extract_contour(mask);
    size_t n = contour.points.size();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> raw(n);
    for (double& v : raw) v = gauss(rng);

    // circular Gaussian smoothing, then renormalize to the requested
    // amplitude and force an exactly zero mean
    const int reach = 9;
    std::vector<double> kernel(2 * reach + 1);
    double ksum = 0.0;
    for (int k = -reach; k <= reach; ++k) {
        kernel[k + reach] = std::exp(-0.5 * (k / 3.0) * (k / 3.0));
        ksum += kernel[k + reach];
    }
    std::vector<double> noise(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -reach; k <= reach; ++k)
            acc += kernel[k + reach] * raw[(i + n + k) % n];
        noise[i] = acc / ksum;
    }
    double mean = 0.0, var = 0.0;
    for (double v : noise) mean += v;
    mean /= n;
    for (double v : noise) var += (v - mean) * (v - mean);
    double sd = std::sqrt(var / n);
    double scale = sd > 1e-12 ? amplitude / sd : 0.0;
    for (double& v : noise) v = (v - mean) * scale;

    // orient normals outward by voting against the mask
    int inward_votes = 0, samples = 0;
    for (size_t i = 0; i < n; i += std::max<size_t>(1, n / 64)) {
        const Vec2& prev = contour.points[(i + n - 1) % n];
        const Vec2& next = contour.points[(i + 1) % n];
        Vec2 normal = (next - prev).normalized().rot90();
        Vec2 probe = contour.points[i] + normal * 1.5;
        if (mask.at(static_cast<int>(std::lround(probe.x)),
                    static_cast<int>(std::lround(probe.y))))
            ++inward_votes;
        ++samples;
    }
    double outward = inward_votes * 2 > samples ? -1.0 : 1.0;

    // the contour runs through boundary-pixel centers, half a pixel inside
    // the true edge; expanding by 0.5 keeps the center-rule fill area-neutral
    std::vector<Vec2> displaced(n);
    for (size_t i = 0; i < n; ++i) {
        const Vec2& prev = contour.points[(i + n - 1) % n];
        const Vec2& next = contour.points[(i + 1) % n];
        Vec2 normal = (next - prev).normalized().rot90() * outward;
        displaced[i] = contour.points[i] + normal * (noise[i] + 0.5);
    }

    BinaryMask out = rasterize_polygon(displaced, mask.width(), mask.height());
    out = geom::largest_component(out);
    out = geom::fill_small_holes(out, 4);
    return out;
}

}  // namespace unwrap::synth
