/**
 * @file test_morph.cpp
 * @brief Field oracles, flat-disk morphology algebra and inversion checks.
 */
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "unwrap/errors.hpp"
#include "unwrap/io.hpp"
#include "unwrap/morph.hpp"
#include "unwrap/pipeline.hpp"
#include "unwrap/synth.hpp"

using namespace unwrap;
using namespace unwrap::morph;

namespace {

synth::Template band_template(double length, double width,
                              synth::CapStyle cap = synth::CapStyle::Flat) {
    synth::Template t;
    t.length = length;
    t.width_profile.assign(static_cast<size_t>(length) + 1, width);
    t.cap_style = cap;
    return t;
}

BinaryMask disk_mask(int canvas, double cx, double cy, double radius) {
    BinaryMask mask(canvas, canvas);
    for (int y = 0; y < canvas; ++y)
        for (int x = 0; x < canvas; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
                mask.set(x, y, true);
    return mask;
}

/// Brute-force nearest-sample scan in sample order (first strict minimum).
std::pair<double, double> brute_force_nearest(const CurveSamples& curve,
                                              const Vec2& p) {
    double best_d = 1e300, best_s = 0.0;
    for (size_t i = 0; i < curve.points.size(); ++i) {
        double d = (curve.points[i] - p).squared_norm();
        if (d < best_d) {
            best_d = d;
            best_s = curve.arc[i];
        }
    }
    return {std::sqrt(best_d), best_s};
}

ScalarField random_field(const BinaryMask& mask, uint64_t seed) {
    ScalarField f(mask.width(), mask.height());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) f.set(x, y, gauss(rng));
    return f;
}

/// Direct per-pixel sup/inf over an arbitrary offset set.
ScalarField offsets_extreme(const ScalarField& f, const BinaryMask& mask,
                            const std::vector<std::pair<int, int>>& offsets,
                            bool take_max) {
    ScalarField out(f.width(), f.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y)) continue;
            double best = take_max ? -1e300 : 1e300;
            for (auto [dx, dy] : offsets) {
                if (!f.defined(x + dx, y + dy)) continue;
                double v = f.at(x + dx, y + dy);
                best = take_max ? std::max(best, v) : std::min(best, v);
            }
            out.set(x, y, best);
        }
    return out;
}

std::vector<std::pair<int, int>> disk_offsets(int r) {
    std::vector<std::pair<int, int>> offs;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= r * r) offs.push_back({dx, dy});
    return offs;
}

Vec2 circle_center_from_axis(const synth::GroundTruth& truth) {
    Vec2 a = truth.axis.front();
    Vec2 b = truth.axis[truth.axis.size() / 2];
    Vec2 c = truth.axis.back();
    Vec2 ab = (a + b) / 2.0, bc = (b + c) / 2.0;
    Vec2 d1 = (b - a).rot90(), d2 = (c - b).rot90();
    double t = (bc - ab).cross(d2) / d1.cross(d2);
    return ab + d1 * t;
}

}  // namespace

// ---------------------------------------------------------------------------
// delta0 / s0
// ---------------------------------------------------------------------------

TEST_CASE("distance_field: disk center recovers the radius") {
    // analytic circle as the query curve
    const double radius = 22.0;
    BinaryMask mask = disk_mask(64, 31.0, 31.0, radius);
    CurveSamples circle;
    size_t count = static_cast<size_t>(2.0 * std::numbers::pi * radius / 0.4);
    for (size_t i = 0; i < count; ++i) {
        double theta = 2.0 * std::numbers::pi * i / count;
        circle.points.push_back(
            {31.0 + radius * std::cos(theta), 31.0 + radius * std::sin(theta)});
        circle.arc.push_back(radius * theta);
    }
    ScalarField d0 = distance_field(circle, mask);
    CHECK(std::abs(d0.at(31, 31) - radius) <= 0.5);
}

TEST_CASE("distance_field and footpoint_field match brute force exactly") {
    synth::SynthResult body =
        synth::bend(band_template(90.0, 16.0, synth::CapStyle::Round),
                    synth::BendProfile::constant(0.010, 90.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    InitialFields fields = initial_fields(samples, body.mask);

    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 0; x < body.mask.width(); ++x) {
            if (!body.mask.at(x, y)) continue;
            Vec2 p{static_cast<double>(x), static_cast<double>(y)};
            auto [bd, bs] = brute_force_nearest(samples, p);
            CHECK(std::abs(fields.delta0.at(x, y) - bd) <= 1e-12);

            // footpoint exact off the medial-axis ridge: skip pixels whose
            // top-two distinct sample distances are within 0.25 px
            double top1 = 1e300, top2 = 1e300;
            for (size_t i = 0; i < samples.points.size(); ++i) {
                double d = (samples.points[i] - p).norm();
                if (d < top1 - 0.25) {
                    top2 = top1;
                    top1 = d;
                } else if (d < top1) {
                    top1 = d;
                } else if (d < top2) {
                    top2 = d;
                }
            }
            if (top2 - top1 < 0.25) continue;
            CHECK(fields.s0.at(x, y) == bs);
        }
}

TEST_CASE("distance_field: contour pixels sit within half a pixel") {
    BinaryMask mask = disk_mask(48, 23.0, 23.0, 15.0);
    Contour contour = geom::extract_contour(mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    ScalarField d0 = distance_field(samples, mask);
    for (const Vec2& p : contour.points)
        CHECK(d0.at(static_cast<int>(p.x), static_cast<int>(p.y)) <= 0.5);
}

TEST_CASE("footpoint_field: straight axis gives s0 = x offset within 1 px") {
    BinaryMask mask(60, 21, false);
    for (int y = 3; y <= 17; ++y)
        for (int x = 2; x <= 57; ++x) mask.set(x, y, true);
    CurveSamples axis;
    for (double s = 0.0; s <= 55.0; s += 0.5) {
        axis.points.push_back({2.0 + s, 10.0});
        axis.arc.push_back(s);
    }
    ScalarField s0 = footpoint_field(axis, mask);
    for (int x = 4; x <= 55; ++x)
        CHECK(std::abs(s0.at(x, 12) - (x - 2.0)) <= 1.0);
}

TEST_CASE("footpoint_field: equidistant pixel takes the smaller parameter") {
    BinaryMask mask(8, 5, true);
    CurveSamples two;
    two.points = {{1.0, 2.0}, {5.0, 2.0}};
    two.arc = {0.0, 4.0};
    ScalarField s0 = footpoint_field(two, mask);
    CHECK(s0.at(3, 2) == 0.0);  // exactly between the two samples
}

// ---------------------------------------------------------------------------
// dilation / erosion
// ---------------------------------------------------------------------------

TEST_CASE("dilate/erode: constant fields and radius zero are identities") {
    BinaryMask mask = disk_mask(40, 19.0, 19.0, 14.0);
    ScalarField f(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) f.set(x, y, 3.25);

    for (int r : {0, 1, 3, 7}) {
        ScalarField d = dilate(f, r);
        ScalarField e = erode(f, r);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x)
                if (mask.at(x, y)) {
                    CHECK(d.at(x, y) == 3.25);
                    CHECK(e.at(x, y) == 3.25);
                }
    }

    ScalarField g = random_field(mask, 9);
    ScalarField d0 = dilate(g, 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) CHECK(d0.at(x, y) == g.at(x, y));
}

TEST_CASE("dilate/erode: equal the direct disk oracle on random fields") {
    BinaryMask mask = disk_mask(48, 23.0, 23.0, 18.0);
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        ScalarField f = random_field(mask, seed);
        for (int r : {1, 2, 5}) {
            ScalarField mine = dilate(f, r);
            ScalarField oracle = offsets_extreme(f, mask, disk_offsets(r), true);
            ScalarField mine_e = erode(f, r);
            ScalarField oracle_e =
                offsets_extreme(f, mask, disk_offsets(r), false);
            for (int y = 0; y < mask.height(); ++y)
                for (int x = 0; x < mask.width(); ++x)
                    if (mask.at(x, y)) {
                        CHECK(mine.at(x, y) == oracle.at(x, y));
                        CHECK(mine_e.at(x, y) == oracle_e.at(x, y));
                    }
        }
    }
}

TEST_CASE("dilate: semigroup composition equals the Minkowski-sum oracle") {
    BinaryMask mask = disk_mask(56, 27.0, 27.0, 22.0);
    Contour contour = geom::extract_contour(mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    ScalarField border = distance_field(samples, mask);

    const int a = 2, b = 3;
    std::vector<std::pair<int, int>> minkowski;
    for (auto [ux, uy] : disk_offsets(a))
        for (auto [vx, vy] : disk_offsets(b))
            minkowski.push_back({ux + vx, uy + vy});
    std::sort(minkowski.begin(), minkowski.end());
    minkowski.erase(std::unique(minkowski.begin(), minkowski.end()),
                    minkowski.end());

    for (uint64_t seed : {4ull, 5ull}) {
        ScalarField f = random_field(mask, seed);
        ScalarField composed = dilate(dilate(f, a), b);
        ScalarField oracle = offsets_extreme(f, mask, minkowski, true);
        ScalarField direct = dilate(f, a + b);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                if (!mask.at(x, y)) continue;
                if (border.at(x, y) <= a + b + 1.0) continue;  // interior only
                CHECK(composed.at(x, y) == oracle.at(x, y));
                // the iterated disk never exceeds the single larger disk
                CHECK(composed.at(x, y) <= direct.at(x, y));
            }
    }
}

TEST_CASE("dilate/erode: extensivity, monotonicity and duality") {
    BinaryMask mask = disk_mask(44, 21.0, 21.0, 16.0);
    for (uint64_t seed : {6ull, 7ull}) {
        ScalarField f = random_field(mask, seed);
        ScalarField d1 = dilate(f, 1), d3 = dilate(f, 3);
        ScalarField e1 = erode(f, 1), e3 = erode(f, 3);

        ScalarField neg(f.width(), f.height());
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x)
                if (mask.at(x, y)) neg.set(x, y, -f.at(x, y));
        ScalarField dual = dilate(neg, 3);

        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                if (!mask.at(x, y)) continue;
                CHECK(d1.at(x, y) >= f.at(x, y));
                CHECK(e1.at(x, y) <= f.at(x, y));
                CHECK(d1.at(x, y) <= d3.at(x, y));
                CHECK(e3.at(x, y) <= e1.at(x, y));
                CHECK(e3.at(x, y) == -dual.at(x, y));
            }
    }
}

// ---------------------------------------------------------------------------
// phi0 and the alpha filter
// ---------------------------------------------------------------------------

TEST_CASE("phi0_field: distance fields have near-zero log gradient") {
    synth::SynthResult body = synth::make_template(band_template(120.0, 20.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    ScalarField d0 = distance_field(samples, body.mask);
    ScalarField p0 = phi0_field(d0);

    // pixels away from the ridge and boundary: |grad| = 1, phi0 = 0
    size_t checked = 0;
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 30; x < body.mask.width() - 30; ++x) {
            if (!d0.defined(x, y)) continue;
            double d = d0.at(x, y);
            if (d < 2.0 || d > 7.0) continue;
            CHECK(std::abs(p0.at(x, y)) < 0.06);
            ++checked;
        }
    CHECK(checked > 200);
}

TEST_CASE("phi0_field: the medial ridge dips negative") {
    synth::SynthResult body = synth::make_template(band_template(120.0, 21.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    ScalarField d0 = distance_field(samples, body.mask);
    ScalarField p0 = phi0_field(d0);

    // ridge pixels: per-column delta0 maxima
    int negative = 0, ridge = 0;
    for (int x = 30; x < body.mask.width() - 30; ++x) {
        int best_y = -1;
        double best = -1.0;
        for (int y = 0; y < body.mask.height(); ++y)
            if (d0.defined(x, y) && d0.at(x, y) > best) {
                best = d0.at(x, y);
                best_y = y;
            }
        if (best_y < 0) continue;
        ++ridge;
        if (p0.at(x, best_y) < -0.2) ++negative;
    }
    CHECK(negative > ridge * 9 / 10);
}

TEST_CASE("phi0_field: step-2 stencil agrees away from ridges") {
    synth::SynthResult body = synth::make_template(band_template(100.0, 20.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    ScalarField d0 = distance_field(samples, body.mask);
    ScalarField p0 = phi0_field(d0);

    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 30; x < body.mask.width() - 30; ++x) {
            if (!d0.defined(x, y)) continue;
            bool inner = d0.defined(x - 2, y) && d0.defined(x + 2, y) &&
                         d0.defined(x, y - 2) && d0.defined(x, y + 2);
            if (!inner) continue;
            double d = d0.at(x, y);
            if (d < 2.5 || d > 7.0) continue;  // off ridge and boundary
            double gx = (d0.at(x + 2, y) - d0.at(x - 2, y)) / 4.0;
            double gy = (d0.at(x, y + 2) - d0.at(x, y - 2)) / 4.0;
            double wide = std::log(std::max(std::hypot(gx, gy), 1e-6));
            CHECK(std::abs(wide - p0.at(x, y)) < 0.1);
        }
}

TEST_CASE("alpha_filter: sentinel branches reduce to pure dilation/erosion") {
    BinaryMask mask = disk_mask(40, 19.0, 19.0, 15.0);
    ScalarField g = random_field(mask, 13);

    ScalarField plus(mask.width(), mask.height());
    ScalarField minus(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                plus.set(x, y, kCurvatureSentinel);
                minus.set(x, y, -kCurvatureSentinel);
            }

    for (int s : {1, 3}) {
        ScalarField a_plus = alpha_filter(g, plus, s);
        ScalarField a_minus = alpha_filter(g, minus, s);
        ScalarField dil = dilate(g, s), ero = erode(g, s);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x)
                if (mask.at(x, y)) {
                    CHECK(a_plus.at(x, y) == dil.at(x, y));
                    CHECK(a_minus.at(x, y) == ero.at(x, y));
                }
    }
}

TEST_CASE("alpha_filter: mixed-sign reference equals the branch oracle") {
    BinaryMask mask = disk_mask(44, 21.0, 21.0, 16.0);
    ScalarField g = random_field(mask, 21);
    ScalarField kref(mask.width(), mask.height());
    std::mt19937_64 rng(22);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y))
                kref.set(x, y,
                         (rng() & 1) ? kCurvatureSentinel : -kCurvatureSentinel);

    for (int s : {1, 2, 4}) {
        ScalarField a = alpha_filter(g, kref, s);
        ScalarField dil = dilate(g, s), ero = erode(g, s);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                if (!mask.at(x, y)) continue;
                double expect = kref.at(x, y) > 0 ? dil.at(x, y) : ero.at(x, y);
                CHECK(a.at(x, y) == expect);
                // sandwich
                CHECK(a.at(x, y) >= ero.at(x, y));
                CHECK(a.at(x, y) <= dil.at(x, y));
            }
    }
}

// ---------------------------------------------------------------------------
// curvature deformation and minimizing scale
// ---------------------------------------------------------------------------

TEST_CASE("curvature_deformation: zero log field stays at one") {
    BinaryMask mask = disk_mask(32, 15.0, 15.0, 11.0);
    ScalarField zero(mask.width(), mask.height());
    ScalarField kref(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                zero.set(x, y, 0.0);
                kref.set(x, y, kCurvatureSentinel);
            }
    ScalarField phi = curvature_deformation(zero, kref, 0);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) CHECK(phi.at(x, y) == 1.0);
}

TEST_CASE("curvature_deformation: erosion branch is non-increasing in scale") {
    BinaryMask mask = disk_mask(40, 19.0, 19.0, 15.0);
    ScalarField g = random_field(mask, 31);
    ScalarField kref(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) kref.set(x, y, -kCurvatureSentinel);

    ScalarField prev = curvature_deformation(g, kref, 0);
    for (int s = 1; s <= 4; ++s) {
        ScalarField cur = curvature_deformation(g, kref, s);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x)
                if (mask.at(x, y)) {
                    CHECK(cur.at(x, y) <= prev.at(x, y) + 1e-15);
                    CHECK(cur.at(x, y) > 0.0);
                }
        prev = cur;
    }
}

TEST_CASE("curvature_deformation: straight band stays near one off the caps") {
    synth::SynthResult body = synth::make_template(band_template(140.0, 20.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5);
    InitialFields fields = initial_fields(samples, body.mask);
    ScalarField p0 = phi0_field(fields.delta0);
    ScalarField kref = kappa_reference(samples, fields.s0, body.mask);

    for (int s : {0, 2}) {
        ScalarField phi = curvature_deformation(p0, kref, s);
        size_t checked = 0, close = 0;
        for (int y = 0; y < body.mask.height(); ++y)
            for (int x = 30; x < body.mask.width() - 30; ++x) {
                if (!phi.defined(x, y)) continue;
                double d = fields.delta0.at(x, y);
                if (d < 2.0 || d > 7.0) continue;  // off ridge/boundary
                ++checked;
                if (std::abs(phi.at(x, y) - 1.0) < 0.1) ++close;
            }
        CHECK(checked > 100);
        CHECK(close > checked * 95 / 100);
    }
}

TEST_CASE("minimizing_scale: constant stacks take scale zero, plateaus their "
          "first index") {
    BinaryMask mask(4, 1, true);
    ScaleSpace stack;
    for (int s = 0; s < 4; ++s) {
        ScalarField level(4, 1);
        double v0[] = {2.0, 2.0, 2.0, 2.0};  // constant
        double v1[] = {5.0, 3.0, 3.0, 3.0};  // decreasing then flat
        double v2[] = {5.0, 4.0, 3.0, 2.0};  // strictly decreasing
        double v3[] = {1.0, 2.0, 3.0, 4.0};  // increasing
        level.set(0, 0, v0[s]);
        level.set(1, 0, v1[s]);
        level.set(2, 0, v2[s]);
        level.set(3, 0, v3[s]);
        stack.levels.push_back(level);
    }
    ScalarField sigma = minimizing_scale(stack);
    CHECK(sigma.at(0, 0) == 0.0);
    CHECK(sigma.at(1, 0) == 1.0);
    CHECK(sigma.at(2, 0) == 3.0);
    CHECK(sigma.at(3, 0) == 0.0);
}

TEST_CASE("minimizing_scale: bent band has larger scales on the outer side") {
    const double R = 110.0;
    synth::Template tpl =
        band_template(R * std::numbers::pi / 2.0, 18.0, synth::CapStyle::Round);
    synth::SynthResult body =
        synth::bend(tpl, synth::BendProfile::constant(1.0 / R, tpl.length));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5);
    InitialFields fields = initial_fields(samples, body.mask);
    ScalarField p0 = phi0_field(fields.delta0);
    ScalarField kref = kappa_reference(samples, fields.s0, body.mask);
    ScaleSpace stack =
        curvature_stack(p0, kref, default_max_scale(fields.delta0));
    ScalarField sigma = minimizing_scale(stack);

    Vec2 center = circle_center_from_axis(body.truth);
    double radius = (body.truth.axis.front() - center).norm();

    std::vector<double> outer, inner;
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 0; x < body.mask.width(); ++x) {
            if (!sigma.defined(x, y)) continue;
            if (fields.delta0.at(x, y) < 2.0) continue;
            double dist = (Vec2{static_cast<double>(x), static_cast<double>(y)} -
                           center)
                              .norm();
            if (dist > radius + 2.0)
                outer.push_back(sigma.at(x, y));
            else if (dist < radius - 2.0)
                inner.push_back(sigma.at(x, y));
        }
    REQUIRE(outer.size() > 100);
    REQUIRE(inner.size() > 100);
    auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    CHECK(median(outer) > median(inner));
}

// ---------------------------------------------------------------------------
// reference curve and unwrap
// ---------------------------------------------------------------------------

TEST_CASE("reference_curve: straight band recovers the central axis") {
    synth::SynthResult body = synth::make_template(band_template(200.0, 22.0));
    pipeline::MorphRun run =
        pipeline::run_morph(io::image_from_mask(body.mask), body.mask);

    double axis_y = body.truth.axis.front().y;
    double rms = 0.0;
    size_t n = run.reference.points.size();
    REQUIRE(n > 10);
    for (const Vec2& p : run.reference.points)
        rms += (p.y - axis_y) * (p.y - axis_y);
    rms = std::sqrt(rms / n);
    CHECK(rms <= 1.5);

    double min_x = 1e300, max_x = -1e300;
    for (const Vec2& p : run.reference.points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
    }
    double span = body.truth.axis.back().x - body.truth.axis.front().x;
    CHECK((max_x - min_x) / span > 0.8);
}

TEST_CASE("reference_curve: quarter-circle band recovers the mid-radius arc") {
    const double R = 120.0;
    synth::Template tpl =
        band_template(R * std::numbers::pi / 2.0, 20.0, synth::CapStyle::Round);
    synth::SynthResult body =
        synth::bend(tpl, synth::BendProfile::constant(1.0 / R, tpl.length));
    pipeline::MorphRun run =
        pipeline::run_morph(io::image_from_mask(body.mask), body.mask);

    Vec2 center = circle_center_from_axis(body.truth);
    double radius = ((body.truth.axis.front() - center).norm() +
                     (body.truth.axis.back() - center).norm()) /
                    2.0;
    double rms = 0.0;
    for (const Vec2& p : run.reference.points) {
        double d = (p - center).norm() - radius;
        rms += d * d;
    }
    rms = std::sqrt(rms / run.reference.points.size());
    CHECK(rms <= 2.0);
}

TEST_CASE("reference_curve: zero threshold flags a degenerate extraction") {
    synth::SynthResult body = synth::make_template(band_template(120.0, 18.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5);
    InitialFields fields = initial_fields(samples, body.mask);
    ScalarField p0 = phi0_field(fields.delta0);
    ScalarField kref = kappa_reference(samples, fields.s0, body.mask);
    ScaleSpace stack = curvature_stack(p0, kref, 3);
    ScalarField pmin = stack_minimum(stack);

    ReferenceCurve ref =
        reference_curve(pmin, 0.0, body.mask, fields.delta0, fields.s0);
    CHECK(ref.disconnected);
    CHECK(ref.points.empty());
}

TEST_CASE("reference_curve: extracted pixels are extreme in |phi_min - 1|") {
    synth::SynthResult body = synth::make_template(band_template(160.0, 20.0));
    pipeline::MorphRun run =
        pipeline::run_morph(io::image_from_mask(body.mask), body.mask);

    std::vector<double> devs;
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 0; x < body.mask.width(); ++x)
            if (run.phi_min.defined(x, y))
                devs.push_back(std::abs(run.phi_min.at(x, y) - 1.0));
    std::sort(devs.begin(), devs.end());
    double p80 = devs[static_cast<size_t>(0.80 * (devs.size() - 1))];

    size_t extreme = 0, counted = 0;
    for (const Vec2& p : run.reference.points) {
        int x = static_cast<int>(std::lround(p.x));
        int y = static_cast<int>(std::lround(p.y));
        if (!run.phi_min.defined(x, y)) continue;
        ++counted;
        if (std::abs(run.phi_min.at(x, y) - 1.0) >= p80) ++extreme;
    }
    REQUIRE(counted > 20);
    CHECK(extreme >= counted * 8 / 10);
}

TEST_CASE("offset identities hold on straight bands") {
    synth::SynthResult body = synth::make_template(band_template(150.0, 22.0));
    Contour contour = geom::extract_contour(body.mask);
    CurveSamples samples = sample_contour(contour, 0.5, false);
    ScalarField d0 = distance_field(samples, body.mask);

    const int r = 3;
    ScalarField dil = dilate(d0, r);
    const double half = 11.0;
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 30; x < body.mask.width() - 30; ++x) {
            if (!d0.defined(x, y)) continue;
            if (d0.at(x, y) + r > half - 1.0) continue;  // ridge interference
            CHECK(std::abs(dil.at(x, y) - (d0.at(x, y) + r)) <= 0.51);
        }

    // footpoint analog against the straight axis: level sets are parallel
    CurveSamples axis;
    double x0 = body.truth.axis.front().x;
    double y_axis = body.truth.axis.front().y;
    for (double s = 0.0; s <= body.truth.axis_length; s += 0.5) {
        axis.points.push_back({x0 + s, y_axis});
        axis.arc.push_back(s);
    }
    ScalarField s0 = footpoint_field(axis, body.mask);
    ScalarField s_dil = dilate(s0, r);
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 30; x < body.mask.width() - 30; ++x) {
            if (!s0.defined(x, y)) continue;
            CHECK(std::abs(s_dil.at(x, y) - (s0.at(x, y) + r)) <= 0.51);
        }
}

TEST_CASE("unwrap_image: straight band is a fixed point up to IoU 0.95") {
    synth::SynthResult body = synth::make_template(band_template(180.0, 22.0));
    pipeline::MorphRun run =
        pipeline::run_morph(io::image_from_mask(body.mask), body.mask);
    CHECK(pipeline::best_iou(run.unwrapped.mask, body.mask, 20) >= 0.95);
}

TEST_CASE("unwrap_image: bent band width profile matches the template") {
    const double R = 130.0;
    synth::Template tpl =
        band_template(R * std::numbers::pi / 2.0, 24.0, synth::CapStyle::Round);
    synth::SynthResult body =
        synth::bend(tpl, synth::BendProfile::constant(1.0 / R, tpl.length));
    pipeline::MorphRun run =
        pipeline::run_morph(io::image_from_mask(body.mask), body.mask);

    Profile truth = pipeline::template_truth_profile(tpl);
    double err = pipeline::profile_mean_abs_rel_diff(truth, run.unwrapped.profile);
    CHECK(err <= 0.03);
}

TEST_CASE("unwrap_image: mean intensity is conserved within 2%") {
    synth::SynthResult body = synth::make_template(band_template(160.0, 20.0));
    Image8 image(body.mask.width(), body.mask.height(), 0);
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 0; x < body.mask.width(); ++x)
            if (body.mask.at(x, y))
                image.set(x, y, static_cast<uint8_t>(60 + (x * 7 + y * 13) % 120));

    pipeline::MorphRun run = pipeline::run_morph(image, body.mask);

    double in_mean = 0.0;
    size_t in_n = 0;
    for (int y = 0; y < body.mask.height(); ++y)
        for (int x = 0; x < body.mask.width(); ++x)
            if (body.mask.at(x, y)) {
                in_mean += image.at(x, y);
                ++in_n;
            }
    in_mean /= in_n;

    double out_mean = 0.0;
    size_t out_n = 0;
    for (int y = 0; y < run.unwrapped.mask.height(); ++y)
        for (int x = 0; x < run.unwrapped.mask.width(); ++x)
            if (run.unwrapped.mask.at(x, y)) {
                out_mean += run.unwrapped.image.at(x, y);
                ++out_n;
            }
    out_mean /= out_n;
    CHECK(std::abs(out_mean - in_mean) / in_mean <= 0.02);
}
