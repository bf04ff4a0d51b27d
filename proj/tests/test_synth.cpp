/**
 * @file test_synth.cpp
 * @brief Forward deformation oracle checks.
 */
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "unwrap/errors.hpp"
#include "unwrap/geometry.hpp"
#include "unwrap/synth.hpp"

using namespace unwrap;
using namespace unwrap::synth;

namespace {

Template constant_template(double length, double width, CapStyle cap) {
    Template t;
    t.length = length;
    t.width_profile.assign(static_cast<size_t>(length) + 1, width);
    t.cap_style = cap;
    return t;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
    size_t inter = 0, uni = 0;
    int w = std::max(a.width(), b.width());
    int h = std::max(a.height(), b.height());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool av = a.at(x, y), bv = b.at(x, y);
            inter += av && bv;
            uni += av || bv;
        }
    return static_cast<double>(inter) / uni;
}

}  // namespace

TEST_CASE("make_template: flat-cap rectangle area close to L*lambda") {
    Template t = constant_template(200.0, 20.0, CapStyle::Flat);
    SynthResult r = make_template(t);
    double area = static_cast<double>(r.mask.count());
    CHECK(std::abs(area - 4000.0) / 4000.0 < 0.05);
}

TEST_CASE("make_template: area equals the pixel-count oracle") {
    Template t = constant_template(150.0, 18.0, CapStyle::Round);
    SynthResult r = make_template(t);
    size_t count = 0;
    for (int y = 0; y < r.mask.height(); ++y)
        for (int x = 0; x < r.mask.width(); ++x)
            if (r.mask.at(x, y)) ++count;
    CHECK(count == r.mask.count());
    CHECK(count > 0);
}

TEST_CASE("make_template: tapered width profile is monotone") {
    Template t;
    t.length = 200.0;
    t.width_profile.resize(201);
    for (int i = 0; i <= 200; ++i)
        t.width_profile[i] = 20.0 * (1.0 - i / 200.0) + 5.0 * (i / 200.0);
    t.cap_style = CapStyle::Flat;
    SynthResult r = make_template(t);

    // column widths away from the ends must not increase
    int prev = 1 << 20;
    int x0 = 0;
    while (x0 < r.mask.width() && !r.mask.at(x0, r.mask.height() / 2)) ++x0;
    for (int x = x0 + 2; x < r.mask.width() - 2; ++x) {
        int width = 0;
        for (int y = 0; y < r.mask.height(); ++y)
            if (r.mask.at(x, y)) ++width;
        if (width == 0) break;
        CHECK(width <= prev + 1);
        prev = width;
    }
}

TEST_CASE("make_template: invariants enforced") {
    Template bad = constant_template(30.0, 15.0, CapStyle::Flat);  // not slender
    CHECK_THROWS_AS(make_template(bad), InvalidProfileError);

    Template zero = constant_template(100.0, 10.0, CapStyle::Flat);
    zero.width_profile[50] = 0.0;
    CHECK_THROWS_AS(make_template(zero), InvalidProfileError);
}

TEST_CASE("bend: zero curvature reproduces the template mask") {
    Template t = constant_template(200.0, 20.0, CapStyle::Round);
    SynthResult straight = make_template(t);
    SynthResult bent = bend(t, BendProfile::constant(0.0, t.length));
    CHECK(iou(straight.mask, bent.mask) >= 0.99);
}

TEST_CASE("bend: quarter circle matches the annulus-sector area") {
    // oracle: area of an annulus sector with radii R -/+ lambda/2 over pi/2
    const double R = 120.0;
    const double lambda = 20.0;
    Template t = constant_template(R * std::numbers::pi / 2.0, lambda,
                                   CapStyle::Flat);
    SynthResult r = bend(t, BendProfile::constant(1.0 / R, t.length));
    double r_in = R - lambda / 2.0, r_out = R + lambda / 2.0;
    double expected = std::numbers::pi / 4.0 * (r_out * r_out - r_in * r_in);
    double area = static_cast<double>(r.mask.count());
    CHECK(std::abs(area - expected) / expected < 0.03);
}

TEST_CASE("bend: over-bent template raises SelfOverlap") {
    Template t = constant_template(200.0, 20.0, CapStyle::Flat);
    // |kappa| * lambda/2 = 0.9
    CHECK_THROWS_AS(bend(t, BendProfile::constant(0.09, t.length)),
                    SelfOverlapError);
}

TEST_CASE("bend: ground truth lengths are consistent") {
    Template t = constant_template(250.0, 24.0, CapStyle::Round);
    SynthResult r = bend(t, BendProfile::linear(-0.006, 0.006, t.length));
    CHECK(std::abs(r.truth.axis_length - t.length) / t.length < 0.01);
    for (size_t i = 0; i < r.truth.lambda.size(); ++i) {
        double s = static_cast<double>(i);
        CHECK(r.truth.lambda[i] ==
              doctest::Approx(t.width_at(s)).epsilon(1e-12));
    }
}

TEST_CASE("add_boundary_noise: amplitude zero is the identity") {
    Template t = constant_template(150.0, 18.0, CapStyle::Round);
    SynthResult r = make_template(t);
    BinaryMask noisy = add_boundary_noise(r.mask, 0.0, 42);
    CHECK(noisy == r.mask);
}

TEST_CASE("add_boundary_noise: area change stays below 1%") {
    Template t = constant_template(220.0, 24.0, CapStyle::Round);
    SynthResult r = make_template(t);
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        BinaryMask noisy = add_boundary_noise(r.mask, 1.0, seed);
        double a0 = static_cast<double>(r.mask.count());
        double a1 = static_cast<double>(noisy.count());
        CHECK(std::abs(a1 - a0) / a0 < 0.01);
    }
}

TEST_CASE("add_boundary_noise: measured offset has near-zero mean") {
    Template t = constant_template(220.0, 24.0, CapStyle::Round);
    SynthResult r = make_template(t);
    Contour base = geom::extract_contour(r.mask);
    // area change divided by perimeter estimates the mean signed offset
    double perimeter = base.total_length();
    double a0 = static_cast<double>(r.mask.count());
    for (uint64_t seed = 0; seed < 10; ++seed) {
        BinaryMask noisy = add_boundary_noise(r.mask, 1.0, seed);
        double a1 = static_cast<double>(noisy.count());
        double mean_offset = (a1 - a0) / perimeter;
        CHECK(std::abs(mean_offset) < 0.1);
    }
}

TEST_CASE("add_boundary_noise: identical seeds give identical masks") {
    Template t = constant_template(180.0, 20.0, CapStyle::Taper);
    SynthResult r = make_template(t);
    BinaryMask a = add_boundary_noise(r.mask, 1.5, 777);
    BinaryMask b = add_boundary_noise(r.mask, 1.5, 777);
    CHECK(a == b);
}
