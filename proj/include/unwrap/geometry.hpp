/**
 * @file geometry.hpp
 * @brief Contour extraction and conditioning, arc-length polynomial curve
 *        fitting and differential-geometry evaluation.
 */
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "unwrap/types.hpp"

namespace unwrap::geom {

/// Polynomial curve pair x(s), y(s) over an arc-length domain.
/// Coefficients are stored over the rescaled parameter u = (s - s_begin) / L
/// so that high degrees stay well conditioned at pixel scales.
struct PolyCurve2D {
    int degree = 0;
    std::vector<double> coeffs_x;  ///< a_0..a_N over u
    std::vector<double> coeffs_y;  ///< b_0..b_N over u
    double s_begin = 0.0;
    double s_end = 0.0;

    double length() const { return s_end - s_begin; }

    Vec2 eval(double s) const;
    Vec2 derivative(double s) const;         ///< d/ds
    Vec2 second_derivative(double s) const;  ///< d^2/ds^2
};

/// Curve frame at one arc-length position.
struct FrameSample {
    double s = 0.0;
    Vec2 position;
    Vec2 tangent;    ///< unit
    Vec2 normal;     ///< unit, tangent rotated +90 degrees
    double curvature = 0.0;  ///< 1/pixels, signed
};

struct FitInfo {
    double rms = 0.0;       ///< sqrt(mean ||r_i - r(s_i)||^2)
    double max_error = 0.0;
    double condition = 0.0; ///< singular value ratio of the design matrix
};

struct DegreeChoice {
    int degree = 0;
    bool capped = false;  ///< true when the tolerance was never reached
    PolyCurve2D curve;
    FitInfo info;
};

// ---------------------------------------------------------------------------
// Mask utilities
// ---------------------------------------------------------------------------

/// Labels 8-connected foreground components; returns sizes, largest first.
std::vector<size_t> component_sizes(const BinaryMask& mask);

/// Keeps only the largest 8-connected component.
BinaryMask largest_component(const BinaryMask& mask);

/// Fills enclosed background holes up to the given pixel count.
BinaryMask fill_small_holes(const BinaryMask& mask, size_t max_hole = 16);

/// Grows the canvas so the foreground is at least `margin` pixels from
/// every border. No-op when already satisfied.
BinaryMask pad_to_margin(const BinaryMask& mask, int margin = 2);

// ---------------------------------------------------------------------------
// Contour operations
// ---------------------------------------------------------------------------

/// Traces the closed outer boundary of the single foreground component
/// (Moore neighborhood), conditions it and orders it counter-clockwise
/// (positive shoelace area in (x, y) coordinates).
/// Throws EmptyMaskError / MultipleComponentsError.
Contour extract_contour(const BinaryMask& mask);

/// Repairs a raw closed 8-connected chain: drops duplicates and spurs,
/// deletes compact right-angle corner pixels, rebuilds arc lengths.
/// Throws UnrepairableError when the chain self-intersects irreducibly.
Contour condition_contour(const std::vector<Vec2>& raw);

/// True when every chain point is 8-adjacent to exactly its two sequence
/// neighbors and no pixel repeats.
bool audit_two_neighbor_rule(const Contour& contour);

/// Shoelace area; positive for the orientation extract_contour produces.
double signed_area(const std::vector<Vec2>& points);

// ---------------------------------------------------------------------------
// Curve fitting
// ---------------------------------------------------------------------------

/// Least-squares polynomial fit of an ordered point sequence against
/// strictly increasing arc-length values.
/// Throws IllConditionedError when the design matrix is numerically rank
/// deficient (condition number above 1e10).
PolyCurve2D fit_polycurve(std::span<const Vec2> points,
                          std::span<const double> arc_lengths, int degree,
                          FitInfo* info = nullptr);

/// Smallest degree in [3, 12] whose fit RMS is at or below `rms_limit`;
/// returns 12 with `capped` set when the tolerance is never reached.
DegreeChoice choose_degree(std::span<const Vec2> points,
                           std::span<const double> arc_lengths,
                           double rms_limit = 0.5);

/// Tangent, normal and curvature of the fitted curve at arc length s.
/// Throws SingularSpeedError when the speed vanishes.
FrameSample frame_at(const PolyCurve2D& curve, double s);

/// Signed curvature at every contour point from sliding local polynomial
/// fits of the given degree over +/- `half_window` pixels of arc.
std::vector<double> contour_curvature(const Contour& contour,
                                      double half_window = 10.0,
                                      int degree = 5);

// ---------------------------------------------------------------------------
// Polyline helpers
// ---------------------------------------------------------------------------

/// Resamples a polyline (closed or open) at the given spacing; returns the
/// sampled points and their arc-length parameters.
struct SampledCurve {
    std::vector<Vec2> points;
    std::vector<double> arc;
};
SampledCurve resample_polyline(const std::vector<Vec2>& points, double spacing,
                               bool closed);

/// Moving-average smoothing of an open point chain (window is full width,
/// forced odd; ends keep shrinking windows).
std::vector<Vec2> smooth_chain(const std::vector<Vec2>& points, int window);

}  // namespace unwrap::geom
