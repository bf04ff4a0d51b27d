/**
 * @file morph.hpp
 * @brief Morphological inversion of the deformation PDEs: distance and
 *        footpoint fields, flat-disk dilation/erosion scale spaces, the
 *        curvature-selected sup/inf filter, minimizing-scale images,
 *        reference-curve extraction and image re-registration.
 */
#pragma once

#include <optional>
#include <vector>

#include "unwrap/geometry.hpp"
#include "unwrap/types.hpp"

namespace unwrap::morph {

/// Curve discretization used as the target of distance/footpoint queries.
struct CurveSamples {
    std::vector<Vec2> points;
    std::vector<double> arc;          ///< arc-length parameter per sample
    std::vector<double> curvature;    ///< optional, aligned with points
};

/// Resamples a contour at the given spacing and carries per-sample signed
/// curvature from sliding local fits.
CurveSamples sample_contour(const Contour& contour, double spacing = 0.5,
                            bool with_curvature = true);

/// delta_0: Euclidean distance from each interior pixel to the nearest
/// curve sample. Exact minimum over all samples.
ScalarField distance_field(const CurveSamples& curve, const BinaryMask& mask);

/// s_0: arc-length parameter of the nearest curve sample; ties take the
/// smaller parameter.
ScalarField footpoint_field(const CurveSamples& curve, const BinaryMask& mask);

/// Both fields from one nearest-sample query.
struct InitialFields {
    ScalarField delta0;
    ScalarField s0;
};
InitialFields initial_fields(const CurveSamples& curve, const BinaryMask& mask);

/// Flat-disk dilation: pointwise sup over {(dx,dy): dx^2+dy^2 <= r^2}
/// intersected with the mask interior.
ScalarField dilate(const ScalarField& f, int radius);

/// Flat-disk erosion: pointwise inf over the same kernel.
ScalarField erode(const ScalarField& f, int radius);

/// ln ||grad f|| with the gradient magnitude clamped to [1e-6, inf);
/// central differences, one-sided at the mask boundary.
ScalarField phi0_field(const ScalarField& delta0);

/// Gradient magnitude with the same stencil, unclamped.
ScalarField gradient_magnitude(const ScalarField& f);

/// kappa_phi reference image: -sgn(c(s0(x,y))) * sentinel. Zero curvature
/// takes the dilation branch (+sentinel).
ScalarField kappa_reference(const CurveSamples& curve, const ScalarField& s0,
                            const BinaryMask& mask);

/// alpha[g](s) = sup( erode(g,s), inf( dilate(g,s), kref ) ).
ScalarField alpha_filter(const ScalarField& g, const ScalarField& kref,
                         int scale);

/// Curvature deformation at one scale: exp(alpha[phi0](s)).
ScalarField curvature_deformation(const ScalarField& phi0,
                                  const ScalarField& kref, int scale);

/// Stack of curvature deformations for s = 0..max_scale.
ScaleSpace curvature_stack(const ScalarField& phi0, const ScalarField& kref,
                           int max_scale);

/// sigma(x,y): first scale attaining the stack minimum at each pixel.
ScalarField minimizing_scale(const ScaleSpace& stack);

/// Pointwise minimum over the stack.
ScalarField stack_minimum(const ScaleSpace& stack);

/// Ordered reference curve extracted from the minimized curvature
/// deformation image: pixels in the extreme tail of the |phi-1|
/// distribution, largest component thinned to one pixel width, ordered,
/// snapped to the delta0 ridge and extended along it.
struct ReferenceCurve {
    std::vector<Vec2> points;   ///< ordered, sub-pixel
    bool disconnected = false;  ///< more than one major component found
};
ReferenceCurve reference_curve(const ScalarField& phi_min, double quantile,
                               const BinaryMask& mask, const ScalarField& delta0,
                               const ScalarField& s0);

/// Straightened image and mask produced by re-registration against the
/// reference curve.
struct UnwrappedImage {
    Image8 image;
    BinaryMask mask;
    Profile profile;            ///< half widths per unit station
    double station_origin = 0.0;
};

struct UnwrapOptions {
    /// Advance stations by the per-pixel minimizing scale through a
    /// footpoint dilation. The length offset it models is ignorable, so it
    /// stays off by default.
    bool apply_scale_advance = false;
};

UnwrappedImage unwrap_image(const Image8& image, const BinaryMask& mask,
                            const ReferenceCurve& reference,
                            const ScalarField& delta0,
                            const ScalarField* sigma = nullptr,
                            const UnwrapOptions& options = {});

/// Default stack depth: twice the maximum interior distance, rounded up.
int default_max_scale(const ScalarField& delta0);

}  // namespace unwrap::morph
