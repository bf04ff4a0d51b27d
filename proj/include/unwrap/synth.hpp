/**
 * @file synth.hpp
 * @brief Forward deformation oracle: straight body templates, Frenet-frame
 *        bending with known ground truth, and boundary noise.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "unwrap/types.hpp"

namespace unwrap::synth {

enum class CapStyle { Round, Flat, Taper };

/// Undeformed slender body: axis along x, symmetric width profile.
struct Template {
    double length = 0.0;                 ///< axis length L in pixels
    std::vector<double> width_profile;   ///< lambda at stations 0..L (pre-cap)
    CapStyle cap_style = CapStyle::Round;

    /// Width at axis position x after cap shaping; 0 outside [0, L].
    double width_at(double x) const;
};

/// Curvature program kappa(s), piecewise linear between knots.
struct BendProfile {
    std::vector<double> knot_s;      ///< strictly increasing, first 0, last >= L
    std::vector<double> knot_kappa;  ///< 1/pixels at each knot

    static BendProfile constant(double kappa, double length);
    static BendProfile linear(double kappa0, double kappa1, double length);

    double kappa_at(double s) const;
    double max_abs_kappa(double length) const;
};

/// Known truth recorded next to every generated mask.
struct GroundTruth {
    std::vector<Vec2> axis;                      ///< mu(s) at unit stations
    std::vector<double> lambda;                  ///< width at those stations
    std::vector<std::pair<Vec2, Vec2>> sections; ///< endpoints per station
    double axis_length = 0.0;
};

struct SynthResult {
    BinaryMask mask;
    GroundTruth truth;
};

/// Builds the straight template mask with the requested cap shaping.
/// Throws InvalidProfileError when the Template invariants fail.
SynthResult make_template(const Template& tpl, int margin = 8);

/// Bends the template by integrating the unit-speed planar frame from
/// kappa(s) (RK4, 0.25 px steps) and sweeping each cross section.
/// Throws SelfOverlapError when |kappa| * lambda/2 exceeds 0.8 anywhere or
/// distant sections collide in the raster.
SynthResult bend(const Template& tpl, const BendProfile& profile,
                 int margin = 8);

/// Perturbs the mask boundary along local normals with smooth zero-mean
/// noise of the given amplitude (std, pixels), then re-rasterizes.
BinaryMask add_boundary_noise(const BinaryMask& mask, double amplitude,
                              uint64_t seed);

/// Scanline even-odd fill of a closed polygon onto a fresh mask of the
/// given size.
BinaryMask rasterize_polygon(const std::vector<Vec2>& polygon, int width,
                             int height);

}  // namespace unwrap::synth
