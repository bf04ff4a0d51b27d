/**
 * @file neutral.hpp
 * @brief Neutral-line unwrapping: landmark detection, contour splitting,
 *        cross-section matching through the angle condition, and
 *        straightening.
 */
#pragma once

#include <vector>

#include "unwrap/geometry.hpp"
#include "unwrap/types.hpp"

namespace unwrap::neutral {

struct Landmarks {
    int tail_index = -1;
    int head_index = -1;
    bool low_confidence = false;  ///< no acute tail found, best effort
};

/// Matched boundary point pair with its midpoint.
struct CrossSection {
    Vec2 p_i;        ///< point on part I
    Vec2 p_ii;       ///< point on part II
    Vec2 midpoint;   ///< (p_i + p_ii) / 2
    double lambda = 0.0;     ///< ||p_i - p_ii||
    double delta_phi = 0.0;  ///< |phi_I + phi_II - pi| at the match
    int dense_index = 0;     ///< matched sample index on part II
};

struct NeutralLine {
    std::vector<Vec2> midpoints;
    std::vector<double> cumulative_length;
};

struct StraightenedShape {
    std::vector<double> stations;     ///< Lambda_i, stations[0] = 0
    std::vector<double> half_widths;  ///< lambda_i / 2
};

/// Contour index where least-squares line fits over `window` arc pixels on
/// each side form the most acute angle. Ties take the lowest index.
int detect_tail(const Contour& contour, double window);

/// Max-|curvature| contour index whose arc distance from the tail lies in
/// [0.4, 0.6] of the total length; curvature from local quintic fits.
int detect_head(const Contour& contour, int tail);

Landmarks detect_landmarks(const Contour& contour, double tail_window_fraction = 0.05);

/// The two open arcs between tail and head, polynomial-fitted, with part II
/// sampled densely and part I sparsely.
struct SplitParts {
    geom::PolyCurve2D curve_i;
    geom::PolyCurve2D curve_ii;
    std::vector<geom::FrameSample> samples_i;   ///< sparse
    std::vector<geom::FrameSample> samples_ii;  ///< dense
    bool degree_capped_i = false;
    bool degree_capped_ii = false;
};
SplitParts split_contour(const Contour& contour, int tail, int head,
                         double sparse_spacing = 3.0, double dense_spacing = 1.0);

struct SectionSearchResult {
    std::vector<CrossSection> sections;
    int skipped = 0;  ///< sparse points with no interior candidate
};

/// Walks part I away from the tail; for each sparse point searches the next
/// K dense candidates on part II past the previous match, keeps chords that
/// stay inside the body, and picks the one minimizing
/// |phi_I + phi_II - pi|. Matching is monotone by construction.
SectionSearchResult find_cross_sections(const SplitParts& parts,
                                        const BinaryMask& mask,
                                        double k_window_fraction,
                                        double contour_length);

/// Locus of section midpoints with cumulative chord lengths.
/// Throws TooFewSectionsError for fewer than two sections.
NeutralLine build_neutral_line(const std::vector<CrossSection>& sections);

/// Stations spaced like the midpoints, half widths lambda/2.
StraightenedShape straighten(const NeutralLine& neutral,
                             const std::vector<CrossSection>& sections);

/// Replaces midpoints by a moving average before accumulation; section
/// lambda values get a light smoothing as well. Pipeline-level cleanup of
/// candidate quantization, the section contract itself is untouched.
std::vector<CrossSection> smooth_sections(const std::vector<CrossSection>& sections,
                                          int midpoint_window = 5,
                                          int lambda_window = 3);

/// Unit-station resampling of the straightened outline; adds the half-pixel
/// boundary offset so widths refer to pixel edges rather than centers.
Profile profile_from_shape(const StraightenedShape& shape,
                           double boundary_offset = 0.5);

}  // namespace unwrap::neutral
