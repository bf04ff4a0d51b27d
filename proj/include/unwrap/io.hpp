/**
 * @file io.hpp
 * @brief File formats (PGM, PNG, CSV, SVG, 16-bit field dumps) and the
 *        histogram-threshold segmentation helper.
 */
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unwrap/neutral.hpp"
#include "unwrap/types.hpp"

namespace unwrap::io {

// ---------------------------------------------------------------------------
// Images and masks
// ---------------------------------------------------------------------------

/// Reads P2/P5 PGM (8 or 16 bit; 16-bit values are scaled down to 8).
Image8 read_pgm(const std::string& path);
void write_pgm(const Image8& image, const std::string& path, bool binary = true);

/// Grayscale PNG (any 8-bit color type is converted to gray on read).
Image8 read_png(const std::string& path);
void write_png(const Image8& image, const std::string& path);

/// Reads a mask from PGM or PNG by extension; thresholds grays at 128.
BinaryMask read_mask(const std::string& path);
void write_mask(const BinaryMask& mask, const std::string& path);

/// Grayscale image from PGM or PNG by extension.
Image8 read_image_any(const std::string& path);

Image8 image_from_mask(const BinaryMask& mask);
BinaryMask mask_from_image(const Image8& image, int threshold = 128);

/// 16-bit PGM scaled to the field range, with "<path>.minmax.txt" recording
/// the original min and max.
void write_field_pgm16(const ScalarField& field, const std::string& path);

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Contour CSV, header "x,y,s", one point per row in traversal order.
void write_contour_csv(const Contour& contour, const std::string& path);
Contour read_contour_csv(const std::string& path);

/// Profile CSV, header "lambda_x,half_width".
void write_profile_csv(const Profile& profile, const std::string& path);
Profile read_profile_csv(const std::string& path);

// ---------------------------------------------------------------------------
// SVG overlay
// ---------------------------------------------------------------------------

struct SvgOverlay {
    const Contour* contour = nullptr;
    const std::vector<neutral::CrossSection>* sections = nullptr;
    const std::vector<Vec2>* neutral_line = nullptr;
    const std::vector<Vec2>* reference = nullptr;
};
void write_svg(const SvgOverlay& overlay, int width, int height,
               const std::string& path);

// ---------------------------------------------------------------------------
// Segmentation helper
// ---------------------------------------------------------------------------

struct SegmentResult {
    BinaryMask mask;
    int threshold = 0;
    bool fallback = false;  ///< unimodal histogram, median threshold used
};

/// Thresholds at the first local minimum below the background mode of the
/// 5-bin-smoothed histogram; foreground is the darker side. Falls back to
/// the median when the histogram has no turning point. Applies radius-1
/// open/close cleanup, keeps the largest component and pads borders.
SegmentResult segment_threshold(const Image8& image);

/// Radius-1 binary open then close (4-neighborhood disk).
BinaryMask clean_mask(const BinaryMask& mask);

}  // namespace unwrap::io
