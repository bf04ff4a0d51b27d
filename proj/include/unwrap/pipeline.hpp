/**
 * @file pipeline.hpp
 * @brief End-to-end runs behind the CLI subcommands: unwrapping by both
 *        methods, synthesis, training/classification and reporting.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "unwrap/classify.hpp"
#include "unwrap/morph.hpp"
#include "unwrap/neutral.hpp"
#include "unwrap/synth.hpp"
#include "unwrap/types.hpp"

namespace unwrap::pipeline {

using Json = nlohmann::json;

struct NeutralOptions {
    double tail_window_fraction = 0.05;
    double k_window_fraction = 0.05;   ///< "say 5% of the whole contour length"
    double sparse_spacing = 3.0;
    double dense_spacing = 1.0;
    int midpoint_smooth_window = 7;
    int lambda_smooth_window = 3;
};

struct NeutralRun {
    Contour contour;
    neutral::Landmarks landmarks;
    std::vector<neutral::CrossSection> sections;
    neutral::NeutralLine line;
    neutral::StraightenedShape shape;
    Profile profile;
    int skipped_sections = 0;
};

/// Mask in, straightened profile out (method 1).
NeutralRun run_neutral(const BinaryMask& mask, const NeutralOptions& options = {});

struct MorphOptions {
    double contour_spacing = 0.5;
    double reference_quantile = 0.02;
    /// Stack depth for the extraction field; small scales keep the valley
    /// of the minimized deformation localized. -1 selects the default.
    int extraction_max_scale = 3;
    bool apply_scale_advance = false;
};

struct MorphRun {
    Contour contour;
    ScalarField delta0;
    ScalarField s0;
    ScalarField phi_min;
    ScalarField sigma;
    morph::ReferenceCurve reference;
    morph::UnwrappedImage unwrapped;
};

/// Image + mask in, re-registered image out (method 2).
MorphRun run_morph(const Image8& image, const BinaryMask& mask,
                   const MorphOptions& options = {});

// ---------------------------------------------------------------------------
// Ensembles and reports on disk
// ---------------------------------------------------------------------------

Json ensemble_to_json(const classify::Ensemble& ensemble);
classify::Ensemble ensemble_from_json(const Json& j);

void save_json(const Json& j, const std::string& path);
Json load_json(const std::string& path);

/// Table-2-style aggregation over many random train/test splits.
struct SplitProtocolResult {
    double mean_test_accuracy = 0.0;
    double min_test_accuracy = 1.0;
    double splits_reaching_target = 0.0;  ///< fraction of splits
    double mean_epochs = 0.0;
    Json table;  ///< per-family zero-error / one-error percentages
};

SplitProtocolResult run_split_protocol(
    const std::vector<classify::LabeledCurve>& samples, int splits,
    uint64_t seed, const classify::TuneOptions& tune_options = {});

/// Rasterizes a straightened profile into a centered mask for IoU checks.
BinaryMask mask_from_profile(const Profile& profile, int margin = 4);

/// Intersection over union after the best integer translation in x and y.
double best_iou(const BinaryMask& a, const BinaryMask& b, int search = 24);

/// Mean absolute width difference between two profiles after least-squares
/// alignment, relative to the mean width of the first.
double profile_mean_abs_rel_diff(const Profile& a, const Profile& b);

/// Width profile of a synth template (cap shaping applied), half-width per
/// unit station.
Profile template_truth_profile(const synth::Template& tpl);

/// The fixed template library used by the round-trip evaluation.
std::vector<synth::Template> roundtrip_templates(int count);

/// Deterministic bend programs for one template.
std::vector<synth::BendProfile> roundtrip_bends(const synth::Template& tpl,
                                                int count, uint64_t seed);

/// Full round-trip evaluation: synthesize bends of each template with
/// boundary noise, unwrap by both methods, and aggregate the consistency
/// measures, IoU/width errors and cross-method agreement into a report.
Json run_roundtrip_protocol(int templates, int bends_per_template, double noise,
                            uint64_t seed, int threads = 1);

}  // namespace unwrap::pipeline
