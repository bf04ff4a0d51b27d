/**
 * @file classify.hpp
 * @brief Prototype-curve classification of straightened contours: alignment
 *        by axial translation, group means, weighted tuning on training
 *        mistakes, minimum-distance assignment and consistency metrics.
 */
#pragma once

#include <string>
#include <vector>

#include "unwrap/neutral.hpp"
#include "unwrap/types.hpp"

namespace unwrap::classify {

/// Half-width samples at unit arc-length stations. A curve of length L has
/// L+1 samples (stations 0..L inclusive).
struct ProfileCurve {
    std::vector<double> samples;

    int length() const { return static_cast<int>(samples.size()) - 1; }
};

struct GroupModel {
    ProfileCurve representative;
    double effective_count = 0.0;  ///< N_k
    std::string label;
};

struct Ensemble {
    std::vector<GroupModel> models;
    int generation = 1;
};

struct AlignResult {
    int translation = 0;   ///< d, stations
    double distance = 0.0; ///< summed squared residual over the query support
};

/// Exhaustive integer translation d in [0, L_ref - L_c] minimizing
/// sum_s (c(s) - ref(s+d))^2. Ties take the smallest d.
/// Throws RefTooShortError when the reference is shorter than the query.
AlignResult align(const ProfileCurve& c, const ProfileCurve& ref);

/// Anchor = longest member; each member aligned to it; per-station mean over
/// the members covering that station.
GroupModel group_mean(const std::vector<ProfileCurve>& members,
                      const std::string& label);

struct LabeledCurve {
    ProfileCurve curve;
    std::string label;
};

struct Assignment {
    std::string label;
    std::vector<double> distances;  ///< one per model, model order
};

/// Minimum aligned distance over the ensemble. When a representative is
/// shorter than the query the roles swap and the sum runs over the shorter
/// support. Ties take the lexicographically smallest label.
Assignment assign(const ProfileCurve& c, const Ensemble& ensemble);

struct TuneOptions {
    double target_rate = 0.98;
    int max_epochs = 50;
    /// Use the paper's literal correct-group denominator (N - beta) instead
    /// of the reinforcing (N + beta).
    bool paper_literal_right_update = false;
};

struct TuneResult {
    Ensemble ensemble;
    double training_rate = 0.0;
    int epochs = 0;
    bool reached_target = false;
    int degenerate_skips = 0;  ///< wrong-model updates skipped (N - beta <= 0.1)
};

/// Epoch loop: classify the training set; for each mistake push the wrong
/// representative away from the sample and pull the right one toward it,
/// both weighted by beta = exp(-mean squared aligned distance).
TuneResult tune(const Ensemble& start, const std::vector<LabeledCurve>& training,
                const TuneOptions& options = {});

/// beta weight for a sample aligned to a model at translation d.
double correction_weight(const ProfileCurve& model, const ProfileCurve& sample,
                         int translation);

// ---------------------------------------------------------------------------
// Consistency metrics (a1..a5)
// ---------------------------------------------------------------------------

struct ConsistencyReport {
    /// Signed percent deviations from the across-instance mean, one row per
    /// instance: a1 length, a2 area, a3 width, a4 perimeter, a5 max section.
    std::vector<std::array<double, 5>> per_instance;
    std::array<double, 5> mean_abs{};  ///< mean |a_m| per measure
    std::array<double, 5> stddev{};    ///< std of the signed values
};

/// Percent-deviation measures across unwrapped instances of one individual.
/// Throws TooFewInstancesError for fewer than two instances.
ConsistencyReport consistency_metrics(const std::vector<Profile>& instances);

/// Bridges the unwrapping output to classification input.
ProfileCurve profile_curve_from_profile(const Profile& profile);

}  // namespace unwrap::classify
