/**
 * @file classify.cpp
 * @brief Alignment, group means, tuning and consistency measures.
 */
#include "unwrap/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "unwrap/errors.hpp"

namespace unwrap::classify {

namespace {

/// Sum of squared residuals of `c` against `ref` shifted by d, over the
/// full support of `c`.
double distance_at(const ProfileCurve& c, const ProfileCurve& ref, int d) {
    double acc = 0.0;
    for (size_t s = 0; s < c.samples.size(); ++s) {
        double diff = c.samples[s] - ref.samples[s + d];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

AlignResult align(const ProfileCurve& c, const ProfileCurve& ref) {
    if (ref.length() < c.length())
        throw RefTooShortError("align: reference shorter than query");
    int span = ref.length() - c.length();
    AlignResult best{0, std::numeric_limits<double>::infinity()};
    for (int d = 0; d <= span; ++d) {
        double dist = distance_at(c, ref, d);
        if (dist < best.distance) {
            best.distance = dist;
            best.translation = d;
        }
    }
    return best;
}

GroupModel group_mean(const std::vector<ProfileCurve>& members,
                      const std::string& label) {
    if (members.empty()) throw Error("group_mean: no members");
    size_t anchor = 0;
    for (size_t i = 1; i < members.size(); ++i)
        if (members[i].length() > members[anchor].length()) anchor = i;

    const ProfileCurve& ref = members[anchor];
    size_t len = ref.samples.size();
    std::vector<double> acc(len, 0.0);
    std::vector<int> cover(len, 0);
    for (const ProfileCurve& m : members) {
        int d = align(m, ref).translation;
        for (size_t s = 0; s < m.samples.size(); ++s) {
            acc[s + d] += m.samples[s];
            ++cover[s + d];
        }
    }
    GroupModel model;
    model.label = label;
    model.effective_count = static_cast<double>(members.size());
    model.representative.samples.resize(len);
    for (size_t s = 0; s < len; ++s)
        model.representative.samples[s] =
            cover[s] > 0 ? acc[s] / cover[s] : ref.samples[s];
    return model;
}

Assignment assign(const ProfileCurve& c, const Ensemble& ensemble) {
    if (ensemble.models.empty()) throw Error("assign: empty ensemble");
    Assignment out;
    out.distances.reserve(ensemble.models.size());
    double best = std::numeric_limits<double>::infinity();
    for (const GroupModel& m : ensemble.models) {
        double dist;
        if (m.representative.length() >= c.length()) {
            dist = align(c, m.representative).distance;
        } else {
            // representative shorter: roles swap, sum over the shorter curve
            dist = align(m.representative, c).distance;
        }
        out.distances.push_back(dist);
        if (dist < best || (dist == best && m.label < out.label)) {
            best = dist;
            out.label = m.label;
        }
    }
    return out;
}

double correction_weight(const ProfileCurve& model, const ProfileCurve& sample,
                         int translation) {
    // beta = exp( -1/(L+1) * sum over the overlap of squared residuals )
    double acc = 0.0;
    size_t lo = static_cast<size_t>(translation);
    for (size_t s = 0; s < sample.samples.size(); ++s) {
        size_t idx = s + lo;
        if (idx >= model.samples.size()) break;
        double diff = model.samples[idx] - sample.samples[s];
        acc += diff * diff;
    }
    return std::exp(-acc / (model.samples.size()));
}

namespace {

struct AlignedPair {
    int translation = 0;
    bool swapped = false;  ///< sample was the longer curve
};

AlignedPair align_any(const GroupModel& model, const ProfileCurve& sample) {
    AlignedPair out;
    if (model.representative.length() >= sample.length()) {
        out.translation = align(sample, model.representative).translation;
    } else {
        out.translation = align(model.representative, sample).translation;
        out.swapped = true;
    }
    return out;
}

}  // namespace

TuneResult tune(const Ensemble& start, const std::vector<LabeledCurve>& training,
                const TuneOptions& options) {
    TuneResult result;
    result.ensemble = start;

    auto model_of = [&](const std::string& label) -> GroupModel* {
        for (GroupModel& m : result.ensemble.models)
            if (m.label == label) return &m;
        return nullptr;
    };
    for (const LabeledCurve& t : training)
        if (!model_of(t.label))
            throw Error("tune: training label without a model: " + t.label);

    auto training_rate = [&]() {
        size_t good = 0;
        for (const LabeledCurve& t : training)
            if (assign(t.curve, result.ensemble).label == t.label) ++good;
        return static_cast<double>(good) / training.size();
    };

    for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
        double rate = training_rate();
        result.training_rate = rate;
        if (rate >= options.target_rate) {
            result.reached_target = true;
            return result;
        }
        // one re-estimation sweep, sample order
        for (const LabeledCurve& t : training) {
            Assignment a = assign(t.curve, result.ensemble);
            if (a.label == t.label) continue;

            GroupModel* wrong = model_of(a.label);
            GroupModel* right = model_of(t.label);

            auto update = [&](GroupModel& m, double sign, double denom_sign) {
                AlignedPair ap = align_any(m, t.curve);
                ProfileCurve shifted;  // sample expressed on model stations
                size_t len = m.representative.samples.size();
                std::vector<double> overlap_value(len, 0.0);
                std::vector<bool> covered(len, false);
                for (size_t s = 0; s < t.curve.samples.size(); ++s) {
                    long idx = ap.swapped
                                   ? static_cast<long>(s) - ap.translation
                                   : static_cast<long>(s) + ap.translation;
                    if (idx < 0 || idx >= static_cast<long>(len)) continue;
                    overlap_value[idx] = t.curve.samples[s];
                    covered[idx] = true;
                }
                double acc = 0.0;
                for (size_t s = 0; s < len; ++s)
                    if (covered[s]) {
                        double diff = m.representative.samples[s] - overlap_value[s];
                        acc += diff * diff;
                    }
                double beta = std::exp(-acc / static_cast<double>(len));
                double n = m.effective_count;
                double denom = n + denom_sign * beta;
                if (denom <= 0.1) {
                    ++result.degenerate_skips;
                    return;
                }
                for (size_t s = 0; s < len; ++s) {
                    if (!covered[s]) continue;
                    m.representative.samples[s] =
                        (n * m.representative.samples[s] +
                         sign * beta * overlap_value[s]) /
                        denom;
                }
                m.effective_count = denom;
            };

            // push the wrong group away, pull the right group closer
            update(*wrong, -1.0, -1.0);
            update(*right, +1.0,
                   options.paper_literal_right_update ? -1.0 : +1.0);
        }
        ++result.epochs;
        ++result.ensemble.generation;
    }
    result.training_rate = training_rate();
    result.reached_target = result.training_rate >= options.target_rate;
    return result;
}

// ---------------------------------------------------------------------------
// Consistency metrics
// ---------------------------------------------------------------------------

ProfileCurve profile_curve_from_profile(const Profile& profile) {
    ProfileCurve c;
    c.samples = profile.half_width;
    return c;
}

ConsistencyReport consistency_metrics(const std::vector<Profile>& instances) {
    if (instances.size() < 2)
        throw TooFewInstancesError("consistency_metrics: need >= 2 instances");
    size_t n = instances.size();

    std::vector<double> length(n), area(n), perimeter(n), max_section(n);
    for (size_t i = 0; i < n; ++i) {
        const Profile& p = instances[i];
        if (p.station.size() < 2)
            throw TooFewInstancesError("consistency_metrics: degenerate profile");
        length[i] = p.station.back() - p.station.front();
        double a = 0.0, per = 0.0, cmax = 0.0;
        for (size_t j = 0; j + 1 < p.station.size(); ++j) {
            double dx = p.station[j + 1] - p.station[j];
            a += dx * (p.half_width[j] + p.half_width[j + 1]);  // trapezoid, 2*hw
            double dw = p.half_width[j + 1] - p.half_width[j];
            per += 2.0 * std::sqrt(dx * dx + dw * dw);
        }
        per += 2.0 * p.half_width.front() + 2.0 * p.half_width.back();
        for (double hw : p.half_width) cmax = std::max(cmax, 2.0 * hw);
        area[i] = a;
        perimeter[i] = per;
        max_section[i] = cmax;
    }

    // widths on aligned common stations for a3
    size_t longest = 0;
    for (size_t i = 1; i < n; ++i)
        if (instances[i].half_width.size() > instances[longest].half_width.size())
            longest = i;
    ProfileCurve ref = profile_curve_from_profile(instances[longest]);
    std::vector<int> shift(n, 0);
    size_t common_lo = 0, common_hi = ref.samples.size();
    for (size_t i = 0; i < n; ++i) {
        ProfileCurve c = profile_curve_from_profile(instances[i]);
        shift[i] = align(c, ref).translation;
        common_lo = std::max(common_lo, static_cast<size_t>(shift[i]));
        common_hi = std::min(common_hi, shift[i] + c.samples.size());
    }

    ConsistencyReport report;
    report.per_instance.resize(n);

    auto fill_measure = [&](int m, const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= n;
        for (size_t i = 0; i < n; ++i)
            report.per_instance[i][m] = (v[i] - mean) / mean * 100.0;
    };
    fill_measure(0, length);
    fill_measure(1, area);
    fill_measure(3, perimeter);
    fill_measure(4, max_section);

    if (common_hi > common_lo) {
        size_t sN = common_hi - common_lo;
        std::vector<double> mean_width(sN, 0.0);
        std::vector<std::vector<double>> width(n, std::vector<double>(sN));
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < sN; ++j) {
                size_t idx = common_lo + j - shift[i];
                width[i][j] = 2.0 * instances[i].half_width[idx];
                mean_width[j] += width[i][j] / n;
            }
        }
        double denom = 0.0;
        for (size_t j = 0; j < sN; ++j) denom += mean_width[j];
        denom /= sN;
        for (size_t i = 0; i < n; ++i) {
            double dev = 0.0;
            for (size_t j = 0; j < sN; ++j) dev += width[i][j] - mean_width[j];
            dev /= sN;
            report.per_instance[i][2] = dev / denom * 100.0;
        }
    }

    for (int m = 0; m < 5; ++m) {
        double abs_sum = 0.0, mean = 0.0;
        for (size_t i = 0; i < n; ++i) {
            abs_sum += std::abs(report.per_instance[i][m]);
            mean += report.per_instance[i][m];
        }
        mean /= n;
        double var = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double d = report.per_instance[i][m] - mean;
            var += d * d;
        }
        report.mean_abs[m] = abs_sum / n;
        report.stddev[m] = std::sqrt(var / n);
    }
    return report;
}

}  // namespace unwrap::classify
