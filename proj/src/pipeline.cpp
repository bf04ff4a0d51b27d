/**
 * @file pipeline.cpp
 * @brief Subcommand-level wiring of the unwrapping and classification runs.
 */
#include "unwrap/pipeline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "unwrap/errors.hpp"
#include "unwrap/io.hpp"

namespace unwrap::pipeline {

NeutralRun run_neutral(const BinaryMask& mask, const NeutralOptions& options) {
    NeutralRun run;
    run.contour = geom::extract_contour(mask);
    run.landmarks =
        neutral::detect_landmarks(run.contour, options.tail_window_fraction);

    neutral::SplitParts parts = neutral::split_contour(
        run.contour, run.landmarks.tail_index, run.landmarks.head_index,
        options.sparse_spacing, options.dense_spacing);

    neutral::SectionSearchResult found = neutral::find_cross_sections(
        parts, mask, options.k_window_fraction, run.contour.total_length());
    run.skipped_sections = found.skipped;

    run.sections = neutral::smooth_sections(found.sections,
                                            options.midpoint_smooth_window,
                                            options.lambda_smooth_window);
    run.line = neutral::build_neutral_line(run.sections);
    run.shape = neutral::straighten(run.line, run.sections);
    run.profile = neutral::profile_from_shape(run.shape);
    return run;
}

MorphRun run_morph(const Image8& image, const BinaryMask& mask,
                   const MorphOptions& options) {
    MorphRun run;
    run.contour = geom::extract_contour(mask);
    morph::CurveSamples samples =
        morph::sample_contour(run.contour, options.contour_spacing);

    morph::InitialFields fields = morph::initial_fields(samples, mask);
    run.delta0 = std::move(fields.delta0);
    run.s0 = std::move(fields.s0);

    ScalarField phi0 = morph::phi0_field(run.delta0);
    ScalarField kref = morph::kappa_reference(samples, run.s0, mask);
    int smax = options.extraction_max_scale;
    if (smax < 0) smax = morph::default_max_scale(run.delta0);
    ScaleSpace stack = morph::curvature_stack(phi0, kref, smax);
    run.phi_min = morph::stack_minimum(stack);
    run.sigma = morph::minimizing_scale(stack);

    run.reference = morph::reference_curve(run.phi_min, options.reference_quantile,
                                           mask, run.delta0, run.s0);
    if (run.reference.points.size() < 2)
        throw Error("run_morph: reference curve extraction failed");

    morph::UnwrapOptions uo;
    uo.apply_scale_advance = options.apply_scale_advance;
    run.unwrapped =
        morph::unwrap_image(image, mask, run.reference, run.delta0, &run.sigma, uo);
    return run;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

Json ensemble_to_json(const classify::Ensemble& ensemble) {
    Json j;
    j["generation"] = ensemble.generation;
    j["models"] = Json::array();
    for (const classify::GroupModel& m : ensemble.models) {
        Json jm;
        jm["label"] = m.label;
        jm["n_effective"] = m.effective_count;
        jm["samples"] = m.representative.samples;
        j["models"].push_back(jm);
    }
    return j;
}

classify::Ensemble ensemble_from_json(const Json& j) {
    classify::Ensemble e;
    e.generation = j.value("generation", 1);
    for (const Json& jm : j.at("models")) {
        classify::GroupModel m;
        m.label = jm.at("label").get<std::string>();
        m.effective_count = jm.at("n_effective").get<double>();
        m.representative.samples = jm.at("samples").get<std::vector<double>>();
        e.models.push_back(std::move(m));
    }
    return e;
}

void save_json(const Json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_json: cannot open " + path);
    Json j;
    in >> j;
    return j;
}

// ---------------------------------------------------------------------------
// Split protocol
// ---------------------------------------------------------------------------

SplitProtocolResult run_split_protocol(
    const std::vector<classify::LabeledCurve>& samples, int splits,
    uint64_t seed, const classify::TuneOptions& tune_options) {
    SplitProtocolResult out;

    std::vector<std::string> labels;
    for (const auto& s : samples)
        if (std::find(labels.begin(), labels.end(), s.label) == labels.end())
            labels.push_back(s.label);
    std::sort(labels.begin(), labels.end());

    std::map<std::string, int> zero_error, one_error, family_count;
    double acc_sum = 0.0, epoch_sum = 0.0;
    int reached = 0;

    for (int split = 0; split < splits; ++split) {
        std::mt19937_64 rng(seed + static_cast<uint64_t>(split) * 0x9e3779b97f4a7c15ull);
        std::vector<size_t> order(samples.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<classify::LabeledCurve> train, test;
        for (size_t i = 0; i < order.size(); ++i)
            (i % 2 == 0 ? train : test).push_back(samples[order[i]]);

        // initial ensemble: per-family mean curves of the training half
        classify::Ensemble ensemble;
        for (const std::string& label : labels) {
            std::vector<classify::ProfileCurve> members;
            for (const auto& t : train)
                if (t.label == label) members.push_back(t.curve);
            if (members.empty()) continue;
            ensemble.models.push_back(classify::group_mean(members, label));
        }

        classify::TuneResult tuned = classify::tune(ensemble, train, tune_options);
        if (tuned.reached_target) ++reached;
        epoch_sum += tuned.epochs;

        std::map<std::string, int> errors;
        size_t good = 0;
        for (const auto& t : test) {
            classify::Assignment a = classify::assign(t.curve, tuned.ensemble);
            if (a.label == t.label)
                ++good;
            else
                ++errors[t.label];
        }
        acc_sum += static_cast<double>(good) / test.size();
        out.min_test_accuracy = std::min(
            out.min_test_accuracy, static_cast<double>(good) / test.size());
        for (const std::string& label : labels) {
            ++family_count[label];
            int e = errors.count(label) ? errors[label] : 0;
            if (e == 0) ++zero_error[label];
            if (e == 1) ++one_error[label];
        }
    }

    out.mean_test_accuracy = acc_sum / splits;
    out.splits_reaching_target = static_cast<double>(reached) / splits;
    out.mean_epochs = epoch_sum / splits;
    out.table = Json::array();
    for (const std::string& label : labels) {
        Json row;
        row["family"] = label;
        row["zero_error_percent"] =
            100.0 * zero_error[label] / std::max(1, family_count[label]);
        row["one_error_percent"] =
            100.0 * one_error[label] / std::max(1, family_count[label]);
        out.table.push_back(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Profile helpers
// ---------------------------------------------------------------------------

BinaryMask mask_from_profile(const Profile& profile, int margin) {
    double hw_max = 0.0;
    for (double hw : profile.half_width) hw_max = std::max(hw_max, hw);
    int width = static_cast<int>(std::ceil(
                    profile.station.back() - profile.station.front())) +
                2 * margin + 1;
    int height = 2 * (static_cast<int>(std::ceil(hw_max)) + margin) + 1;
    int yc = height / 2;
    BinaryMask mask(width, height);
    for (size_t j = 0; j < profile.station.size(); ++j) {
        int x = margin + static_cast<int>(
                             std::lround(profile.station[j] - profile.station[0]));
        int h = static_cast<int>(std::floor(profile.half_width[j] - 0.5));
        for (int dy = -h; dy <= h; ++dy) mask.set(x, yc + dy, true);
    }
    return mask;
}

double best_iou(const BinaryMask& a, const BinaryMask& b, int search) {
    // align centroids first, then refine over integer shifts
    auto centroid = [](const BinaryMask& m) {
        double cx = 0, cy = 0, n = 0;
        for (int y = 0; y < m.height(); ++y)
            for (int x = 0; x < m.width(); ++x)
                if (m.at(x, y)) {
                    cx += x;
                    cy += y;
                    ++n;
                }
        return Vec2{cx / n, cy / n};
    };
    Vec2 ca = centroid(a), cb = centroid(b);
    int base_dx = static_cast<int>(std::lround(cb.x - ca.x));
    int base_dy = static_cast<int>(std::lround(cb.y - ca.y));

    size_t count_b = b.count();
    double best = 0.0;
    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -search; dx <= search; ++dx) {
            size_t inter = 0, count_a = 0;
            for (int y = 0; y < a.height(); ++y)
                for (int x = 0; x < a.width(); ++x) {
                    if (!a.at(x, y)) continue;
                    ++count_a;
                    if (b.at(x + base_dx + dx, y + base_dy + dy)) ++inter;
                }
            double uni = static_cast<double>(count_a + count_b - inter);
            best = std::max(best, inter / uni);
        }
    return best;
}

double profile_mean_abs_rel_diff(const Profile& a, const Profile& b) {
    classify::ProfileCurve ca = classify::profile_curve_from_profile(a);
    classify::ProfileCurve cb = classify::profile_curve_from_profile(b);
    const classify::ProfileCurve& shorter = ca.length() <= cb.length() ? ca : cb;
    const classify::ProfileCurve& longer = ca.length() <= cb.length() ? cb : ca;
    classify::AlignResult ar = classify::align(shorter, longer);

    double acc = 0.0, mean_w = 0.0;
    size_t n = shorter.samples.size();
    for (size_t s = 0; s < n; ++s) {
        acc += std::abs(shorter.samples[s] - longer.samples[s + ar.translation]);
        mean_w += shorter.samples[s];
    }
    return acc / std::max(mean_w, 1e-9);
}

// ---------------------------------------------------------------------------
// Round-trip evaluation
// ---------------------------------------------------------------------------

Profile template_truth_profile(const synth::Template& tpl) {
    Profile p;
    size_t stations = static_cast<size_t>(tpl.length) + 1;
    for (size_t j = 0; j < stations; ++j) {
        p.station.push_back(static_cast<double>(j));
        p.half_width.push_back(tpl.width_at(static_cast<double>(j)) / 2.0);
    }
    return p;
}

std::vector<synth::Template> roundtrip_templates(int count) {
    auto constant = [](double length, double width) {
        std::vector<double> prof(static_cast<size_t>(length) + 1, width);
        return prof;
    };
    std::vector<synth::Template> lib;
    {
        synth::Template t;
        t.length = 300.0;
        t.width_profile = constant(t.length, 26.0);
        t.cap_style = synth::CapStyle::Taper;
        lib.push_back(t);
    }
    {
        synth::Template t;
        t.length = 280.0;
        t.width_profile = constant(t.length, 22.0);
        t.cap_style = synth::CapStyle::Round;
        lib.push_back(t);
    }
    {
        synth::Template t;
        t.length = 320.0;
        t.width_profile.resize(321);
        for (size_t i = 0; i <= 320; ++i)
            t.width_profile[i] = 30.0 - 14.0 * static_cast<double>(i) / 320.0;
        t.cap_style = synth::CapStyle::Taper;
        lib.push_back(t);
    }
    {
        synth::Template t;
        t.length = 260.0;
        t.width_profile.resize(261);
        for (size_t i = 0; i <= 260; ++i)
            t.width_profile[i] =
                22.0 + 6.0 * std::sin(std::numbers::pi * static_cast<double>(i) / 260.0);
        t.cap_style = synth::CapStyle::Round;
        lib.push_back(t);
    }
    std::vector<synth::Template> out;
    for (int i = 0; i < count; ++i) out.push_back(lib[i % lib.size()]);
    return out;
}

std::vector<synth::BendProfile> roundtrip_bends(const synth::Template& tpl,
                                                int count, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    double L = tpl.length;
    auto arc = [&](double degrees) {
        return synth::BendProfile::constant(
            degrees * std::numbers::pi / 180.0 / L * jitter(rng), L);
    };
    auto sbend = [&](double deg0, double deg1) {
        return synth::BendProfile::linear(
            2.0 * deg0 * std::numbers::pi / 180.0 / L * jitter(rng),
            2.0 * deg1 * std::numbers::pi / 180.0 / L * jitter(rng), L);
    };
    std::vector<synth::BendProfile> bends = {
        synth::BendProfile::constant(0.0, L),
        arc(75.0),
        arc(-110.0),
        sbend(-70.0, 70.0),
        arc(135.0),
        sbend(55.0, -95.0),
        arc(-65.0),
        sbend(-40.0, 100.0),
    };
    bends.resize(std::min<size_t>(bends.size(), std::max(1, count)));
    while (static_cast<int>(bends.size()) < count) bends.push_back(arc(90.0));
    return bends;
}

Json run_roundtrip_protocol(int templates, int bends_per_template, double noise,
                            uint64_t seed, int threads) {
    (void)threads;  // instances are cheap enough sequentially
    std::vector<synth::Template> tlib = roundtrip_templates(templates);

    Json instances = Json::array();
    std::vector<std::vector<Profile>> neutral_groups(tlib.size());
    std::vector<std::vector<Profile>> morph_groups(tlib.size());
    std::vector<double> ious, width_errs, cross_diffs;

    for (size_t t = 0; t < tlib.size(); ++t) {
        synth::SynthResult straight = synth::make_template(tlib[t]);
        Profile truth = template_truth_profile(tlib[t]);
        std::vector<synth::BendProfile> bends = roundtrip_bends(
            tlib[t], bends_per_template, seed ^ (0x5851f42d4c957f2dull + t));

        for (size_t b = 0; b < bends.size(); ++b) {
            uint64_t inst_seed = seed + t * 1000 + b;
            Json row;
            row["template"] = t;
            row["bend"] = b;
            try {
                synth::SynthResult bent = synth::bend(tlib[t], bends[b]);
                BinaryMask mask = bent.mask;
                if (noise > 0.0)
                    mask = synth::add_boundary_noise(mask, noise, inst_seed);
                mask = geom::pad_to_margin(mask, 4);

                pipeline::NeutralRun nrun = run_neutral(mask);
                pipeline::MorphRun mrun =
                    run_morph(io::image_from_mask(mask), mask);

                neutral_groups[t].push_back(nrun.profile);
                morph_groups[t].push_back(mrun.unwrapped.profile);

                double iou = best_iou(mrun.unwrapped.mask, straight.mask, 30);
                double werr =
                    profile_mean_abs_rel_diff(truth, mrun.unwrapped.profile);
                double cross =
                    profile_mean_abs_rel_diff(nrun.profile, mrun.unwrapped.profile);
                ious.push_back(iou);
                width_errs.push_back(werr);
                cross_diffs.push_back(cross);

                row["ok"] = true;
                row["morph_iou"] = iou;
                row["morph_width_err"] = werr;
                row["cross_method_diff"] = cross;
                row["neutral_length"] = nrun.profile.station.back();
                row["sections"] = nrun.sections.size();
            } catch (const std::exception& e) {
                row["ok"] = false;
                row["error"] = e.what();
            }
            instances.push_back(row);
        }
    }

    auto mean_of = [](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double acc = 0.0;
        for (double x : v) acc += x;
        return acc / v.size();
    };
    auto min_of = [](const std::vector<double>& v) {
        return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
    };

    // consistency of the unwrapped instances, per template group, pooled
    std::array<std::vector<double>, 5> neutral_a, morph_a;
    for (size_t t = 0; t < tlib.size(); ++t) {
        for (int which = 0; which < 2; ++which) {
            const auto& group = which == 0 ? neutral_groups[t] : morph_groups[t];
            auto& sink = which == 0 ? neutral_a : morph_a;
            if (group.size() < 2) continue;
            classify::ConsistencyReport rep = classify::consistency_metrics(group);
            for (const auto& inst : rep.per_instance)
                for (int m = 0; m < 5; ++m) sink[m].push_back(std::abs(inst[m]));
        }
    }

    Json report;
    report["templates"] = templates;
    report["bends_per_template"] = bends_per_template;
    report["noise"] = noise;
    report["seed"] = seed;
    report["instances"] = instances;
    report["neutral_a_mean_abs"] = Json::array();
    report["morph_a_mean_abs"] = Json::array();
    for (int m = 0; m < 5; ++m) {
        report["neutral_a_mean_abs"].push_back(mean_of(neutral_a[m]));
        report["morph_a_mean_abs"].push_back(mean_of(morph_a[m]));
    }
    report["morph_iou_mean"] = mean_of(ious);
    report["morph_iou_min"] = min_of(ious);
    report["morph_width_err_mean"] = mean_of(width_errs);
    report["cross_method_diff_mean"] = mean_of(cross_diffs);
    return report;
}

}  // namespace unwrap::pipeline
