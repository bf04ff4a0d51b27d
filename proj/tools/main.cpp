/**
 * @file main.cpp
 * @brief Command-line interface: contour extraction, both unwrapping
 *        methods, synthetic data, training/classification, consistency
 *        metrics and the round-trip evaluation harness.
 */
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>

#include "unwrap/errors.hpp"
#include "unwrap/io.hpp"
#include "unwrap/pipeline.hpp"

namespace fs = std::filesystem;
using namespace unwrap;
using pipeline::Json;

namespace {

constexpr const char* kVersion = "unwrap 1.0.0";

std::string out_path(const std::string& path) {
    const char* dir = std::getenv("UNWRAP_OUT_DIR");
    if (!dir || !*dir || path.empty() || fs::path(path).is_absolute())
        return path;
    fs::create_directories(dir);
    return (fs::path(dir) / path).string();
}

int thread_count() {
    const char* env = std::getenv("UNWRAP_THREADS");
    if (env && *env) return std::max(1, std::atoi(env));
    return 1;
}

synth::BendProfile parse_kappa_spec(const std::string& spec, double length) {
    // "zero" | "const:<k>" | "linear:<k0>:<k1>" | "arc:<degrees>"
    auto split = [](const std::string& s) {
        std::vector<std::string> parts;
        size_t start = 0;
        while (true) {
            size_t colon = s.find(':', start);
            parts.push_back(s.substr(start, colon - start));
            if (colon == std::string::npos) break;
            start = colon + 1;
        }
        return parts;
    };
    std::vector<std::string> parts = split(spec);
    if (parts[0] == "zero") return synth::BendProfile::constant(0.0, length);
    if (parts[0] == "const" && parts.size() == 2)
        return synth::BendProfile::constant(std::stod(parts[1]), length);
    if (parts[0] == "linear" && parts.size() == 3)
        return synth::BendProfile::linear(std::stod(parts[1]),
                                          std::stod(parts[2]), length);
    if (parts[0] == "arc" && parts.size() == 2) {
        double theta = std::stod(parts[1]) * std::numbers::pi / 180.0;
        return synth::BendProfile::constant(theta / length, length);
    }
    throw Error("unknown --kappa-spec: " + spec);
}

synth::Template parse_template(double length, const std::string& width_spec,
                               const std::string& cap) {
    synth::Template tpl;
    tpl.length = length;
    if (cap == "round")
        tpl.cap_style = synth::CapStyle::Round;
    else if (cap == "flat")
        tpl.cap_style = synth::CapStyle::Flat;
    else if (cap == "taper")
        tpl.cap_style = synth::CapStyle::Taper;
    else
        throw Error("unknown --cap: " + cap);

    // "<w>" | "taper:<w0>:<w1>" | "bulge:<w>:<extra>"
    size_t stations = static_cast<size_t>(length) + 1;
    tpl.width_profile.resize(stations);
    size_t c1 = width_spec.find(':');
    if (c1 == std::string::npos) {
        std::fill(tpl.width_profile.begin(), tpl.width_profile.end(),
                  std::stod(width_spec));
    } else {
        std::string kind = width_spec.substr(0, c1);
        size_t c2 = width_spec.find(':', c1 + 1);
        double a = std::stod(width_spec.substr(c1 + 1, c2 - c1 - 1));
        double b = c2 == std::string::npos ? a : std::stod(width_spec.substr(c2 + 1));
        for (size_t i = 0; i < stations; ++i) {
            double t = static_cast<double>(i) / (stations - 1);
            if (kind == "taper")
                tpl.width_profile[i] = a * (1.0 - t) + b * t;
            else if (kind == "bulge")
                tpl.width_profile[i] = a + b * std::sin(t * std::numbers::pi);
            else
                throw Error("unknown width spec: " + width_spec);
        }
    }
    return tpl;
}

Json truth_to_json(const synth::GroundTruth& truth, const std::string& kappa_spec,
                   uint64_t seed) {
    Json j;
    j["axis_length"] = truth.axis_length;
    j["kappa_spec"] = kappa_spec;
    j["seed"] = seed;
    Json axis = Json::array();
    for (const Vec2& p : truth.axis) axis.push_back({p.x, p.y});
    j["axis"] = axis;
    j["lambda"] = truth.lambda;
    return j;
}

void emit_report(const Json& report, const std::string& path) {
    if (path.empty())
        std::cout << report.dump(2) << std::endl;
    else
        pipeline::save_json(report, out_path(path));
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elastic-body unwrapping and straightened-contour classification"};
    app.set_version_flag("--version", std::string(kVersion) + " (" +
#if defined(__clang__)
                                          "clang " __clang_version__
#elif defined(__GNUC__)
                                          "gcc " __VERSION__
#else
                                          "unknown compiler"
#endif
                                          + std::string(")"));
    app.require_subcommand(1);

    // ---- contour ----------------------------------------------------------
    auto* sc_contour = app.add_subcommand("contour", "Extract a conditioned contour");
    std::string c_mask, c_image, c_out, c_svg;
    sc_contour->add_option("--mask", c_mask, "Input mask (PGM/PNG)");
    sc_contour->add_option("--image", c_image,
                           "Grayscale input; segmented by histogram threshold");
    sc_contour->add_option("--out", c_out, "Contour CSV path")->required();
    sc_contour->add_option("--svg", c_svg, "Optional SVG overlay");

    // ---- unwrap-neutral ----------------------------------------------------
    auto* sc_neutral = app.add_subcommand("unwrap-neutral",
                                          "Straighten via the neutral line");
    std::string n_mask, n_profile, n_contour, n_svg, n_report;
    pipeline::NeutralOptions n_opts;
    sc_neutral->add_option("--mask", n_mask, "Input mask (PGM/PNG)")->required();
    sc_neutral->add_option("--out-profile", n_profile, "Profile CSV")->required();
    sc_neutral->add_option("--out-contour", n_contour, "Contour CSV");
    sc_neutral->add_option("--svg", n_svg, "SVG overlay of sections/neutral line");
    sc_neutral->add_option("--report", n_report, "Report JSON");
    sc_neutral->add_option("--k-window", n_opts.k_window_fraction,
                           "Candidate window, fraction of contour length")
        ->capture_default_str();
    sc_neutral->add_option("--tail-window", n_opts.tail_window_fraction,
                           "Tail fit window, fraction of contour length")
        ->capture_default_str();
    sc_neutral->add_option("--sparse-spacing", n_opts.sparse_spacing,
                           "Part I sample spacing, px")
        ->capture_default_str();

    // ---- unwrap-morph ------------------------------------------------------
    auto* sc_morph = app.add_subcommand("unwrap-morph",
                                        "Straighten via morphological inversion");
    std::string m_mask, m_image, m_out, m_fields, m_profile, m_report;
    pipeline::MorphOptions m_opts;
    sc_morph->add_option("--image", m_image, "Grayscale image (PNG/PGM)");
    sc_morph->add_option("--mask", m_mask, "Input mask (PGM/PNG)")->required();
    sc_morph->add_option("--out", m_out, "Straightened image (PNG)")->required();
    sc_morph->add_option("--out-profile", m_profile, "Profile CSV");
    sc_morph->add_option("--fields-dir", m_fields,
                         "Directory for 16-bit field dumps");
    sc_morph->add_option("--report", m_report, "Report JSON");
    sc_morph->add_option("--smax", m_opts.extraction_max_scale,
                         "Scale-space depth (-1 = auto)")
        ->capture_default_str();
    sc_morph->add_option("--quantile", m_opts.reference_quantile,
                         "Reference threshold quantile")
        ->capture_default_str();
    sc_morph->add_flag("--scale-advance", m_opts.apply_scale_advance,
                       "Advance stations by the minimizing scale");

    // ---- synth -------------------------------------------------------------
    auto* sc_synth = app.add_subcommand("synth", "Generate a deformed body");
    double s_length = 300.0;
    std::string s_width = "24", s_cap = "taper", s_kappa = "zero";
    double s_noise = 0.0;
    uint64_t s_seed = 0;
    std::string s_out, s_truth;
    sc_synth->add_option("--length", s_length, "Axis length, px")
        ->capture_default_str();
    sc_synth->add_option("--width", s_width, "Width: <w> | taper:<a>:<b> | bulge:<w>:<e>")
        ->capture_default_str();
    sc_synth->add_option("--cap", s_cap, "Cap style: round|flat|taper")
        ->capture_default_str();
    sc_synth->add_option("--kappa-spec", s_kappa,
                         "zero | const:<k> | linear:<a>:<b> | arc:<deg>")
        ->capture_default_str();
    sc_synth->add_option("--noise", s_noise, "Boundary noise amplitude, px")
        ->capture_default_str();
    sc_synth->add_option("--seed", s_seed, "RNG seed")->capture_default_str();
    sc_synth->add_option("--out", s_out, "Mask output (PGM/PNG)")->required();
    sc_synth->add_option("--truth", s_truth, "Ground-truth JSON");

    // ---- train -------------------------------------------------------------
    auto* sc_train = app.add_subcommand("train", "Build and tune an ensemble");
    std::string t_profiles, t_labels, t_out;
    classify::TuneOptions t_opts;
    sc_train->add_option("--profiles", t_profiles, "Directory of profile CSVs")
        ->required();
    sc_train->add_option("--labels", t_labels, "CSV: filename,label")->required();
    sc_train->add_option("--out", t_out, "Ensemble JSON")->required();
    sc_train->add_option("--target-rate", t_opts.target_rate)
        ->capture_default_str();
    sc_train->add_option("--max-epochs", t_opts.max_epochs)->capture_default_str();
    sc_train->add_flag("--paper-literal-right-update",
                       t_opts.paper_literal_right_update,
                       "Use the paper's literal correct-group denominator");

    // ---- classify ----------------------------------------------------------
    auto* sc_classify = app.add_subcommand("classify", "Assign profiles to families");
    std::string cl_profiles, cl_ensemble, cl_report, cl_labels;
    int cl_splits = 0;
    uint64_t cl_seed = 0;
    sc_classify->add_option("--profiles", cl_profiles, "Directory of profile CSVs")
        ->required();
    sc_classify->add_option("--ensemble", cl_ensemble, "Ensemble JSON");
    sc_classify->add_option("--report", cl_report, "Report JSON")->required();
    sc_classify->add_option("--labels", cl_labels,
                            "CSV: filename,label (enables scoring)");
    sc_classify->add_option("--eval-splits", cl_splits,
                            "Run N random 50/50 train/test splits instead");
    sc_classify->add_option("--seed", cl_seed, "RNG seed for --eval-splits")
        ->capture_default_str();

    // ---- metrics -----------------------------------------------------------
    auto* sc_metrics = app.add_subcommand(
        "metrics", "Consistency measures across unwrapped instances");
    std::string me_profiles, me_report;
    sc_metrics->add_option("--profiles", me_profiles, "Directory of profile CSVs")
        ->required();
    sc_metrics->add_option("--report", me_report, "Report JSON")->required();

    // ---- eval-roundtrip ----------------------------------------------------
    auto* sc_eval = app.add_subcommand(
        "eval-roundtrip", "Synthesize, unwrap by both methods, evaluate");
    int e_templates = 4, e_bends = 5;
    double e_noise = 1.0;
    uint64_t e_seed = 0;
    std::string e_report = "roundtrip.json";
    sc_eval->add_option("--templates", e_templates)->capture_default_str();
    sc_eval->add_option("--bends", e_bends)->capture_default_str();
    sc_eval->add_option("--noise", e_noise)->capture_default_str();
    sc_eval->add_option("--seed", e_seed)->capture_default_str();
    sc_eval->add_option("--report", e_report)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sc_contour) {
            BinaryMask mask;
            Json report;
            if (!c_mask.empty()) {
                mask = io::read_mask(c_mask);
            } else if (!c_image.empty()) {
                io::SegmentResult seg = io::segment_threshold(io::read_png(c_image));
                mask = seg.mask;
                report["segmentation_threshold"] = seg.threshold;
                report["segmentation_fallback"] = seg.fallback;
            } else {
                throw Error("contour: need --mask or --image");
            }
            Contour contour = geom::extract_contour(mask);
            io::write_contour_csv(contour, out_path(c_out));
            if (!c_svg.empty()) {
                io::SvgOverlay ov;
                ov.contour = &contour;
                io::write_svg(ov, mask.width(), mask.height(), out_path(c_svg));
            }
        } else if (*sc_neutral) {
            Timer timer;
            BinaryMask mask = io::read_mask(n_mask);
            pipeline::NeutralRun run = pipeline::run_neutral(mask, n_opts);
            io::write_profile_csv(run.profile, out_path(n_profile));
            if (!n_contour.empty())
                io::write_contour_csv(run.contour, out_path(n_contour));
            if (!n_svg.empty()) {
                io::SvgOverlay ov;
                ov.contour = &run.contour;
                ov.sections = &run.sections;
                ov.neutral_line = &run.line.midpoints;
                io::write_svg(ov, mask.width(), mask.height(), out_path(n_svg));
            }
            std::cerr << "unwrap-neutral: " << run.sections.size() << " sections, "
                      << run.skipped_sections << " skipped, " << timer.seconds()
                      << " s\n";
            if (!n_report.empty()) {
                Json report;
                report["input"] = n_mask;
                report["sections"] = run.sections.size();
                report["skipped_sections"] = run.skipped_sections;
                report["low_confidence_tail"] = run.landmarks.low_confidence;
                report["neutral_length"] = run.line.cumulative_length.back();
                emit_report(report, n_report);
            }
        } else if (*sc_morph) {
            Timer timer;
            BinaryMask mask = io::read_mask(m_mask);
            Image8 image = m_image.empty() ? io::image_from_mask(mask)
                                           : io::read_image_any(m_image);
            pipeline::MorphRun run = pipeline::run_morph(image, mask, m_opts);
            io::write_png(run.unwrapped.image, out_path(m_out));
            if (!m_profile.empty())
                io::write_profile_csv(run.unwrapped.profile, out_path(m_profile));
            if (!m_fields.empty()) {
                fs::create_directories(out_path(m_fields));
                fs::path dir(out_path(m_fields));
                io::write_field_pgm16(run.delta0, (dir / "delta0.pgm").string());
                io::write_field_pgm16(run.s0, (dir / "s0.pgm").string());
                io::write_field_pgm16(run.phi_min, (dir / "phi_min.pgm").string());
                io::write_field_pgm16(run.sigma, (dir / "sigma.pgm").string());
            }
            std::cerr << "unwrap-morph: reference " << run.reference.points.size()
                      << " points, " << timer.seconds() << " s\n";
            if (!m_report.empty()) {
                Json report;
                report["input"] = m_mask;
                report["reference_points"] = run.reference.points.size();
                report["reference_disconnected"] = run.reference.disconnected;
                emit_report(report, m_report);
            }
        } else if (*sc_synth) {
            synth::Template tpl = parse_template(s_length, s_width, s_cap);
            synth::BendProfile bend_profile = parse_kappa_spec(s_kappa, s_length);
            synth::SynthResult result = synth::bend(tpl, bend_profile);
            BinaryMask mask = result.mask;
            if (s_noise > 0.0)
                mask = synth::add_boundary_noise(mask, s_noise, s_seed);
            io::write_mask(mask, out_path(s_out));
            if (!s_truth.empty())
                pipeline::save_json(truth_to_json(result.truth, s_kappa, s_seed),
                                    out_path(s_truth));
        } else if (*sc_train) {
            std::vector<classify::LabeledCurve> samples;
            Json labels = Json::object();
            std::ifstream lf(t_labels);
            if (!lf) throw IoError("train: cannot open " + t_labels);
            std::string line;
            while (std::getline(lf, line)) {
                size_t comma = line.find(',');
                if (comma == std::string::npos) continue;
                std::string file = line.substr(0, comma);
                std::string label = line.substr(comma + 1);
                Profile p = io::read_profile_csv(
                    (fs::path(t_profiles) / file).string());
                samples.push_back({classify::profile_curve_from_profile(p), label});
            }
            std::vector<std::string> label_names;
            for (const auto& s : samples)
                if (std::find(label_names.begin(), label_names.end(), s.label) ==
                    label_names.end())
                    label_names.push_back(s.label);
            std::sort(label_names.begin(), label_names.end());
            classify::Ensemble ensemble;
            for (const std::string& label : label_names) {
                std::vector<classify::ProfileCurve> members;
                for (const auto& s : samples)
                    if (s.label == label) members.push_back(s.curve);
                ensemble.models.push_back(classify::group_mean(members, label));
            }
            classify::TuneResult tuned = classify::tune(ensemble, samples, t_opts);
            pipeline::save_json(pipeline::ensemble_to_json(tuned.ensemble),
                                out_path(t_out));
            std::cerr << "train: rate " << tuned.training_rate << " after "
                      << tuned.epochs << " epochs\n";
        } else if (*sc_classify) {
            std::vector<std::pair<std::string, Profile>> profiles;
            for (const auto& entry : fs::directory_iterator(cl_profiles)) {
                if (entry.path().extension() != ".csv") continue;
                profiles.push_back({entry.path().filename().string(),
                                    io::read_profile_csv(entry.path().string())});
            }
            std::sort(profiles.begin(), profiles.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::map<std::string, std::string> truth;
            if (!cl_labels.empty()) {
                std::ifstream lf(cl_labels);
                if (!lf) throw IoError("classify: cannot open " + cl_labels);
                std::string line;
                while (std::getline(lf, line)) {
                    size_t comma = line.find(',');
                    if (comma != std::string::npos)
                        truth[line.substr(0, comma)] = line.substr(comma + 1);
                }
            }

            Json report;
            if (cl_splits > 0) {
                if (truth.empty())
                    throw Error("classify: --eval-splits needs --labels");
                std::vector<classify::LabeledCurve> samples;
                for (const auto& [name, prof] : profiles)
                    if (truth.count(name))
                        samples.push_back(
                            {classify::profile_curve_from_profile(prof),
                             truth.at(name)});
                pipeline::SplitProtocolResult res =
                    pipeline::run_split_protocol(samples, cl_splits, cl_seed);
                report["splits"] = cl_splits;
                report["seed"] = cl_seed;
                report["mean_test_accuracy"] = res.mean_test_accuracy;
                report["min_test_accuracy"] = res.min_test_accuracy;
                report["splits_reaching_target"] = res.splits_reaching_target;
                report["mean_epochs"] = res.mean_epochs;
                report["families"] = res.table;
            } else {
                if (cl_ensemble.empty())
                    throw Error("classify: need --ensemble (or --eval-splits)");
                classify::Ensemble ensemble =
                    pipeline::ensemble_from_json(pipeline::load_json(cl_ensemble));
                Json rows = Json::array();
                std::map<std::string, std::map<std::string, int>> confusion;
                size_t good = 0, scored = 0;
                for (const auto& [name, prof] : profiles) {
                    classify::Assignment a = classify::assign(
                        classify::profile_curve_from_profile(prof), ensemble);
                    Json row;
                    row["file"] = name;
                    row["predicted"] = a.label;
                    row["distances"] = a.distances;
                    if (truth.count(name)) {
                        row["true"] = truth.at(name);
                        ++confusion[truth.at(name)][a.label];
                        ++scored;
                        if (truth.at(name) == a.label) ++good;
                    }
                    rows.push_back(row);
                }
                report["samples"] = rows;
                if (scored) {
                    report["accuracy"] = static_cast<double>(good) / scored;
                    report["confusion"] = confusion;
                }
            }
            emit_report(report, cl_report);
        } else if (*sc_metrics) {
            std::vector<Profile> instances;
            std::vector<std::string> names;
            for (const auto& entry : fs::directory_iterator(me_profiles)) {
                if (entry.path().extension() != ".csv") continue;
                names.push_back(entry.path().filename().string());
            }
            std::sort(names.begin(), names.end());
            for (const std::string& name : names)
                instances.push_back(io::read_profile_csv(
                    (fs::path(me_profiles) / name).string()));
            classify::ConsistencyReport rep =
                classify::consistency_metrics(instances);
            Json report;
            report["instances"] = names;
            Json per = Json::array();
            for (const auto& row : rep.per_instance)
                per.push_back({row[0], row[1], row[2], row[3], row[4]});
            report["a_signed_percent"] = per;
            report["mean_abs_percent"] = rep.mean_abs;
            report["stddev_percent"] = rep.stddev;
            emit_report(report, me_report);
        } else if (*sc_eval) {
            Json report = pipeline::run_roundtrip_protocol(
                e_templates, e_bends, e_noise, e_seed, thread_count());
            emit_report(report, e_report);
        }
    } catch (const Error& e) {
        Json err;
        err["error"] = e.what();
        std::cerr << err.dump() << std::endl;
        return 1;
    } catch (const std::exception& e) {
        Json err;
        err["error"] = e.what();
        std::cerr << err.dump() << std::endl;
        return 1;
    }
    return 0;
}
