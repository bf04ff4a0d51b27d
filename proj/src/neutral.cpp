/**
 * @file neutral.cpp
 * @brief Landmarks, section matching and straightening.
 */
#include "unwrap/neutral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "unwrap/errors.hpp"

namespace unwrap::neutral {

namespace {

/// Angle between two vectors in [0, pi].
double angle_between(const Vec2& a, const Vec2& b) {
    return std::atan2(std::abs(a.cross(b)), a.dot(b));
}

/// Principal direction of a point set, oriented toward its centroid as seen
/// from `origin`.
Vec2 principal_direction(const std::vector<Vec2>& pts, const Vec2& origin) {
    Vec2 mean{0, 0};
    for (const Vec2& p : pts) mean += p;
    mean = mean / static_cast<double>(pts.size());
    double sxx = 0, sxy = 0, syy = 0;
    for (const Vec2& p : pts) {
        Vec2 d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // leading eigenvector of the 2x2 covariance
    double tr = sxx + syy;
    double det = sxx * syy - sxy * sxy;
    double lam = tr / 2.0 + std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    Vec2 dir = std::abs(sxy) > 1e-12 ? Vec2{lam - syy, sxy}.normalized()
                                     : (sxx >= syy ? Vec2{1, 0} : Vec2{0, 1});
    if (dir.dot(mean - origin) < 0.0) dir = dir * -1.0;
    return dir;
}

}  // namespace

int detect_tail(const Contour& contour, double window) {
    size_t n = contour.points.size();
    double best_angle = 1e30;
    int best = 0;
    for (size_t i = 0; i < n; ++i) {
        std::vector<Vec2> left, right;
        double acc = 0.0;
        size_t j = i;
        while (acc < window && left.size() + 2 < n) {
            size_t k = (j + n - 1) % n;
            acc += (contour.points[j] - contour.points[k]).norm();
            left.push_back(contour.points[k]);
            j = k;
        }
        acc = 0.0;
        j = i;
        while (acc < window && right.size() + 2 < n) {
            size_t k = (j + 1) % n;
            acc += (contour.points[k] - contour.points[j]).norm();
            right.push_back(contour.points[k]);
            j = k;
        }
        if (left.size() < 5 || right.size() < 5) continue;
        Vec2 dl = principal_direction(left, contour.points[i]);
        Vec2 dr = principal_direction(right, contour.points[i]);
        double ang = angle_between(dl, dr);
        if (ang < best_angle - 1e-12) {
            best_angle = ang;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int detect_head(const Contour& contour, int tail) {
    size_t n = contour.points.size();
    double total = contour.total_length();
    std::vector<double> kappa = geom::contour_curvature(contour, 10.0, 5);
    double s_tail = contour.cumulative_length[tail];
    double best_k = -1.0;
    int best = static_cast<int>((tail + n / 2) % n);
    for (size_t i = 0; i < n; ++i) {
        double d = contour.cumulative_length[i] - s_tail;
        if (d < 0.0) d += total;
        if (d < 0.4 * total || d > 0.6 * total) continue;
        if (std::abs(kappa[i]) > best_k) {
            best_k = std::abs(kappa[i]);
            best = static_cast<int>(i);
        }
    }
    return best;
}

Landmarks detect_landmarks(const Contour& contour, double tail_window_fraction) {
    Landmarks lm;
    double window = tail_window_fraction * contour.total_length();
    lm.tail_index = detect_tail(contour, window);
    lm.head_index = detect_head(contour, lm.tail_index);

    // flag shapes with no clearly acute tail: compare the winning angle
    // against a rounded-end baseline
    std::vector<double> kappa = geom::contour_curvature(contour, 6.0, 4);
    double k = std::abs(kappa[lm.tail_index]);
    lm.low_confidence = k < 0.05;
    return lm;
}

SplitParts split_contour(const Contour& contour, int tail, int head,
                         double sparse_spacing, double dense_spacing) {
    size_t n = contour.points.size();
    if (tail == head) throw Error("split_contour: tail equals head");

    auto collect = [&](int from, int to, int step) {
        std::vector<Vec2> pts;
        int i = from;
        while (true) {
            pts.push_back(contour.points[i]);
            if (i == to) break;
            i = (i + step + static_cast<int>(n)) % static_cast<int>(n);
        }
        return pts;
    };
    std::vector<Vec2> part_i = collect(tail, head, +1);
    std::vector<Vec2> part_ii = collect(tail, head, -1);

    auto arcs_of = [](const std::vector<Vec2>& pts) {
        std::vector<double> arc(pts.size(), 0.0);
        for (size_t i = 1; i < pts.size(); ++i)
            arc[i] = arc[i - 1] + (pts[i] - pts[i - 1]).norm();
        return arc;
    };
    std::vector<double> arc_i = arcs_of(part_i);
    std::vector<double> arc_ii = arcs_of(part_ii);

    SplitParts out;
    geom::DegreeChoice fit_i = geom::choose_degree(part_i, arc_i);
    geom::DegreeChoice fit_ii = geom::choose_degree(part_ii, arc_ii);
    out.curve_i = fit_i.curve;
    out.curve_ii = fit_ii.curve;
    out.degree_capped_i = fit_i.capped;
    out.degree_capped_ii = fit_ii.capped;

    auto sample = [](const geom::PolyCurve2D& curve, double spacing) {
        std::vector<geom::FrameSample> frames;
        double L = curve.length();
        for (double s = 0.0; s <= L + 1e-9; s += spacing)
            frames.push_back(geom::frame_at(curve, std::min(s, L)));
        return frames;
    };
    out.samples_i = sample(out.curve_i, sparse_spacing);
    out.samples_ii = sample(out.curve_ii, dense_spacing);
    return out;
}

namespace {

bool chord_inside(const BinaryMask& mask, const Vec2& a, const Vec2& b) {
    double len = (b - a).norm();
    int steps = std::max(1, static_cast<int>(std::ceil(len)));
    for (int k = 0; k <= steps; ++k) {
        Vec2 p = a + (b - a) * (static_cast<double>(k) / steps);
        if (!mask.at(static_cast<int>(std::lround(p.x)),
                     static_cast<int>(std::lround(p.y))))
            return false;
    }
    return true;
}

}  // namespace

SectionSearchResult find_cross_sections(const SplitParts& parts,
                                        const BinaryMask& mask,
                                        double k_window_fraction,
                                        double contour_length) {
    SectionSearchResult out;
    const auto& sparse = parts.samples_i;
    const auto& dense = parts.samples_ii;
    if (sparse.size() < 3 || dense.size() < 3) return out;

    double dense_spacing =
        dense.size() > 1 ? dense[1].s - dense[0].s : 1.0;
    int window = std::max(
        3, static_cast<int>(std::lround(k_window_fraction * contour_length /
                                        dense_spacing)));

    int prev_d = 0;
    for (size_t i = 1; i + 1 < sparse.size(); ++i) {
        if (prev_d + 1 >= static_cast<int>(dense.size()) - 1) break;
        int j_hi = std::min<int>(prev_d + window,
                                 static_cast<int>(dense.size()) - 1);
        double best_dphi = 1e30;
        int best_j = -1;
        for (int j = prev_d + 1; j <= j_hi; ++j) {
            Vec2 chord = sparse[i].position - dense[j].position;
            double len = chord.norm();
            if (len < 0.8) continue;
            if (!chord_inside(mask, dense[j].position, sparse[i].position))
                continue;
            double phi_i = angle_between(chord, sparse[i].tangent);
            double phi_ii = angle_between(chord, dense[j].tangent);
            double dphi = std::abs(phi_i + phi_ii - std::numbers::pi);
            if (dphi < best_dphi) {
                best_dphi = dphi;
                best_j = j;
            }
        }
        if (best_j < 0) {
            ++out.skipped;
            continue;
        }
        CrossSection cs;
        cs.p_i = sparse[i].position;
        cs.p_ii = dense[best_j].position;
        cs.midpoint = (cs.p_i + cs.p_ii) / 2.0;
        cs.lambda = (cs.p_i - cs.p_ii).norm();
        cs.delta_phi = best_dphi;
        cs.dense_index = best_j;
        out.sections.push_back(cs);
        prev_d = best_j;
    }
    return out;
}

NeutralLine build_neutral_line(const std::vector<CrossSection>& sections) {
    if (sections.size() < 2)
        throw TooFewSectionsError("build_neutral_line: need at least two sections");
    NeutralLine line;
    line.midpoints.reserve(sections.size());
    line.cumulative_length.reserve(sections.size());
    double acc = 0.0;
    for (size_t i = 0; i < sections.size(); ++i) {
        if (i > 0) {
            double step = (sections[i].midpoint - sections[i - 1].midpoint).norm();
            if (step <= 0.0) continue;  // coincident midpoints collapse
            acc += step;
        }
        line.midpoints.push_back(sections[i].midpoint);
        line.cumulative_length.push_back(acc);
    }
    if (line.midpoints.size() < 2)
        throw TooFewSectionsError("build_neutral_line: midpoints degenerate");
    return line;
}

StraightenedShape straighten(const NeutralLine& neutral,
                             const std::vector<CrossSection>& sections) {
    StraightenedShape shape;
    size_t n = neutral.midpoints.size();
    shape.stations.reserve(n);
    shape.half_widths.reserve(n);

    // midpoints came from these sections in order; walk both lists together
    size_t si = 0;
    for (size_t i = 0; i < n; ++i) {
        while (si < sections.size() &&
               (sections[si].midpoint - neutral.midpoints[i]).norm() > 1e-9)
            ++si;
        if (si >= sections.size())
            throw Error("straighten: sections do not match the neutral line");
        shape.stations.push_back(neutral.cumulative_length[i]);
        shape.half_widths.push_back(sections[si].lambda / 2.0);
        ++si;
    }
    if (!shape.stations.empty()) {
        double s0 = shape.stations.front();
        for (double& s : shape.stations) s -= s0;
    }
    return shape;
}

std::vector<CrossSection> smooth_sections(const std::vector<CrossSection>& sections,
                                          int midpoint_window, int lambda_window) {
    if (sections.size() < 3) return sections;
    std::vector<Vec2> mids;
    mids.reserve(sections.size());
    for (const CrossSection& s : sections) mids.push_back(s.midpoint);
    mids = geom::smooth_chain(mids, midpoint_window);

    std::vector<CrossSection> out = sections;
    int n = static_cast<int>(out.size());
    int h = std::max(0, lambda_window / 2);
    for (int i = 0; i < n; ++i) {
        out[i].midpoint = mids[i];
        int m = std::min({h, i, n - 1 - i});
        double acc = 0.0;
        for (int j = i - m; j <= i + m; ++j) acc += sections[j].lambda;
        out[i].lambda = acc / (2 * m + 1);
    }
    return out;
}

Profile profile_from_shape(const StraightenedShape& shape,
                           double boundary_offset) {
    Profile prof;
    if (shape.stations.size() < 2) return prof;
    double total = shape.stations.back();
    size_t count = static_cast<size_t>(std::floor(total)) + 1;
    prof.station.reserve(count);
    prof.half_width.reserve(count);
    size_t seg = 0;
    for (size_t j = 0; j < count; ++j) {
        double x = static_cast<double>(j);
        while (seg + 1 < shape.stations.size() - 1 && shape.stations[seg + 1] < x)
            ++seg;
        double x0 = shape.stations[seg], x1 = shape.stations[seg + 1];
        double t = x1 > x0 ? std::clamp((x - x0) / (x1 - x0), 0.0, 1.0) : 0.0;
        double hw =
            shape.half_widths[seg] * (1.0 - t) + shape.half_widths[seg + 1] * t;
        prof.station.push_back(x);
        prof.half_width.push_back(hw + boundary_offset);
    }
    return prof;
}

}  // namespace unwrap::neutral
