#include "seamtrace/synthbench.hpp"

#include "seamtrace/error.hpp"
#include "seamtrace/parallel.hpp"
#include "seamtrace/spline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>

namespace seamtrace {

// -----------------------------------------------------------------------------
// Random numbers and hashing
// -----------------------------------------------------------------------------

XorShift64Star::XorShift64Star(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ULL) {}

std::uint64_t XorShift64Star::next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
}

double XorShift64Star::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double XorShift64Star::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    return r * std::cos(2.0 * kPi * u2);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(const std::vector<std::uint8_t>& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// -----------------------------------------------------------------------------
// Spec serialization
// -----------------------------------------------------------------------------

namespace {

const char* family_name(ContourFamily f) {
    switch (f) {
        case ContourFamily::Parabola: return "parabola";
        case ContourFamily::EllipseArc: return "ellipse-arc";
        case ContourFamily::Spline: return "spline";
    }
    return "parabola";
}

ContourFamily family_from_name(const std::string& s) {
    if (s == "parabola") return ContourFamily::Parabola;
    if (s == "ellipse-arc") return ContourFamily::EllipseArc;
    if (s == "spline") return ContourFamily::Spline;
    throw Error(Stage::Synth, "unknown contour family '" + s + "'");
}

nlohmann::json vec_json(Vec2 v) { return {v.x, v.y}; }

Vec2 vec_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(Stage::Synth, "expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

nlohmann::json spec_to_json(const SynthSpec& s) {
    nlohmann::json j;
    j["width"] = s.width;
    j["height"] = s.height;
    j["family"] = family_name(s.family);
    j["vertex"] = vec_json(s.vertex);
    j["curvature"] = s.curvature;
    j["center"] = vec_json(s.center);
    j["radii"] = vec_json(s.radii);
    auto cps = nlohmann::json::array();
    for (Vec2 p : s.control_points) cps.push_back(vec_json(p));
    j["control_points"] = cps;
    j["span"] = {s.span_from, s.span_to};
    j["rotation"] = s.rotation;
    j["contrast"] = s.contrast;
    j["softness"] = s.softness;
    j["noise"] = s.noise;
    auto ds = nlohmann::json::array();
    for (const Distractor& d : s.distractors) {
        ds.push_back({{"kind", d.kind == Distractor::Kind::Stripe ? "stripe" : "blob"},
                      {"point", vec_json(d.point)},
                      {"angle", d.angle},
                      {"size", d.size},
                      {"intensity", d.intensity},
                      {"length", d.length}});
    }
    j["distractors"] = ds;
    if (s.occluder) {
        j["occluder"] = {{"from", s.occluder->from}, {"to", s.occluder->to}, {"radius", s.occluder->radius}};
    }
    j["landmark_count"] = s.landmark_count;
    j["eye_distance"] = s.eye_distance;
    j["init_offset"] = s.init_offset;
    j["init_jitter"] = s.init_jitter;
    j["size_factor"] = s.size_factor;
    j["seed"] = s.seed;
    return j;
}

SynthSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(Stage::Synth, "synthetic spec must be a JSON object");
    SynthSpec s;
    try {
        s.width = j.value("width", s.width);
        s.height = j.value("height", s.height);
        if (j.contains("family")) s.family = family_from_name(j.at("family").get<std::string>());
        if (j.contains("vertex")) s.vertex = vec_from(j.at("vertex"));
        s.curvature = j.value("curvature", s.curvature);
        if (j.contains("center")) s.center = vec_from(j.at("center"));
        if (j.contains("radii")) s.radii = vec_from(j.at("radii"));
        if (j.contains("control_points")) {
            for (const auto& p : j.at("control_points")) s.control_points.push_back(vec_from(p));
        }
        if (j.contains("span")) {
            const auto& sp = j.at("span");
            if (!sp.is_array() || sp.size() != 2) throw Error(Stage::Synth, "'span' must be [from, to]");
            s.span_from = sp[0].get<double>();
            s.span_to = sp[1].get<double>();
        }
        s.rotation = j.value("rotation", s.rotation);
        s.contrast = j.value("contrast", s.contrast);
        s.softness = j.value("softness", s.softness);
        s.noise = j.value("noise", s.noise);
        if (j.contains("distractors")) {
            for (const auto& d : j.at("distractors")) {
                Distractor out;
                const std::string kind = d.value("kind", std::string("stripe"));
                if (kind != "stripe" && kind != "blob") throw Error(Stage::Synth, "unknown distractor kind '" + kind + "'");
                out.kind = kind == "stripe" ? Distractor::Kind::Stripe : Distractor::Kind::Blob;
                if (d.contains("point")) out.point = vec_from(d.at("point"));
                out.angle = d.value("angle", out.angle);
                out.size = d.value("size", out.size);
                out.intensity = d.value("intensity", out.intensity);
                out.length = d.value("length", out.length);
                if (out.length < 0.0) throw Error(Stage::Synth, "distractor length must be non-negative");
                s.distractors.push_back(out);
            }
        }
        if (j.contains("occluder")) {
            const auto& o = j.at("occluder");
            Occluder occ;
            occ.from = o.value("from", occ.from);
            occ.to = o.value("to", occ.to);
            occ.radius = o.value("radius", occ.radius);
            s.occluder = occ;
        }
        s.landmark_count = j.value("landmark_count", s.landmark_count);
        s.eye_distance = j.value("eye_distance", s.eye_distance);
        s.init_offset = j.value("init_offset", s.init_offset);
        s.init_jitter = j.value("init_jitter", s.init_jitter);
        s.size_factor = j.value("size_factor", s.size_factor);
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Stage::Synth, std::string("synthetic spec: ") + e.what());
    }
    return s;
}

// -----------------------------------------------------------------------------
// Contour geometry
// -----------------------------------------------------------------------------

namespace {

/// Analytic contour in a local frame plus a rigid rotation about `pivot`.
class ContourModel {
public:
    explicit ContourModel(const SynthSpec& spec) : spec_(spec) {
        switch (spec.family) {
            case ContourFamily::Parabola: pivot_ = spec.vertex; break;
            case ContourFamily::EllipseArc: pivot_ = spec.center; break;
            case ContourFamily::Spline: {
                pivot_ = {spec.width / 2.0, spec.height / 2.0};
                if (spec.control_points.size() < 2) throw Error(Stage::Synth, "spline contour needs 2+ control points");
                std::vector<double> xs, ys;
                for (Vec2 p : spec.control_points) {
                    xs.push_back(p.x);
                    ys.push_back(p.y);
                }
                spline_.emplace(xs, ys);
                break;
            }
        }
        if (spec.family == ContourFamily::EllipseArc && (spec.radii.x <= 0.0 || spec.radii.y <= 0.0)) {
            throw Error(Stage::Synth, "ellipse radii must be positive");
        }
        cos_ = std::cos(spec.rotation);
        sin_ = std::sin(spec.rotation);
    }

    Vec2 point(double u) const { return to_global(local_point(u)); }

    /// True on the brighter (face) side.
    bool inside(Vec2 global) const {
        const Vec2 p = to_local(global);
        switch (spec_.family) {
            case ContourFamily::Parabola: return p.y < local_point(p.x).y;
            case ContourFamily::Spline: return p.y < (*spline_)(p.x);
            case ContourFamily::EllipseArc: {
                const double dx = (p.x - spec_.center.x) / spec_.radii.x;
                const double dy = (p.y - spec_.center.y) / spec_.radii.y;
                return dx * dx + dy * dy < 1.0;
            }
        }
        return false;
    }

    /// Dense polyline over [u0, u1] at spacing <= 1 px.
    std::vector<Vec2> polyline(double u0, double u1) const {
        constexpr int kFine = 20000;
        std::vector<Vec2> fine;
        fine.reserve(kFine + 1);
        for (int s = 0; s <= kFine; ++s) fine.push_back(point(u0 + (u1 - u0) * s / kFine));
        const Curve c(dedupe_consecutive(fine));
        const int n = static_cast<int>(std::ceil(c.length())) + 1;
        std::vector<Vec2> out;
        out.reserve(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) out.push_back(c.point_at(c.length() * k / (n - 1)));
        return out;
    }

    /// Parameter reached by walking `arc` px from u along direction sign.
    double advance(double u, double arc, double sign) const {
        const double du = sign * std::abs(spec_.span_to - spec_.span_from) / 20000.0;
        double acc = 0.0;
        Vec2 prev = point(u);
        for (int guard = 0; acc < arc && guard < 1'000'000; ++guard) {
            u += du;
            const Vec2 p = point(u);
            acc += distance(prev, p);
            prev = p;
        }
        return u;
    }

private:
    Vec2 local_point(double u) const {
        switch (spec_.family) {
            case ContourFamily::Parabola: {
                const double dx = u - spec_.vertex.x;
                return {u, spec_.vertex.y + spec_.curvature * dx * dx};
            }
            case ContourFamily::Spline: return {u, (*spline_)(u)};
            case ContourFamily::EllipseArc:
                return {spec_.center.x + spec_.radii.x * std::cos(u), spec_.center.y + spec_.radii.y * std::sin(u)};
        }
        return {};
    }

    Vec2 to_global(Vec2 p) const {
        const Vec2 d = p - pivot_;
        return {pivot_.x + cos_ * d.x - sin_ * d.y, pivot_.y + sin_ * d.x + cos_ * d.y};
    }

    Vec2 to_local(Vec2 g) const {
        const Vec2 d = g - pivot_;
        return {pivot_.x + cos_ * d.x + sin_ * d.y, pivot_.y - sin_ * d.x + cos_ * d.y};
    }

    const SynthSpec& spec_;
    Vec2 pivot_;
    std::optional<NaturalSpline> spline_;
    double cos_ = 1.0;
    double sin_ = 0.0;
};

void gaussian_blur(ImageGrid& img, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-0.5 * k * k / (sigma * sigma));
        kernel[static_cast<size_t>(k + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;

    ImageGrid tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<size_t>(k + radius)] * img.at(std::clamp(x + k, 0, img.width - 1), y);
            }
            tmp.at(x, y) = acc;
        }
    }
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k) {
                acc += kernel[static_cast<size_t>(k + radius)] * tmp.at(x, std::clamp(y + k, 0, img.height - 1));
            }
            img.at(x, y) = acc;
        }
    }
}

double polyline_distance_local(Vec2 p, const std::vector<Vec2>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k + 1 < poly.size(); ++k) best = std::min(best, point_segment_distance(p, poly[k], poly[k + 1]));
    return best;
}

}  // namespace

// -----------------------------------------------------------------------------
// Generation
// -----------------------------------------------------------------------------

SynthResult gen_synthetic(const SynthSpec& spec) {
    if (spec.width < 16 || spec.height < 16) throw Error(Stage::Synth, "synthetic image must be at least 16x16");
    if (spec.contrast < 0.0 || spec.contrast > 1.0) throw Error(Stage::Synth, "contrast must lie in [0, 1]");
    if (spec.landmark_count < 2) throw Error(Stage::Synth, "landmark_count must be at least 2");
    if (spec.softness < 0.0 || spec.noise < 0.0) throw Error(Stage::Synth, "softness and noise must be non-negative");
    if (!(spec.span_to != spec.span_from)) throw Error(Stage::Synth, "empty landmark span");

    const ContourModel model(spec);
    SynthResult out;
    out.inner_contour = model.polyline(spec.span_from, spec.span_to);
    const Curve inner(out.inner_contour);

    Annotation& ann = out.annotation;
    ann.bbox = default_bbox(out.inner_contour);
    const int side = square_side(spec.size_factor, ann.bbox);

    const double dir = spec.span_to > spec.span_from ? 1.0 : -1.0;
    const double u_lo = model.advance(spec.span_from, side, -dir);
    const double u_hi = model.advance(spec.span_to, side, dir);
    ann.contour = model.polyline(u_lo, u_hi);
    for (Vec2 p : *ann.contour) {
        if (p.x < side || p.y < side || p.x > spec.width - 1 - side || p.y > spec.height - 1 - side) {
            throw Error(Stage::Synth, "contour leaves the safe margin of one square side (" + std::to_string(side) + " px)");
        }
    }

    const int n = spec.landmark_count;
    for (int k = 0; k < n; ++k) ann.landmarks.push_back(inner.point_at(inner.length() * k / (n - 1)));

    if (spec.init_offset != 0.0 || spec.init_jitter != 0.0) {
        XorShift64Star rng(derive_seed(spec.seed, 1));
        std::vector<Vec2> init;
        for (int k = 0; k < n; ++k) {
            const double s = inner.length() * k / (n - 1);
            const double a = tangent_angle_at(inner, s);
            const Vec2 t{std::cos(a), std::sin(a)};
            const Vec2 nrm{-t.y, t.x};
            const double dn = spec.init_offset + spec.init_jitter * rng.normal();
            const double dt = spec.init_jitter * rng.normal();
            init.push_back(ann.landmarks[static_cast<size_t>(k)] + nrm * dn + t * dt);
        }
        ann.initial = std::move(init);
    }

    const double cx = ann.bbox.x + ann.bbox.w / 2.0;
    ann.left_eye = Vec2{cx - spec.eye_distance / 2.0, ann.bbox.y};
    ann.right_eye = Vec2{cx + spec.eye_distance / 2.0, ann.bbox.y};

    // Occluded stretch of the contour.
    std::vector<Vec2> occluded;
    Bbox occ_box{};
    if (spec.occluder) {
        const double s0 = inner.length() * std::clamp(spec.occluder->from, 0.0, 1.0);
        const double s1 = inner.length() * std::clamp(spec.occluder->to, 0.0, 1.0);
        for (double s = s0; s < s1; s += 0.5) occluded.push_back(inner.point_at(s));
        occluded.push_back(inner.point_at(s1));
        occ_box = default_bbox(occluded);
    }

    const double lo = 0.5 - spec.contrast / 2.0;
    const double hi = lo + spec.contrast;
    constexpr int kSuper = 4;
    ImageGrid& img = out.image;
    img = ImageGrid(spec.width, spec.height);
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            double acc = 0.0;
            for (int sy = 0; sy < kSuper; ++sy) {
                for (int sx = 0; sx < kSuper; ++sx) {
                    const Vec2 p{x - 0.5 + (sx + 0.5) / kSuper, y - 0.5 + (sy + 0.5) / kSuper};
                    double v = model.inside(p) ? hi : lo;
                    for (const Distractor& d : spec.distractors) {
                        if (d.kind == Distractor::Kind::Stripe) {
                            const Vec2 dir{std::cos(d.angle), std::sin(d.angle)};
                            const Vec2 nrm{-dir.y, dir.x};
                            const bool along = d.length == 0.0 || std::abs((p - d.point).dot(dir)) <= d.length / 2.0;
                            if (along && std::abs((p - d.point).dot(nrm)) <= d.size / 2.0) v = d.intensity;
                        } else if (distance(p, d.point) <= d.size) {
                            v = d.intensity;
                        }
                    }
                    if (!occluded.empty()) {
                        const double r = spec.occluder->radius;
                        const bool near_box = p.x >= occ_box.x - r && p.x <= occ_box.x + occ_box.w + r &&
                                              p.y >= occ_box.y - r && p.y <= occ_box.y + occ_box.h + r;
                        if (near_box && polyline_distance_local(p, occluded) <= r) v = hi;
                    }
                    acc += v;
                }
            }
            img.at(x, y) = acc / (kSuper * kSuper);
        }
    }

    if (spec.softness > 0.0) gaussian_blur(img, spec.softness);

    XorShift64Star rng(spec.seed);
    for (double& v : img.values) {
        if (spec.noise > 0.0) v += spec.noise * rng.normal();
        v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
    }
    return out;
}

// -----------------------------------------------------------------------------
// Presets
// -----------------------------------------------------------------------------

Preset preset_from_name(const std::string& name) {
    if (name == "clean") return Preset::Clean;
    if (name == "noisy") return Preset::Noisy;
    if (name == "distractor") return Preset::Distractor;
    if (name == "smooth") return Preset::Smooth;
    throw Error(Stage::Synth, "unknown preset '" + name + "'");
}

std::string preset_name(Preset preset) {
    switch (preset) {
        case Preset::Clean: return "clean";
        case Preset::Noisy: return "noisy";
        case Preset::Distractor: return "distractor";
        case Preset::Smooth: return "smooth";
    }
    return "clean";
}

namespace {

/// Chin-like contour of one of the three families, varied by `rng`.
void randomize_contour(SynthSpec& s, int family_index, XorShift64Star& rng) {
    switch (family_index % 3) {
        case 0:
            s.family = ContourFamily::Parabola;
            s.vertex = {rng.uniform(235.0, 265.0), rng.uniform(345.0, 370.0)};
            s.curvature = -rng.uniform(0.0035, 0.006);
            s.span_from = s.vertex.x - 120.0;
            s.span_to = s.vertex.x + 120.0;
            break;
        case 1:
            s.family = ContourFamily::EllipseArc;
            s.center = {rng.uniform(240.0, 260.0), rng.uniform(205.0, 225.0)};
            s.radii = {rng.uniform(115.0, 135.0), rng.uniform(135.0, 155.0)};
            s.span_from = rng.uniform(0.30, 0.45);
            s.span_to = kPi - rng.uniform(0.30, 0.45);
            break;
        default: {
            s.family = ContourFamily::Spline;
            s.control_points.clear();
            const double bottom = rng.uniform(350.0, 370.0);
            const double a = rng.uniform(0.0035, 0.0055);
            for (int k = 0; k < 7; ++k) {
                const double x = 130.0 + 40.0 * k;
                const double bump = k == 0 || k == 6 ? 0.0 : rng.uniform(-5.0, 5.0);
                s.control_points.push_back({x, bottom - a * (x - 250.0) * (x - 250.0) + bump});
            }
            s.span_from = 130.0;
            s.span_to = 370.0;
            break;
        }
    }
}

}  // namespace

SynthSpec preset_spec(Preset preset, int index, std::uint64_t seed) {
    XorShift64Star rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
    SynthSpec s;
    s.seed = derive_seed(seed ^ 0x5EEDULL, static_cast<std::uint64_t>(index));
    s.init_offset = 4.0;
    s.init_jitter = 2.0;
    switch (preset) {
        case Preset::Clean:
        case Preset::Noisy:
            randomize_contour(s, index, rng);
            s.contrast = 0.6;
            s.softness = 0.0;
            s.noise = preset == Preset::Noisy ? 0.05 : 0.0;
            break;
        case Preset::Smooth:
            randomize_contour(s, index, rng);
            s.contrast = 0.6;
            s.softness = 1.0;
            s.init_offset = 0.0;
            s.init_jitter = 0.0;
            break;
        case Preset::Distractor: {
            randomize_contour(s, 0, rng);
            s.contrast = 0.3;
            s.softness = 0.7;
            s.noise = 0.02;
            // Short brighter stripe crossing the contour at a shallow angle.
            const double x = s.vertex.x + rng.uniform(-70.0, 70.0);
            const double dx = x - s.vertex.x;
            const Vec2 on_curve{x, s.vertex.y + s.curvature * dx * dx};
            const double tangent = std::atan(2.0 * s.curvature * dx);
            const double tilt = rng.uniform(0.45, 0.65) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
            s.distractors.push_back({Distractor::Kind::Stripe, on_curve, tangent + tilt, 5.0, 1.0, 40.0});
            break;
        }
    }
    return s;
}

// -----------------------------------------------------------------------------
// Corpus output
// -----------------------------------------------------------------------------

nlohmann::json write_corpus(const std::filesystem::path& dir, const std::vector<SynthSpec>& specs, int jobs,
                            const nlohmann::json& source) {
    std::filesystem::create_directories(dir);
    std::vector<std::uint64_t> hashes(specs.size());
    parallel_for(specs.size(), jobs, [&](size_t k) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "%03zu", k);
        const SynthResult r = gen_synthetic(specs[k]);
        const auto bytes = encode_pgm(r.image);
        hashes[k] = fnv1a64(bytes);
        std::ofstream img(dir / (std::string(stem) + ".pgm"), std::ios::binary);
        img.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        std::ofstream ann(dir / (std::string(stem) + ".json"));
        ann << annotation_to_json(r.annotation).dump(2) << '\n';
        if (!img || !ann) throw Error(Stage::Io, "failed writing corpus item " + std::string(stem));
    });

    nlohmann::json manifest;
    manifest["count"] = specs.size();
    if (!source.is_null()) manifest["source"] = source;
    auto items = nlohmann::json::array();
    for (size_t k = 0; k < specs.size(); ++k) {
        char stem[32], hex[32];
        std::snprintf(stem, sizeof stem, "%03zu", k);
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hashes[k]));
        items.push_back({{"image", std::string(stem) + ".pgm"},
                         {"annotation", std::string(stem) + ".json"},
                         {"seed", specs[k].seed},
                         {"image_fnv1a64", hex},
                         {"spec", spec_to_json(specs[k])}});
    }
    manifest["items"] = items;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) throw Error(Stage::Io, "failed writing manifest");
    return manifest;
}

// -----------------------------------------------------------------------------
// Oracles
// -----------------------------------------------------------------------------

bool tie_break_precedes(std::span<const int> a, std::span<const int> b) {
    const size_t n = a.size();
    if (n == 0) return false;
    if (a[n - 1] != b[n - 1]) return a[n - 1] < b[n - 1];
    auto rank = [](int delta) { return delta == 0 ? 0 : (delta == -1 ? 1 : 2); };
    for (size_t i = n - 1; i > 0; --i) {
        // Columns at row i agree here; compare the step into row i.
        const int ra = rank(a[i - 1] - a[i]);
        const int rb = rank(b[i - 1] - b[i]);
        if (ra != rb) return ra < rb;
    }
    return false;
}

namespace {

constexpr int kMaxOracleRows = 12;

/// Depth-first enumeration of every monotone seam; `step` returns the running
/// score after appending row i given the path so far.
template <typename Step>
SeamPath enumerate_best(const ScalarField& grads, Step&& step) {
    if (grads.height < 1 || grads.width < 1) throw Error(Stage::SeamCut, "empty grid");
    if (grads.height > kMaxOracleRows) {
        throw Error(Stage::SeamCut, "N too large for exhaustive enumeration (max " + std::to_string(kMaxOracleRows) + " rows)");
    }
    const int rows = grads.height;
    const int cols = grads.width;
    std::vector<int> path(static_cast<size_t>(rows));
    std::vector<double> prefix(static_cast<size_t>(rows));
    SeamPath best;
    best.score = -std::numeric_limits<double>::infinity();

    std::function<void(int)> dfs = [&](int i) {
        prefix[static_cast<size_t>(i)] = step(i, path, i == 0 ? 0.0 : prefix[static_cast<size_t>(i) - 1]);
        if (i + 1 == rows) {
            const double s = prefix[static_cast<size_t>(i)];
            if (s > best.score || (s == best.score && tie_break_precedes(path, best.cols))) {
                best.score = s;
                best.cols = path;
            }
            return;
        }
        const int j = path[static_cast<size_t>(i)];
        for (int nj = std::max(0, j - 1); nj <= std::min(cols - 1, j + 1); ++nj) {
            path[static_cast<size_t>(i) + 1] = nj;
            dfs(i + 1);
        }
    };
    for (int j = 0; j < cols; ++j) {
        path[0] = j;
        dfs(0);
    }
    return best;
}

}  // namespace

SeamPath brute_force_seam(const ScalarField& grads) {
    return enumerate_best(grads, [&](int i, const std::vector<int>& path, double before) {
        const double g = grads.at(path[static_cast<size_t>(i)], i);
        return i == 0 ? g : before + g;
    });
}

SeamPath brute_force_guided_objective(const ScalarField& grads, const GuidedOptions& opts) {
    if (opts.window < 3) throw Error(Stage::SeamCut, "parabola window must be at least 3");
    std::vector<RowCol> window(static_cast<size_t>(opts.window));
    return enumerate_best(grads, [&](int i, const std::vector<int>& path, double before) {
        const int j = path[static_cast<size_t>(i)];
        double e = 0.0;
        if (i >= opts.window) {
            for (int r = i - opts.window; r < i; ++r) {
                window[static_cast<size_t>(r - (i - opts.window))] = {static_cast<double>(r),
                                                                       static_cast<double>(path[static_cast<size_t>(r)])};
            }
            e = parabola_error({static_cast<double>(i), static_cast<double>(j)}, fit_parabola(window), opts.d_norm,
                               opts.distance);
        }
        const double cell = cell_score(grads.at(j, i), e, i, opts);
        return i == 0 ? cell : before + cell;
    });
}

SeamPath brute_force_seam(const SquarePatch& patch) {
    SeamPath best = brute_force_seam(patch.grads);
    SeamPath out = seam_to_global(patch, std::move(best.cols));
    out.score = best.score;
    return out;
}

SeamPath brute_force_guided_objective(const SquarePatch& patch, const GuidedOptions& opts) {
    SeamPath best = brute_force_guided_objective(patch.grads, opts);
    SeamPath out = seam_to_global(patch, std::move(best.cols));
    out.score = best.score;
    return out;
}

}  // namespace seamtrace
