#include "seamtrace/commands.hpp"

#include "seamtrace/error.hpp"
#include "seamtrace/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace seamtrace {

std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

// -----------------------------------------------------------------------------
// Files
// -----------------------------------------------------------------------------

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Stage::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(Stage::Io, "cannot write '" + path.string() + "'");
    }
    fs::rename(tmp, path);
}

void write_text(const fs::path& path, const std::string& text) {
    write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

namespace {

nlohmann::json read_json(const fs::path& path, Stage stage) {
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(stage, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

nlohmann::json points_json(std::span<const Vec2> pts) {
    auto arr = nlohmann::json::array();
    for (const Vec2& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

std::vector<Vec2> points_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw Error(Stage::Io, what + " must be an array of [x, y]");
    std::vector<Vec2> out;
    out.reserve(j.size());
    for (const auto& p : j) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
            throw Error(Stage::Io, what + " must be an array of [x, y]");
        }
        out.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return out;
}

std::string csv_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

std::string config_comment(const Config& config) {
    return "# config: " + config_to_json(config).dump() + "\n";
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// -----------------------------------------------------------------------------
// Landmark text and rasterization
// -----------------------------------------------------------------------------

std::vector<Vec2> parse_landmarks_txt(const std::string& text, const std::string& source) {
    std::vector<Vec2> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        double x = 0.0, y = 0.0;
        std::string rest;
        if (!(ls >> x >> y) || (ls >> rest) || !std::isfinite(x) || !std::isfinite(y)) {
            throw Error(Stage::Io, source + ": malformed landmark on line " + std::to_string(lineno) + ": '" + line + "'");
        }
        out.push_back({x, y});
    }
    return out;
}

std::vector<Vec2> load_landmarks_txt(const fs::path& path) {
    return parse_landmarks_txt(read_text(path), path.string());
}

std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1) {
    std::vector<std::pair<int, int>> out;
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        out.emplace_back(x0, y0);
        if (x0 == x1 && y0 == y1) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
    return out;
}

std::vector<CorpusItem> list_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Stage::Io, "'" + dir.string() + "' is not a directory");
    std::vector<CorpusItem> items;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".pgm") continue;
        const fs::path ann = fs::path(entry.path()).replace_extension(".json");
        if (fs::exists(ann)) items.push_back({entry.path().stem().string(), entry.path(), ann});
    }
    std::sort(items.begin(), items.end(), [](const CorpusItem& a, const CorpusItem& b) { return a.stem < b.stem; });
    return items;
}

// -----------------------------------------------------------------------------
// extract
// -----------------------------------------------------------------------------

ExtractOutcome extract_documents(const ImageGrid& image, const Annotation& ann, const Config& config, int jobs,
                                 bool timing, bool seams) {
    const auto t0 = std::chrono::steady_clock::now();
    const PipelineResult result = run_pipeline(image, ann, config, jobs);
    const double ms = elapsed_ms(t0);

    ExtractOutcome out;
    out.contour["contour"] = points_json(result.contour.points());
    out.contour["config"] = config_to_json(config);
    out.contour["walk_points"] = result.walk.order.size();
    out.contour["cloud_points"] = result.cloud.size();
    if (seams) {
        auto arr = nlohmann::json::array();
        for (const SeamPath& s : result.seams) arr.push_back(points_json(s.global_points));
        out.contour["seams"] = arr;
    }
    if (timing) out.contour["runtime_ms"] = ms;

    if (ann.contour) {
        MetricsReport report = evaluate_contour(result.contour, ann, resolve_normalizer(config, ann));
        if (timing) report.runtime_ms = ms;
        nlohmann::json j = report_to_json(report);
        j["config"] = config_to_json(config);
        out.report = std::move(j);
    }
    return out;
}

ExtractOutcome cmd_extract(const ExtractArgs& args) {
    args.config.validate();
    const ImageGrid image = load_image(args.image);
    const Annotation ann = parse_annotation(args.annotation);
    ExtractOutcome out = extract_documents(image, ann, args.config, args.jobs, args.timing, args.seams);
    write_text(args.out, out.contour.dump(2) + "\n");
    if (out.report) {
        fs::path report = args.report.value_or(fs::path(args.out).replace_extension(".report.json"));
        write_text(report, out.report->dump(2) + "\n");
    }
    return out;
}

// -----------------------------------------------------------------------------
// eval
// -----------------------------------------------------------------------------

EvalRow evaluate_prediction(const fs::path& pred, const Annotation& truth, const std::optional<double>& normalizer) {
    if (!truth.contour) throw Error(Stage::Metrics, "ground truth for '" + pred.string() + "' has no contour");
    Config cfg;
    cfg.normalizer = normalizer;
    const double norm = resolve_normalizer(cfg, truth);

    EvalRow row;
    row.image = pred.stem().string();
    if (pred.extension() == ".txt") {
        const auto landmarks = load_landmarks_txt(pred);
        const Curve curve = landmarks_to_curve(landmarks);
        row.dme = dme(curve.points(), *truth.contour, norm);
        row.sme = sme(landmarks, truth.landmarks, norm);
        return row;
    }

    const nlohmann::json j = read_json(pred, Stage::Io);
    if (!j.contains("contour")) throw Error(Stage::Io, "'" + pred.string() + "' has no contour");
    const auto pts = dedupe_consecutive(points_from_json(j.at("contour"), "contour"));
    if (pts.empty()) throw Error(Stage::Metrics, "'" + pred.string() + "' has an empty contour");
    row.dme = dme(pts, *truth.contour, norm);
    if (j.contains("landmarks")) {
        row.sme = sme(points_from_json(j.at("landmarks"), "landmarks"), truth.landmarks, norm);
    } else if (truth.landmarks.size() >= 2 && pts.size() >= 2) {
        const auto est = curve_to_landmarks(Curve(pts), static_cast<int>(truth.landmarks.size()));
        row.sme = sme(est, truth.landmarks, norm);
    }
    if (j.contains("runtime_ms")) row.runtime_ms = j.at("runtime_ms").get<double>();
    return row;
}

namespace {

bool is_aux_json(const fs::path& p) {
    const std::string name = p.filename().string();
    return name == "manifest.json" || name.ends_with(".report.json");
}

std::map<std::string, fs::path> stems_in(const fs::path& dir, bool allow_txt) {
    std::map<std::string, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const fs::path& p = entry.path();
        const bool json = p.extension() == ".json" && !is_aux_json(p);
        const bool txt = allow_txt && p.extension() == ".txt";
        if (!json && !txt) continue;
        if (!out.emplace(p.stem().string(), p).second) {
            throw Error(Stage::Io, "two predictions share the stem '" + p.stem().string() + "'");
        }
    }
    return out;
}

}  // namespace

std::vector<EvalRow> eval_rows(const fs::path& pred, const fs::path& truth, const std::optional<double>& normalizer,
                               int jobs) {
    if (!fs::is_directory(pred)) {
        if (fs::is_directory(truth)) throw Error(Stage::Io, "a single prediction needs a single annotation file");
        return {evaluate_prediction(pred, parse_annotation(truth), normalizer)};
    }
    if (!fs::is_directory(truth)) throw Error(Stage::Io, "a prediction directory needs a truth directory");

    const auto preds = stems_in(pred, true);
    const auto truths = stems_in(truth, false);
    std::vector<std::pair<fs::path, fs::path>> pairs;
    std::vector<std::string> unmatched;
    for (const auto& [stem, p] : preds) {
        auto it = truths.find(stem);
        if (it == truths.end()) unmatched.push_back(p.filename().string());
        else pairs.emplace_back(p, it->second);
    }
    for (const auto& [stem, t] : truths) {
        if (!preds.count(stem)) unmatched.push_back(t.filename().string());
    }
    if (!unmatched.empty()) {
        std::string list;
        for (size_t k = 0; k < unmatched.size() && k < 5; ++k) list += (k ? ", " : "") + unmatched[k];
        if (unmatched.size() > 5) list += ", ...";
        throw Error(Stage::Io, std::to_string(unmatched.size()) + " unmatched file(s): " + list);
    }
    if (pairs.empty()) throw Error(Stage::Io, "no prediction/truth pairs found");

    std::vector<EvalRow> rows(pairs.size());
    parallel_for(pairs.size(), jobs, [&](size_t k) {
        rows[k] = evaluate_prediction(pairs[k].first, parse_annotation(pairs[k].second), normalizer);
    });
    return rows;
}

std::string eval_csv(const std::vector<EvalRow>& rows, const Config& config) {
    std::string out = config_comment(config);
    out += "image,dme,sme,runtime_ms\n";
    double dme_sum = 0.0, sme_sum = 0.0, rt_sum = 0.0;
    size_t sme_count = 0;
    for (const EvalRow& r : rows) {
        out += r.image + "," + format_double(r.dme) + "," + csv_optional(r.sme) + "," + format_double(r.runtime_ms) +
               "\n";
        dme_sum += r.dme;
        rt_sum += r.runtime_ms;
        if (r.sme) {
            sme_sum += *r.sme;
            ++sme_count;
        }
    }
    if (!rows.empty()) {
        const double n = static_cast<double>(rows.size());
        const std::optional<double> sme_mean =
            sme_count ? std::optional<double>(sme_sum / static_cast<double>(sme_count)) : std::nullopt;
        out += "mean," + format_double(dme_sum / n) + "," + csv_optional(sme_mean) + "," + format_double(rt_sum / n) +
               "\n";
    }
    return out;
}

// -----------------------------------------------------------------------------
// overlay
// -----------------------------------------------------------------------------

Rgb palette_color(size_t k) {
    static constexpr Rgb kPalette[] = {{255, 0, 0},   {0, 255, 0},   {0, 128, 255}, {255, 255, 0},
                                       {255, 0, 255}, {0, 255, 255}, {255, 128, 128}, {128, 255, 128}};
    return kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
}

namespace {

void draw_polyline(RgbImage& img, std::span<const Vec2> pts, Rgb color, int& clipped) {
    auto plot = [&](int x, int y) {
        if (x < 0 || y < 0 || x >= img.width || y >= img.height) {
            ++clipped;
            return;
        }
        img.set(x, y, color.r, color.g, color.b);
    };
    if (pts.empty()) return;
    auto px = [](double v) { return static_cast<int>(std::lround(v)); };
    if (pts.size() == 1) {
        plot(px(pts[0].x), px(pts[0].y));
        return;
    }
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const auto line = bresenham(px(pts[k].x), px(pts[k].y), px(pts[k + 1].x), px(pts[k + 1].y));
        // Segment starts coincide with the previous segment's end.
        for (size_t t = k == 0 ? 0 : 1; t < line.size(); ++t) plot(line[t].first, line[t].second);
    }
}

}  // namespace

OverlayResult render_overlay(const ImageGrid& image, const std::vector<std::vector<Vec2>>& contours,
                             const std::vector<std::vector<Vec2>>& seams) {
    OverlayResult out{to_rgb(image), 0};
    for (const auto& s : seams) draw_polyline(out.image, s, kSeamColor, out.clipped);
    for (size_t k = 0; k < contours.size(); ++k) draw_polyline(out.image, contours[k], palette_color(k), out.clipped);
    return out;
}

OverlayResult cmd_overlay(const fs::path& image, const std::vector<fs::path>& contours, bool draw_seams,
                          const fs::path& out) {
    const ImageGrid img = load_image(image);
    std::vector<std::vector<Vec2>> lines;
    std::vector<std::vector<Vec2>> seams;
    for (const fs::path& p : contours) {
        if (p.extension() == ".txt") {
            lines.push_back(load_landmarks_txt(p));
            continue;
        }
        const nlohmann::json j = read_json(p, Stage::Io);
        if (!j.contains("contour")) throw Error(Stage::Io, "'" + p.string() + "' has no contour");
        lines.push_back(points_from_json(j.at("contour"), "contour"));
        if (draw_seams && j.contains("seams")) {
            for (const auto& s : j.at("seams")) seams.push_back(points_from_json(s, "seam"));
        }
    }
    OverlayResult result = render_overlay(img, lines, seams);
    write_bytes(out, encode_ppm(result.image));
    return result;
}

// -----------------------------------------------------------------------------
// sweep
// -----------------------------------------------------------------------------

std::vector<SweepRow> sweep_rows(const fs::path& corpus, const std::string& param, const std::vector<double>& values,
                                 const Config& config, int jobs, bool timing) {
    if (values.empty()) throw Error(Stage::Config, "sweep grid is empty");
    const auto items = list_corpus(corpus);
    if (items.empty()) throw Error(Stage::Io, "corpus '" + corpus.string() + "' is empty");

    std::vector<Config> configs;
    for (double v : values) {
        Config c = config;
        set_config_value(c, param, v);
        c.validate();
        configs.push_back(c);
    }

    std::vector<ImageGrid> images;
    std::vector<Annotation> anns;
    for (const CorpusItem& it : items) {
        images.push_back(load_image(it.image));
        anns.push_back(parse_annotation(it.annotation));
    }

    const size_t n = items.size();
    std::vector<MetricsReport> reports(configs.size() * n);
    std::vector<double> runtimes(reports.size(), 0.0);
    parallel_for(reports.size(), jobs, [&](size_t idx) {
        const Config& c = configs[idx / n];
        const size_t k = idx % n;
        const auto t0 = std::chrono::steady_clock::now();
        const PipelineResult r = run_pipeline(images[k], anns[k], c, 1);
        if (timing) runtimes[idx] = elapsed_ms(t0);
        reports[idx] = evaluate_contour(r.contour, anns[k], resolve_normalizer(c, anns[k]));
    });

    std::vector<SweepRow> rows;
    for (size_t g = 0; g < configs.size(); ++g) {
        SweepRow row;
        row.value = values[g];
        double sme_sum = 0.0;
        size_t sme_count = 0;
        for (size_t k = 0; k < n; ++k) {
            const MetricsReport& rep = reports[g * n + k];
            row.mean_dme += rep.dme;
            row.mean_runtime_ms += runtimes[g * n + k];
            if (rep.sme) {
                sme_sum += *rep.sme;
                ++sme_count;
            }
        }
        row.mean_dme /= static_cast<double>(n);
        row.mean_runtime_ms /= static_cast<double>(n);
        if (sme_count) row.mean_sme = sme_sum / static_cast<double>(sme_count);
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows, const Config& config) {
    std::string out = config_comment(config);
    out += param + ",mean_dme,mean_sme,mean_runtime_ms\n";
    for (const SweepRow& r : rows) {
        out += format_double(r.value) + "," + format_double(r.mean_dme) + "," + csv_optional(r.mean_sme) + "," +
               format_double(r.mean_runtime_ms) + "\n";
    }
    return out;
}

// -----------------------------------------------------------------------------
// synth
// -----------------------------------------------------------------------------

std::vector<SynthSpec> synth_specs(const nlohmann::json& source, int count, std::optional<std::uint64_t> seed) {
    if (count < 0) throw Error(Stage::Synth, "count must be non-negative");
    if (!source.is_object()) throw Error(Stage::Synth, "synthetic spec must be a JSON object");
    std::vector<SynthSpec> specs;
    specs.reserve(static_cast<size_t>(count));
    if (source.contains("preset")) {
        Preset preset;
        std::uint64_t base = 1;
        try {
            preset = preset_from_name(source.at("preset").get<std::string>());
            base = seed.value_or(source.value("seed", std::uint64_t{1}));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Stage::Synth, std::string("synthetic spec: ") + e.what());
        }
        for (int k = 0; k < count; ++k) specs.push_back(preset_spec(preset, k, base));
    } else {
        const SynthSpec spec = spec_from_json(source);
        const std::uint64_t base = seed.value_or(spec.seed);
        for (int k = 0; k < count; ++k) {
            SynthSpec s = spec;
            s.seed = derive_seed(base, static_cast<std::uint64_t>(k));
            specs.push_back(s);
        }
    }
    return specs;
}

nlohmann::json cmd_synth(const nlohmann::json& source, int count, const fs::path& out,
                         std::optional<std::uint64_t> seed, int jobs) {
    const auto specs = synth_specs(source, count, seed);
    nlohmann::json resolved = source;
    if (seed) resolved["seed"] = *seed;
    return write_corpus(out, specs, jobs, resolved);
}

// -----------------------------------------------------------------------------
// study
// -----------------------------------------------------------------------------

std::vector<StudySample> study_samples_from_corpus(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Stage::Io, "'" + dir.string() + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".json" && !is_aux_json(entry.path())) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<StudySample> out;
    for (const fs::path& f : files) {
        const Annotation ann = parse_annotation(f);
        if (!ann.contour) throw Error(Stage::Metrics, "'" + f.string() + "' has no contour");
        out.push_back({Curve(dedupe_consecutive(*ann.contour)), ann.bbox});
    }
    if (out.empty()) throw Error(Stage::Io, "no annotations in '" + dir.string() + "'");
    return out;
}

std::vector<StudySample> study_samples_from_preset(Preset preset, int count, std::uint64_t seed) {
    if (count < 1) throw Error(Stage::Synth, "count must be positive");
    std::vector<StudySample> out;
    for (int k = 0; k < count; ++k) {
        const SynthResult r = gen_synthetic(preset_spec(preset, k, seed));
        out.push_back({Curve(r.inner_contour), r.annotation.bbox});
    }
    return out;
}

std::string study_csv(const StudyResult& result, const StudyConfig& config) {
    nlohmann::json cfg;
    cfg["square_count"] = config.square_count;
    cfg["square_size_factor"] = config.size_factor;
    cfg["bin_width"] = config.bin_width;
    cfg["bin_count"] = config.bin_count;
    cfg["resample_step"] = config.resample_step;
    std::string out = "# config: " + cfg.dump() + "\n";
    out += "# segments: " + std::to_string(result.errors.size()) + ", skipped: " + std::to_string(result.skipped) +
           ", within_0.05: " + format_double(result.fraction_within(0.05)) + "\n";
    out += "bin_lo,bin_hi,fraction,cumulative\n";
    for (size_t b = 0; b < result.histogram.size(); ++b) {
        out += format_double(result.bin_edges[b]) + "," + format_double(result.bin_edges[b + 1]) + "," +
               format_double(result.histogram[b]) + "," + format_double(result.cumulative[b]) + "\n";
    }
    return out;
}

}  // namespace seamtrace
