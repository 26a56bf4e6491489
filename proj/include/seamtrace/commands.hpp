/**
 * @file commands.hpp
 * @brief The operations behind the command-line tool. Each writes plain
 *        files (JSON, CSV, PGM/PPM) and throws seamtrace::Error on failure.
 */
#pragma once

#include "seamtrace/imggrid.hpp"
#include "seamtrace/metrics.hpp"
#include "seamtrace/pipeline.hpp"
#include "seamtrace/synthbench.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace seamtrace {

namespace fs = std::filesystem;

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

/// "x y" per line; blank lines and '#' comments are skipped.
std::vector<Vec2> parse_landmarks_txt(const std::string& text, const std::string& source = "landmarks");
std::vector<Vec2> load_landmarks_txt(const fs::path& path);

/// Integer pixels of the line from `a` to `b`, both ends included.
std::vector<std::pair<int, int>> bresenham(int x0, int y0, int x1, int y1);

struct CorpusItem {
    std::string stem;
    fs::path image;
    fs::path annotation;
};

/// NNN.pgm files that have a matching NNN.json, sorted by stem.
std::vector<CorpusItem> list_corpus(const fs::path& dir);

// --- extract -------------------------------------------------------------------

struct ExtractArgs {
    fs::path image;
    fs::path annotation;
    fs::path out;
    std::optional<fs::path> report;  // defaults to <out stem>.report.json
    Config config;
    int jobs = 1;
    bool timing = false;
    bool seams = false;
};

struct ExtractOutcome {
    nlohmann::json contour;
    std::optional<nlohmann::json> report;
};

/// Runs the pipeline on one image and returns the output documents.
ExtractOutcome extract_documents(const ImageGrid& image, const Annotation& ann, const Config& config, int jobs,
                                 bool timing, bool seams);
/// Writes the contour file, plus the report when the annotation carries a contour.
ExtractOutcome cmd_extract(const ExtractArgs& args);

// --- eval ----------------------------------------------------------------------

struct EvalRow {
    std::string image;
    double dme = 0.0;
    std::optional<double> sme;
    double runtime_ms = 0.0;
};

/// Scores one prediction (contour JSON or landmark text) against an annotation.
EvalRow evaluate_prediction(const fs::path& pred, const Annotation& truth, const std::optional<double>& normalizer);

/// `pred` and `truth` are both files or both directories (matched by stem).
std::vector<EvalRow> eval_rows(const fs::path& pred, const fs::path& truth, const std::optional<double>& normalizer,
                               int jobs = 1);
std::string eval_csv(const std::vector<EvalRow>& rows, const Config& config);

// --- overlay -------------------------------------------------------------------

struct OverlayResult {
    RgbImage image;
    int clipped = 0;  // pixels that fell outside the image
};

struct Rgb {
    std::uint8_t r, g, b;
};

/// Colour of the k-th contour.
Rgb palette_color(size_t k);
inline constexpr Rgb kSeamColor{255, 160, 0};

/// Draws each polyline 1 px wide; seams first, contours on top.
OverlayResult render_overlay(const ImageGrid& image, const std::vector<std::vector<Vec2>>& contours,
                             const std::vector<std::vector<Vec2>>& seams = {});
/// Contour files are extract JSON or landmark text.
OverlayResult cmd_overlay(const fs::path& image, const std::vector<fs::path>& contours, bool draw_seams,
                          const fs::path& out);

// --- sweep ---------------------------------------------------------------------

struct SweepRow {
    double value = 0.0;
    double mean_dme = 0.0;
    std::optional<double> mean_sme;
    double mean_runtime_ms = 0.0;
};

std::vector<SweepRow> sweep_rows(const fs::path& corpus, const std::string& param, const std::vector<double>& values,
                                 const Config& config, int jobs = 1, bool timing = false);
std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows, const Config& config);

// --- synth ---------------------------------------------------------------------

/// Either {"preset": name, "seed": s} or a full synthetic spec; `seed` overrides.
std::vector<SynthSpec> synth_specs(const nlohmann::json& source, int count, std::optional<std::uint64_t> seed);
nlohmann::json cmd_synth(const nlohmann::json& source, int count, const fs::path& out,
                         std::optional<std::uint64_t> seed, int jobs = 1);

// --- study ---------------------------------------------------------------------

/// Annotated corpus contours as study samples.
std::vector<StudySample> study_samples_from_corpus(const fs::path& dir);
/// Dense truth contours of a generated preset corpus (no files written).
std::vector<StudySample> study_samples_from_preset(Preset preset, int count, std::uint64_t seed);
std::string study_csv(const StudyResult& result, const StudyConfig& config);

// --- files ---------------------------------------------------------------------

std::string read_text(const fs::path& path);
/// Writes via a temporary file and rename.
void write_text(const fs::path& path, const std::string& text);
void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace seamtrace
