// seamtrace: contour extraction from a rough initial curve.
//
// Exit codes: 0 success, 2 I/O, 3 initial curve, 4 seam cutting,
// 5 integration, 6 metrics, 7 synthetic data, 8 configuration/usage,
// 1 anything unexpected.

#include "seamtrace/commands.hpp"
#include "seamtrace/error.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

using namespace seamtrace;

namespace {

struct ConfigFlags {
    std::string config_file;
    std::optional<double> normalizer;
    std::optional<int> squares;
    std::optional<double> size_factor;
    std::optional<double> alpha;
    std::optional<int> window;
    std::optional<double> h;
    std::optional<int> knn;
    std::optional<std::string> score_variant;

    void attach(CLI::App* app) {
        app->add_option("--config", config_file, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--normalizer", normalizer, "error normalizer in pixels (overrides eye distance)");
        app->add_option("--squares", squares, "number of squares M");
        app->add_option("--size-factor", size_factor, "square side as a fraction of the bbox size");
        app->add_option("--alpha", alpha, "gradient weight of the guided seam");
        app->add_option("--window", window, "parabola fit window W");
        app->add_option("--h", h, "directionality support radius");
        app->add_option("--knn", knn, "walk neighbourhood size K");
        app->add_option("--score-variant", score_variant, "walk score: corrected | paper-literal");
    }

    Config resolve() const {
        Config cfg;
        if (!config_file.empty()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(read_text(config_file));
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(Stage::Config, "config file is not valid JSON: " + std::string(e.what()));
            }
            cfg = config_from_json(j, cfg);
        }
        nlohmann::json over = nlohmann::json::object();
        if (normalizer) over["normalizer"] = *normalizer;
        if (squares) over["square_count"] = *squares;
        if (size_factor) over["square_size_factor"] = *size_factor;
        if (alpha) over["alpha"] = *alpha;
        if (window) over["window"] = *window;
        if (h) over["h"] = *h;
        if (knn) over["K"] = *knn;
        if (score_variant) over["score_variant"] = *score_variant;
        cfg = config_from_json(over, cfg);
        cfg.validate();
        std::cerr << "config: " << config_to_json(cfg).dump() << "\n";
        return cfg;
    }
};

int default_jobs() {
    if (const char* env = std::getenv("SEAMTRACE_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
        throw Error(Stage::Config, "SEAMTRACE_JOBS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Contour extraction by local seam cutting and global integration"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);
    int jobs = 0;
    app.add_option("--jobs", jobs, "worker threads (default: SEAMTRACE_JOBS or all cores)")
        ->check(CLI::PositiveNumber);

    // extract
    auto* extract = app.add_subcommand("extract", "extract a contour from one image");
    ConfigFlags extract_flags;
    ExtractArgs ex;
    std::string ex_image, ex_ann, ex_out, ex_report;
    extract->add_option("image", ex_image, "PGM/PPM image")->required()->check(CLI::ExistingFile);
    extract->add_option("annotation", ex_ann, "annotation JSON")->required()->check(CLI::ExistingFile);
    extract->add_option("--out", ex_out, "contour JSON to write")->required();
    extract->add_option("--report", ex_report, "metrics JSON (default: <out>.report.json)");
    extract->add_flag("--timing", ex.timing, "record runtime_ms in the outputs");
    extract->add_flag("--seams", ex.seams, "include the local seams in the output");
    extract->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    extract_flags.attach(extract);

    // eval
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    std::string ev_pred, ev_truth, ev_out;
    std::optional<double> ev_norm;
    eval->add_option("pred", ev_pred, "prediction file or directory")->required()->check(CLI::ExistingPath);
    eval->add_option("truth", ev_truth, "annotation file or directory")->required()->check(CLI::ExistingPath);
    eval->add_option("--normalizer", ev_norm, "error normalizer in pixels (overrides eye distance)");
    eval->add_option("--out", ev_out, "CSV to write (default: stdout)");
    eval->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    // overlay
    auto* overlay = app.add_subcommand("overlay", "draw contours over an image");
    std::string ov_image, ov_out;
    std::vector<std::string> ov_contours;
    bool ov_seams = false;
    overlay->add_option("image", ov_image, "PGM/PPM image")->required()->check(CLI::ExistingFile);
    overlay->add_option("contours", ov_contours, "contour JSON or landmark text files")->check(CLI::ExistingFile);
    overlay->add_option("--out", ov_out, "PPM to write")->required();
    overlay->add_flag("--seams", ov_seams, "also draw local seams stored in the contour files");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run the pipeline over a corpus for a grid of values");
    ConfigFlags sweep_flags;
    std::string sw_corpus, sw_param, sw_out;
    std::vector<double> sw_values;
    bool sw_timing = false;
    sweep->add_option("corpus", sw_corpus, "corpus directory")->required()->check(CLI::ExistingDirectory);
    sweep->add_option("--param", sw_param, "config key to vary")->required();
    sweep->add_option("--values", sw_values, "grid values, comma separated")->required()->delimiter(',');
    sweep->add_option("--out", sw_out, "CSV to write (default: stdout)");
    sweep->add_flag("--timing", sw_timing, "record mean runtime");
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep_flags.attach(sweep);

    // synth
    auto* synth = app.add_subcommand("synth", "write a synthetic corpus");
    std::string sy_spec, sy_preset, sy_out;
    int sy_count = 0;
    std::optional<std::uint64_t> sy_seed;
    synth->add_option("spec", sy_spec, "spec JSON (preset reference or full spec)")->check(CLI::ExistingFile);
    synth->add_option("--preset", sy_preset, "clean | noisy | distractor | smooth");
    synth->add_option("--count", sy_count, "number of images")->required()->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", sy_seed, "corpus seed");
    synth->add_option("--out", sy_out, "output directory")->required();
    synth->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    // study
    auto* study = app.add_subcommand("study", "histogram of parabola fit errors of truth contours");
    std::string st_corpus, st_preset, st_out;
    int st_count = 100;
    std::uint64_t st_seed = 1;
    StudyConfig st_cfg;
    study->add_option("--corpus", st_corpus, "annotated corpus directory")->check(CLI::ExistingDirectory);
    study->add_option("--preset", st_preset, "generate truth contours from a preset instead");
    study->add_option("--count", st_count, "contours to generate with --preset");
    study->add_option("--seed", st_seed, "seed for --preset");
    study->add_option("--squares", st_cfg.square_count, "squares per contour");
    study->add_option("--size-factor", st_cfg.size_factor, "square side as a fraction of the bbox size");
    study->add_option("--bin-width", st_cfg.bin_width, "histogram bin width");
    study->add_option("--bins", st_cfg.bin_count, "number of histogram bins");
    study->add_option("--out", st_out, "CSV to write (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : static_cast<int>(Stage::Config);
    }
    if (jobs == 0) jobs = default_jobs();

    if (*extract) {
        ex.image = ex_image;
        ex.annotation = ex_ann;
        ex.out = ex_out;
        if (!ex_report.empty()) ex.report = ex_report;
        ex.config = extract_flags.resolve();
        ex.jobs = jobs;
        const auto outcome = cmd_extract(ex);
        if (outcome.report) {
            std::cerr << "dme " << format_double(outcome.report->at("dme").get<double>()) << "\n";
        }
    } else if (*eval) {
        Config cfg;
        cfg.normalizer = ev_norm;
        cfg.validate();
        std::cerr << "config: " << config_to_json(cfg).dump() << "\n";
        emit(ev_out, eval_csv(eval_rows(ev_pred, ev_truth, ev_norm, jobs), cfg));
    } else if (*overlay) {
        std::vector<fs::path> paths(ov_contours.begin(), ov_contours.end());
        const auto result = cmd_overlay(ov_image, paths, ov_seams, ov_out);
        if (result.clipped > 0) {
            std::cerr << "warning: " << result.clipped << " contour pixel(s) outside the image were clipped\n";
        }
    } else if (*sweep) {
        const Config cfg = sweep_flags.resolve();
        emit(sw_out, sweep_csv(sw_param, sweep_rows(sw_corpus, sw_param, sw_values, cfg, jobs, sw_timing), cfg));
    } else if (*synth) {
        nlohmann::json source;
        if (!sy_spec.empty() && !sy_preset.empty()) throw Error(Stage::Config, "give either a spec file or --preset");
        if (!sy_spec.empty()) {
            try {
                source = nlohmann::json::parse(read_text(sy_spec));
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(Stage::Synth, "spec is not valid JSON: " + std::string(e.what()));
            }
        } else if (!sy_preset.empty()) {
            source = {{"preset", sy_preset}};
        } else {
            throw Error(Stage::Config, "synth needs a spec file or --preset");
        }
        const auto manifest = cmd_synth(source, sy_count, sy_out, sy_seed, jobs);
        std::cerr << "wrote " << manifest.at("count").get<int>() << " image(s) to " << sy_out << "\n";
    } else if (*study) {
        if (st_corpus.empty() == st_preset.empty()) throw Error(Stage::Config, "study needs exactly one of --corpus or --preset");
        const auto samples = st_corpus.empty() ? study_samples_from_preset(preset_from_name(st_preset), st_count, st_seed)
                                               : study_samples_from_corpus(st_corpus);
        const StudyResult result = parabola_fit_study(samples, st_cfg);
        std::cerr << "segments " << result.errors.size() << ", within 0.05: "
                  << format_double(result.fraction_within(0.05)) << "\n";
        emit(st_out, study_csv(result, st_cfg));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "seamtrace: " << stage_name(e.stage()) << " error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "seamtrace: error: " << e.what() << "\n";
        return 1;
    }
}
