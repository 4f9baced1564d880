#include "genclust/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "genclust/render.hpp"
#include "genclust/runner.hpp"
#include "genclust/service.hpp"

namespace genclust {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

json read_json(const fs::path& path) {
    try {
        return json::parse(slurp(path));
    } catch (const json::exception& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

struct DataOptions {
    std::string path;
    std::size_t class_column = 0;
    std::size_t top_n = 0;
    bool normalize = false;

    void add(CLI::App& app) {
        app.add_option("--data", path, "Expression matrix (CSV or TSV)")->required()->check(CLI::ExistingFile);
        app.add_option("--class-column", class_column, "1-based column holding true class labels");
        app.add_option("--top-n", top_n, "Keep the N highest-variance genes");
        app.add_flag("--normalize", normalize, "Z-score each gene");
    }

    [[nodiscard]] ExpressionMatrix load() const {
        PreprocessConfig cfg;
        if (class_column > 0) {
            cfg.class_column = class_column;
        }
        if (top_n > 0) {
            cfg.top_n = top_n;
        }
        cfg.normalize = normalize;
        return preprocess(load_matrix(path, cfg.class_column), cfg);
    }
};

/// Column of the class label in a CSV written by to_csv.
std::optional<std::size_t> class_column_of(const ExpressionMatrix& m) {
    if (!m.has_true_labels()) {
        return std::nullopt;
    }
    return m.cols() + 2;
}

void print_field_errors(std::ostream& err, const std::vector<FieldError>& errors) {
    for (const auto& e : errors) {
        err << "error: " << (e.field.empty() ? "spec" : e.field) << ": " << e.message << '\n';
    }
}

int run_command(const DataOptions& data_opt, const std::string& config, const std::string& out_dir,
                bool no_timings, int workers, std::ostream& out, std::ostream& err) {
    const ExpressionMatrix data = data_opt.load();
    GridSpec spec;
    try {
        spec = GridSpec::from_json(read_json(config));
    } catch (const SpecError& e) {
        print_field_errors(err, e.errors());
        return 2;
    }
    if (workers > 0) {
        spec.workers = workers;
    }
    const fs::path dir(out_dir);
    spec.output_dir = dir;
    if (auto errors = validate_spec(spec, data.rows()); !errors.empty()) {
        print_field_errors(err, errors);
        return 2;
    }
    if (needs_truth(spec) && !data.has_true_labels()) {
        err << "error: external_indices: the dataset has no true labels (use --class-column)\n";
        return 2;
    }
    fs::create_directories(dir);
    write_csv(data, dir / "data.csv");

    const GridResult result = run_grid(data, spec);
    const bool timings = !no_timings;
    spit(dir / "report.json", result.report.to_json(timings).dump(2) + "\n");
    spit(dir / "report.csv", result.report.to_csv(timings));
    spit(dir / "curves.json", curves_to_json(result.curves).dump(2) + "\n");
    spit(dir / "spec.json", spec.to_json().dump(2) + "\n");

    json manifest;
    manifest["data"] = "data.csv";
    const auto cc = class_column_of(data);
    manifest["class_column"] = cc ? json(*cc) : json(nullptr);
    json best = json::object();
    for (const auto& [alg, part] : result.best_labels) {
        best[alg] = part.labels;
    }
    manifest["best_labels"] = best;
    json files = json::object();
    for (const auto& [alg, path] : result.label_files) {
        files[alg] = fs::relative(path, dir).generic_string();
    }
    manifest["label_files"] = files;
    spit(dir / "manifest.json", manifest.dump(2) + "\n");

    RenderOptions opt;
    for (const auto& [alg, part] : result.best_labels) {
        opt.title = "Heatmap: " + alg;
        spit(dir / ("heatmap_" + alg + ".svg"), render_heatmap(data, part, opt));
        opt.title = "Profiles: " + alg;
        spit(dir / ("profile_" + alg + ".svg"), render_profile(data, part, opt));
    }
    opt.title.clear();
    spit(dir / "index_curves.svg", render_index_curves(result.curves, opt));

    out << result.report.to_csv(timings);
    return 0;
}

struct RunDir {
    ExpressionMatrix data;
    std::map<std::string, Partition> labels;
};

RunDir open_run(const fs::path& dir) {
    const json manifest = read_json(dir / "manifest.json");
    std::optional<std::size_t> cc;
    if (manifest.contains("class_column") && manifest["class_column"].is_number_unsigned()) {
        cc = manifest["class_column"].get<std::size_t>();
    }
    RunDir run{load_matrix(dir / manifest.at("data").get<std::string>(), cc), {}};
    for (const auto& [alg, labels] : manifest.at("best_labels").items()) {
        run.labels.emplace(alg, make_partition(labels.get<std::vector<int>>()));
    }
    return run;
}

} // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Clustering comparison for gene-expression matrices", "genclust"};
    app.require_subcommand(1);

    DataOptions pre_data;
    std::string pre_out;
    auto* pre = app.add_subcommand("preprocess", "Filter and normalize a matrix, write CSV");
    pre_data.add(*pre);
    pre->add_option("--out", pre_out, "Output CSV (stdout when omitted)");

    DataOptions run_data;
    std::string run_config;
    std::string run_out;
    bool no_timings = false;
    int workers = 0;
    auto* run = app.add_subcommand("run", "Run a clustering grid");
    run_data.add(*run);
    run->add_option("--config", run_config, "Grid spec JSON")->required()->check(CLI::ExistingFile);
    run->add_option("--out", run_out, "Output directory")->required();
    run->add_flag("--no-timings", no_timings, "Omit timings and label paths from the report");
    run->add_option("--workers", workers, "Parallel grid cells")->check(CLI::PositiveNumber);

    std::string report_run;
    std::string report_format = "json";
    auto* report = app.add_subcommand("report", "Print the report of a finished run");
    report->add_option("--run", report_run, "Run directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--format", report_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    std::string render_kind;
    std::string render_run;
    std::string render_alg;
    int render_width = 800;
    int render_height = 600;
    auto* render = app.add_subcommand("render", "Write an SVG chart to stdout");
    render->add_option("--kind", render_kind, "heatmap, profile or index_curve")
        ->required()
        ->check(CLI::IsMember({"heatmap", "profile", "index_curve"}));
    render->add_option("--run", render_run, "Run directory")->required()->check(CLI::ExistingDirectory);
    render->add_option("--algorithm", render_alg, "Algorithm whose best partition is drawn");
    render->add_option("--width", render_width)->check(CLI::PositiveNumber);
    render->add_option("--height", render_height)->check(CLI::PositiveNumber);

    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    std::string serve_results = "results";
    auto* srv = app.add_subcommand("serve", "Serve the HTTP API");
    srv->add_option("--host", serve_host);
    srv->add_option("--port", serve_port)->check(CLI::Range(1, 65535));
    srv->add_option("--results", serve_results, "Directory for run outputs");

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        const int code = e.get_exit_code();
        (code == 0 ? out : err) << (code == 0 ? app.help() : std::string(e.what()) + "\n");
        return code == 0 ? 0 : 2;
    }

    try {
        if (*pre) {
            const auto m = pre_data.load();
            if (pre_out.empty()) {
                out << to_csv(m);
            } else {
                write_csv(m, pre_out);
            }
            return 0;
        }
        if (*run) {
            return run_command(run_data, run_config, run_out, no_timings, workers, out, err);
        }
        if (*report) {
            const json j = read_json(fs::path(report_run) / "report.json");
            if (report_format == "json") {
                out << j.dump(2) << '\n';
            } else {
                out << slurp(fs::path(report_run) / "report.csv");
            }
            return 0;
        }
        if (*render) {
            RenderOptions opt{render_width, render_height, {}};
            if (render_kind == "index_curve") {
                const auto curves = curves_from_json(read_json(fs::path(render_run) / "curves.json"));
                out << render_index_curves(curves, opt);
                return 0;
            }
            const auto dir = open_run(render_run);
            const auto it = dir.labels.find(render_alg);
            if (it == dir.labels.end()) {
                err << "error: --algorithm: no labels for '" << render_alg << "' in this run\n";
                return 2;
            }
            opt.title = (render_kind == "heatmap" ? "Heatmap: " : "Profiles: ") + render_alg;
            out << (render_kind == "heatmap" ? render_heatmap(dir.data, it->second, opt)
                                             : render_profile(dir.data, it->second, opt));
            return 0;
        }
        if (*srv) {
            out << "listening on " << serve_host << ':' << serve_port << std::endl;
            return serve(serve_host, serve_port, serve_results);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DegenerateError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace genclust
