#include "genclust/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "genclust/random.hpp"

namespace genclust {

namespace {

constexpr std::string_view kAlgorithmNames[] = {"kmeans", "fcm", "hier", "mocsvm"};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
void parallel_for(std::size_t count, int workers, F&& body) {
    const auto threads = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                body(i);
            }
        });
    }
}

std::string join_errors(const std::vector<FieldError>& errors) {
    std::string out = "invalid grid spec:";
    for (const auto& e : errors) {
        out += " " + e.field + ": " + e.message + ";";
    }
    return out;
}

// Reads an optional field, recording a type error instead of throwing.
template <typename T>
void read_field(const json& obj, const std::string& key, const std::string& path, T& out,
                std::vector<FieldError>& errors) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return;
    }
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) {
                throw std::runtime_error("expected a boolean");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) {
                throw std::runtime_error("expected an integer");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) {
                throw std::runtime_error("expected a number");
            }
        } else {
            if (!it->is_string()) {
                throw std::runtime_error("expected a string");
            }
        }
        out = it->get<T>();
    } catch (const std::exception& e) {
        errors.push_back({path + key, e.what()});
    }
}

IndexSpec parse_index(const json& j, const std::string& field, std::vector<FieldError>& errors) {
    try {
        if (j.is_string()) {
            return IndexSpec::parse(j.get<std::string>());
        }
        if (j.is_object() && j.contains("name") && j["name"].is_string()) {
            IndexSpec spec = IndexSpec::parse(j["name"].get<std::string>());
            read_field(j, "p", field + ".", spec.p, errors);
            return spec;
        }
        errors.push_back({field, "expected an index name"});
    } catch (const Error& e) {
        errors.push_back({field, e.what()});
    }
    return {};
}

json index_json(const IndexSpec& spec) {
    if (spec.name == IndexName::I) {
        return json{{"name", spec.canonical()}, {"p", spec.p}};
    }
    return spec.canonical();
}

json optional_number(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string csv_number(const std::optional<double>& v) {
    if (!v) {
        return "";
    }
    std::ostringstream out;
    out << std::setprecision(17) << *v;
    return out.str();
}

} // namespace

Algorithm parse_algorithm(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kAlgorithmNames); ++i) {
        if (kAlgorithmNames[i] == name) {
            return static_cast<Algorithm>(i);
        }
    }
    throw Error("unknown algorithm '" + std::string(name) + "'");
}

std::string algorithm_name(Algorithm a) {
    return std::string(kAlgorithmNames[static_cast<std::size_t>(a)]);
}

SpecError::SpecError(std::vector<FieldError> errors) : Error(join_errors(errors)), errors_(std::move(errors)) {}

GridSpec GridSpec::from_json(const json& j) {
    std::vector<FieldError> errors;
    GridSpec spec;
    if (!j.is_object()) {
        throw SpecError(std::vector<FieldError>{{"", "grid spec must be a JSON object"}});
    }

    if (!j.contains("algorithms") || !j["algorithms"].is_array()) {
        errors.push_back({"algorithms", "expected an array of algorithm names or objects"});
    } else {
        const auto& algs = j["algorithms"];
        for (std::size_t i = 0; i < algs.size(); ++i) {
            const std::string path = "algorithms[" + std::to_string(i) + "]";
            const auto& entry = algs[i];
            AlgorithmConfig cfg;
            std::string name;
            if (entry.is_string()) {
                name = entry.get<std::string>();
            } else if (entry.is_object() && entry.contains("name") && entry["name"].is_string()) {
                name = entry["name"].get<std::string>();
            } else {
                errors.push_back({path, "expected an algorithm name or object with 'name'"});
                continue;
            }
            try {
                cfg.algorithm = parse_algorithm(name);
            } catch (const Error& e) {
                errors.push_back({path + ".name", e.what()});
                continue;
            }
            if (entry.is_object()) {
                const std::string prefix = path + ".";
                read_field(entry, "max_iters", prefix, cfg.max_iters, errors);
                read_field(entry, "tol", prefix, cfg.tol, errors);
                read_field(entry, "m", prefix, cfg.fuzzifier, errors);
                read_field(entry, "metric", prefix, cfg.metric, errors);
                std::string linkage = linkage_name(cfg.linkage);
                read_field(entry, "linkage", prefix, linkage, errors);
                try {
                    cfg.linkage = parse_linkage(linkage);
                } catch (const Error& e) {
                    errors.push_back({prefix + "linkage", e.what()});
                }
                read_field(entry, "population_size", prefix, cfg.ga.population_size, errors);
                read_field(entry, "generations", prefix, cfg.ga.generations, errors);
                read_field(entry, "p_crossover", prefix, cfg.ga.p_crossover, errors);
                read_field(entry, "p_mutation", prefix, cfg.ga.p_mutation, errors);
                read_field(entry, "alpha", prefix, cfg.ga.alpha, errors);
                read_field(entry, "beta", prefix, cfg.ga.beta, errors);
                read_field(entry, "svm_weight", prefix, cfg.ga.svm_weight, errors);
                read_field(entry, "svm_epochs", prefix, cfg.ga.svm_epochs, errors);
                if (cfg.algorithm == Algorithm::MocSvm) {
                    read_field(entry, "m", prefix, cfg.ga.fuzzifier, errors);
                }
            }
            spec.algorithms.push_back(cfg);
        }
    }

    read_field(j, "k_min", "", spec.k_min, errors);
    read_field(j, "k_max", "", spec.k_max, errors);
    read_field(j, "iterations", "", spec.iterations, errors);
    read_field(j, "base_seed", "", spec.base_seed, errors);
    read_field(j, "workers", "", spec.workers, errors);
    std::string out_dir;
    read_field(j, "output_dir", "", out_dir, errors);
    spec.output_dir = out_dir;

    if (!j.contains("internal_index")) {
        errors.push_back({"internal_index", "required"});
    } else {
        spec.internal_index = parse_index(j["internal_index"], "internal_index", errors);
    }
    if (j.contains("external_indices") && !j["external_indices"].is_null()) {
        if (!j["external_indices"].is_array()) {
            errors.push_back({"external_indices", "expected an array"});
        } else {
            const auto& ext = j["external_indices"];
            for (std::size_t i = 0; i < ext.size(); ++i) {
                spec.external_indices.push_back(
                    parse_index(ext[i], "external_indices[" + std::to_string(i) + "]", errors));
            }
        }
    }
    if (!errors.empty()) {
        throw SpecError(std::move(errors));
    }
    return spec;
}

json GridSpec::to_json() const {
    json algs = json::array();
    for (const auto& a : algorithms) {
        json e{{"name", a.name()}};
        switch (a.algorithm) {
        case Algorithm::KMeans:
            e["max_iters"] = a.max_iters;
            e["tol"] = a.tol;
            break;
        case Algorithm::Fcm:
            e["max_iters"] = a.max_iters;
            e["tol"] = a.tol;
            e["m"] = a.fuzzifier;
            break;
        case Algorithm::Hierarchical:
            e["metric"] = a.metric;
            e["linkage"] = linkage_name(a.linkage);
            break;
        case Algorithm::MocSvm:
            e["population_size"] = a.ga.population_size;
            e["generations"] = a.ga.generations;
            e["p_crossover"] = a.ga.p_crossover;
            e["p_mutation"] = a.ga.p_mutation;
            e["alpha"] = a.ga.alpha;
            e["beta"] = a.ga.beta;
            e["svm_weight"] = a.ga.svm_weight;
            e["svm_epochs"] = a.ga.svm_epochs;
            e["m"] = a.ga.fuzzifier;
            break;
        }
        algs.push_back(std::move(e));
    }
    json ext = json::array();
    for (const auto& e : external_indices) {
        ext.push_back(index_json(e));
    }
    return json{{"algorithms", algs},
                {"k_min", k_min},
                {"k_max", k_max},
                {"iterations", iterations},
                {"internal_index", index_json(internal_index)},
                {"external_indices", ext},
                {"base_seed", base_seed},
                {"output_dir", output_dir.string()},
                {"workers", workers}};
}

std::vector<FieldError> validate_spec(const GridSpec& spec, std::size_t rows) {
    std::vector<FieldError> errors;
    if (spec.algorithms.empty()) {
        errors.push_back({"algorithms", "at least one algorithm is required"});
    }
    if (spec.k_min < 2) {
        errors.push_back({"k_min", "must be at least 2"});
    }
    if (spec.k_max < spec.k_min) {
        errors.push_back({"k_max", "must be at least k_min"});
    }
    if (spec.k_max > 0 && static_cast<std::size_t>(spec.k_max) > rows) {
        errors.push_back({"k_max", "exceeds the number of objects (" + std::to_string(rows) + ")"});
    }
    if (spec.iterations < 1) {
        errors.push_back({"iterations", "must be positive"});
    }
    if (spec.workers < 1) {
        errors.push_back({"workers", "must be positive"});
    }
    if (!spec.internal_index.internal()) {
        errors.push_back({"internal_index", "'" + spec.internal_index.canonical() + "' is not an internal index"});
    }
    for (std::size_t i = 0; i < spec.external_indices.size(); ++i) {
        if (spec.external_indices[i].internal()) {
            errors.push_back({"external_indices[" + std::to_string(i) + "]",
                              "'" + spec.external_indices[i].canonical() + "' is not an external index"});
        }
    }
    for (std::size_t i = 0; i < spec.algorithms.size(); ++i) {
        const auto& a = spec.algorithms[i];
        const std::string path = "algorithms[" + std::to_string(i) + "].";
        if (a.max_iters < 1) {
            errors.push_back({path + "max_iters", "must be positive"});
        }
        if (!(a.tol >= 0.0)) {
            errors.push_back({path + "tol", "must be non-negative"});
        }
        if (a.algorithm == Algorithm::Fcm && !(a.fuzzifier > 1.0)) {
            errors.push_back({path + "m", "must be greater than 1"});
        }
        if (a.algorithm == Algorithm::Hierarchical) {
            try {
                const auto metric = Metric::parse(a.metric);
                if (is_geometric(a.linkage) && metric.kind() != MetricKind::Euclidean) {
                    errors.push_back({path + "linkage", "'" + linkage_name(a.linkage) +
                                                            "' linkage requires the euclidean metric"});
                }
            } catch (const Error& e) {
                errors.push_back({path + "metric", e.what()});
            }
        }
        if (a.algorithm == Algorithm::MocSvm) {
            try {
                a.ga.validate();
            } catch (const Error& e) {
                errors.push_back({path + "ga", e.what()});
            }
        }
    }
    return errors;
}

bool needs_truth(const GridSpec& spec) noexcept {
    return !spec.external_indices.empty();
}

ClusterOutcome cluster_once(const Matrix& data, const AlgorithmConfig& cfg, int k, std::uint64_t seed,
                            const Dendrogram* tree) {
    ClusterOutcome out;
    switch (cfg.algorithm) {
    case Algorithm::KMeans: {
        RunConfig rc{k, cfg.max_iters, cfg.tol, seed, cfg.fuzzifier};
        out.partition = kmeans_run(data, rc).partition;
        break;
    }
    case Algorithm::Fcm: {
        RunConfig rc{k, cfg.max_iters, cfg.tol, seed, cfg.fuzzifier};
        auto r = fcm_run(data, rc);
        out.partition = std::move(r.partition);
        out.fuzzy = FuzzyState{std::move(r.membership), std::move(r.centers)};
        break;
    }
    case Algorithm::Hierarchical: {
        if (tree != nullptr) {
            out.partition = cut_tree(*tree, static_cast<std::size_t>(k));
        } else {
            const auto metric = Metric::parse(cfg.metric);
            const auto built = linkage_build(pairwise(metric, data), cfg.linkage, metric.kind());
            out.partition = cut_tree(built, static_cast<std::size_t>(k));
        }
        break;
    }
    case Algorithm::MocSvm: {
        GaConfig ga = cfg.ga;
        ga.seed = seed;
        auto r = mocsvm_run(data, k, ga);
        out.partition = std::move(r.partition);
        out.fallback = r.fallback;
        out.note = r.fallback_reason;
        break;
    }
    }
    return out;
}

std::size_t best_of(std::span<const ScoredCell> cells, Direction direction) {
    if (cells.empty()) {
        throw Error("best_of: no cells");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& c = cells[i];
        const auto& b = cells[best];
        const bool better = direction == Direction::Maximize ? c.value > b.value : c.value < b.value;
        const bool tie = c.value == b.value &&
                         (c.k < b.k || (c.k == b.k && c.iteration < b.iteration));
        if (better || tie) {
            best = i;
        }
    }
    return best;
}

json ReportTable::to_json(bool timings) const {
    json internal_rows = json::array();
    for (const auto& r : internal) {
        json row{{"algorithm", r.algorithm},
                 {"index", r.index},
                 {"value", optional_number(r.value)},
                 {"k", r.k},
                 {"clusters", r.clusters},
                 {"iteration", r.iteration},
                 {"status", r.failed ? "failed" : "ok"}};
        if (r.fallback) {
            row["fallback"] = true;
        }
        if (!r.error.empty()) {
            row["error"] = r.error;
        }
        if (timings) {
            row["seconds"] = r.seconds;
            row["label_file"] = r.label_file;
        }
        internal_rows.push_back(std::move(row));
    }
    json out{{"internal_index", internal_index}, {"internal", internal_rows}};
    if (external) {
        json ext = json::array();
        for (const auto& r : *external) {
            json row{{"algorithm", r.algorithm}, {"index", r.index}, {"value", optional_number(r.value)}};
            if (!r.error.empty()) {
                row["error"] = r.error;
            }
            if (timings) {
                row["seconds"] = r.seconds;
            }
            ext.push_back(std::move(row));
        }
        out["external"] = std::move(ext);
    }
    return out;
}

std::string ReportTable::to_csv(bool timings) const {
    std::ostringstream out;
    out << "table,algorithm,index,value,k,clusters,status" << (timings ? ",seconds" : "") << '\n';
    for (const auto& r : internal) {
        out << "internal," << r.algorithm << ',' << r.index << ',' << csv_number(r.value) << ',' << r.k << ','
            << r.clusters << ',' << (r.failed ? "failed" : "ok");
        if (timings) {
            out << ',' << csv_number(r.seconds);
        }
        out << '\n';
    }
    if (external) {
        for (const auto& r : *external) {
            out << "external," << r.algorithm << ',' << r.index << ',' << csv_number(r.value) << ",,,"
                << (r.error.empty() ? "ok" : "failed");
            if (timings) {
                out << ',' << csv_number(r.seconds);
            }
            out << '\n';
        }
    }
    return out.str();
}

void ReportTable::merge(const ReportTable& other) {
    auto replace = [](auto& rows, const auto& incoming) {
        for (const auto& row : incoming) {
            std::erase_if(rows, [&](const auto& r) { return r.algorithm == row.algorithm && r.index == row.index; });
        }
        rows.insert(rows.end(), incoming.begin(), incoming.end());
    };
    internal_index = other.internal_index;
    replace(internal, other.internal);
    if (other.external) {
        if (!external) {
            external.emplace();
        }
        replace(*external, *other.external);
    }
}

json curves_to_json(std::span<const IndexCurve> curves) {
    json out = json::array();
    for (const auto& c : curves) {
        json points = json::array();
        for (const auto& p : c.points) {
            json pt{{"k", p.k}, {"value", optional_number(p.value)}};
            if (!p.value) {
                pt["excluded"] = p.excluded_reason;
            }
            points.push_back(std::move(pt));
        }
        out.push_back({{"algorithm", c.algorithm}, {"index", c.index}, {"points", points}});
    }
    return out;
}

std::vector<IndexCurve> curves_from_json(const json& j) {
    std::vector<IndexCurve> out;
    for (const auto& c : j) {
        IndexCurve curve{c.at("algorithm").get<std::string>(), c.at("index").get<std::string>(), {}};
        for (const auto& p : c.at("points")) {
            CurvePoint pt{p.at("k").get<int>(), std::nullopt, p.value("excluded", "")};
            if (!p.at("value").is_null()) {
                pt.value = p.at("value").get<double>();
            }
            curve.points.push_back(std::move(pt));
        }
        out.push_back(std::move(curve));
    }
    return out;
}

namespace {

struct CellRecord {
    int k = 0;
    int iteration = 0;
    std::optional<double> value;
    std::string error;
    ClusterOutcome outcome;
};

} // namespace

GridResult run_grid(const ExpressionMatrix& expr, const GridSpec& spec) {
    if (auto errors = validate_spec(spec, expr.rows()); !errors.empty()) {
        throw SpecError(std::move(errors));
    }
    if (needs_truth(spec) && !expr.has_true_labels()) {
        throw Error("external indices requested but the dataset has no true labels");
    }
    const Matrix& data = expr.values();
    GridResult result;
    result.report.internal_index = spec.internal_index.canonical();
    if (expr.has_true_labels()) {
        result.report.external.emplace();
    }
    const int k_count = spec.k_max - spec.k_min + 1;

    for (const auto& alg : spec.algorithms) {
        const std::string name = alg.name();
        const auto alg_start = Clock::now();

        // Hierarchical clustering is deterministic: one tree, one pass.
        std::optional<Dendrogram> tree;
        std::string tree_error;
        int iterations = spec.iterations;
        if (alg.algorithm == Algorithm::Hierarchical) {
            iterations = 1;
            try {
                const auto metric = Metric::parse(alg.metric);
                tree = linkage_build(pairwise(metric, data), alg.linkage, metric.kind());
            } catch (const Error& e) {
                tree_error = e.what();
            }
        }

        std::vector<CellRecord> cells(static_cast<std::size_t>(iterations * k_count));
        parallel_for(cells.size(), spec.workers, [&](std::size_t idx) {
            auto& cell = cells[idx];
            cell.iteration = static_cast<int>(idx) / k_count;
            cell.k = spec.k_min + static_cast<int>(idx) % k_count;
            try {
                if (alg.algorithm == Algorithm::Hierarchical && !tree) {
                    throw Error(tree_error);
                }
                const auto seed = derive_seed(spec.base_seed, name, static_cast<std::uint64_t>(cell.k),
                                              static_cast<std::uint64_t>(cell.iteration));
                cell.outcome = cluster_once(data, alg, cell.k, seed, tree ? &*tree : nullptr);
                if (cell.outcome.partition.k < cell.k) {
                    throw DegenerateError("partition has " + std::to_string(cell.outcome.partition.k) + " of " +
                                          std::to_string(cell.k) + " clusters");
                }
                cell.value = evaluate_internal(spec.internal_index, data, cell.outcome.partition, cell.outcome.fuzzy);
                if (!std::isfinite(*cell.value)) {
                    cell.value.reset();
                    throw DegenerateError("index value is not finite");
                }
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        });

        // Per-iteration best, then best across iterations.
        std::vector<std::size_t> winners;
        std::vector<ScoredCell> winner_scores;
        for (int it = 0; it < iterations; ++it) {
            std::vector<ScoredCell> scored;
            std::vector<std::size_t> where;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].iteration == it && cells[i].value) {
                    scored.push_back({cells[i].k, *cells[i].value, it});
                    where.push_back(i);
                }
            }
            if (!scored.empty()) {
                const auto b = best_of(scored, spec.internal_index.direction());
                winners.push_back(where[b]);
                winner_scores.push_back(scored[b]);
            }
        }

        IndexCurve curve{name, spec.internal_index.canonical(), {}};
        for (int k = spec.k_min; k <= spec.k_max; ++k) {
            CurvePoint pt{k, std::nullopt, ""};
            for (const auto& c : cells) {
                if (c.k != k) {
                    continue;
                }
                if (c.value) {
                    if (!pt.value || spec.internal_index.better(*c.value, *pt.value)) {
                        pt.value = c.value;
                    }
                } else if (pt.excluded_reason.empty()) {
                    pt.excluded_reason = c.error;
                }
            }
            if (pt.value) {
                pt.excluded_reason.clear();
            }
            curve.points.push_back(std::move(pt));
        }
        result.curves.push_back(std::move(curve));

        InternalRow row;
        row.algorithm = name;
        row.index = spec.internal_index.canonical();
        const double elapsed = seconds_since(alg_start);
        if (winners.empty()) {
            row.failed = true;
            row.error = cells.empty() ? "no cells" : cells.front().error;
            row.seconds = elapsed;
            result.report.internal.push_back(std::move(row));
            continue;
        }
        const auto& best = cells[winners[best_of(winner_scores, spec.internal_index.direction())]];
        row.value = best.value;
        row.k = best.k;
        row.clusters = best.outcome.partition.k;
        row.iteration = best.iteration;
        row.fallback = best.outcome.fallback;
        if (best.outcome.fallback) {
            row.error = best.outcome.note;
        }
        row.seconds = elapsed;
        if (!spec.output_dir.empty()) {
            const auto path = persist_labels(best.outcome.partition.labels, spec.output_dir / "labels",
                                             name + "_k" + std::to_string(best.k) + "_" + row.index);
            row.label_file = path.string();
            result.label_files[name] = path;
        }
        result.best_labels[name] = best.outcome.partition;

        if (result.report.external) {
            for (const auto& ext : spec.external_indices) {
                ExternalRow er{name, ext.canonical(), std::nullopt, "", 0.0};
                const auto start = Clock::now();
                try {
                    er.value = evaluate_external(ext, *expr.true_labels(), best.outcome.partition.labels);
                } catch (const Error& e) {
                    er.error = e.what();
                }
                er.seconds = seconds_since(start);
                result.report.external->push_back(std::move(er));
            }
        }
        result.report.internal.push_back(std::move(row));
    }
    return result;
}

namespace {

std::mutex& persist_mutex() {
    static std::mutex m;
    return m;
}

} // namespace

std::filesystem::path persist_labels(std::span<const int> labels, const std::filesystem::path& dir,
                                     const std::string& run_id) {
    std::lock_guard lock(persist_mutex());
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw Error("cannot create label directory " + dir.string() + ": " + ec.message());
    }
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream stamp;
    stamp << std::put_time(&utc, "%Y%m%dT%H%M%SZ");
    std::filesystem::path path = dir / (run_id + "_" + stamp.str() + ".txt");
    for (int suffix = 2; std::filesystem::exists(path); ++suffix) {
        path = dir / (run_id + "_" + stamp.str() + "_" + std::to_string(suffix) + ".txt");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const int l : labels) {
        out << l << '\n';
    }
    if (!out) {
        throw Error("failed writing " + path.string());
    }
    return path;
}

std::vector<int> read_labels(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::vector<int> labels;
    int v = 0;
    while (in >> v) {
        labels.push_back(v);
    }
    if (!in.eof()) {
        throw Error("non-integer label in " + path.string());
    }
    return labels;
}

} // namespace genclust
