#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "genclust/expression.hpp"
#include "genclust/hierarchical.hpp"
#include "genclust/moc.hpp"
#include "genclust/partitional.hpp"
#include "genclust/validity.hpp"

namespace genclust {

using json = nlohmann::json;

enum class Algorithm { KMeans, Fcm, Hierarchical, MocSvm };

Algorithm parse_algorithm(std::string_view name);
std::string algorithm_name(Algorithm a);

struct AlgorithmConfig {
    Algorithm algorithm = Algorithm::KMeans;
    int max_iters = 100;           ///< kmeans, fcm
    double tol = 1e-6;             ///< kmeans, fcm
    double fuzzifier = 2.0;        ///< fcm
    std::string metric = "euclidean"; ///< hier
    Linkage linkage = Linkage::Average; ///< hier
    GaConfig ga;                   ///< mocsvm (seed is overridden per cell)

    [[nodiscard]] std::string name() const { return algorithm_name(algorithm); }
};

struct GridSpec {
    std::vector<AlgorithmConfig> algorithms;
    int k_min = 2;
    int k_max = 7;
    int iterations = 2;
    IndexSpec internal_index;
    std::vector<IndexSpec> external_indices;
    std::uint64_t base_seed = 0;
    std::filesystem::path output_dir; ///< label files go to output_dir/labels; empty disables persistence
    int workers = 1;

    /// Throws SpecError listing every offending field.
    static GridSpec from_json(const json& j);
    [[nodiscard]] json to_json() const;
};

struct FieldError {
    std::string field;
    std::string message;
};

class SpecError : public Error {
public:
    explicit SpecError(std::vector<FieldError> errors);
    [[nodiscard]] const std::vector<FieldError>& errors() const noexcept { return errors_; }

private:
    std::vector<FieldError> errors_;
};

/// Checks a spec against a dataset's shape. External indices on a dataset
/// without true labels are reported by `needs_truth`, not as field errors.
std::vector<FieldError> validate_spec(const GridSpec& spec, std::size_t rows);
bool needs_truth(const GridSpec& spec) noexcept;

/// Output of clustering one cell.
struct ClusterOutcome {
    Partition partition;
    std::optional<FuzzyState> fuzzy;
    bool fallback = false;
    std::string note;
};

ClusterOutcome cluster_once(const Matrix& data, const AlgorithmConfig& cfg, int k, std::uint64_t seed,
                            const Dendrogram* tree = nullptr);

/// One (k, iteration) result entering best-of selection.
struct ScoredCell {
    int k = 0;
    double value = 0.0;
    int iteration = 0;
};

/// Index of the extremal cell; ties go to smaller k, then earlier iteration.
std::size_t best_of(std::span<const ScoredCell> cells, Direction direction);

struct CurvePoint {
    int k = 0;
    std::optional<double> value; ///< nullopt: excluded cell
    std::string excluded_reason;
};

struct IndexCurve {
    std::string algorithm;
    std::string index;
    std::vector<CurvePoint> points;
};

struct InternalRow {
    std::string algorithm;
    std::string index;
    std::optional<double> value;
    int k = 0;          ///< requested cluster count of the best cell
    int clusters = 0;   ///< clusters in the best partition
    int iteration = 0;
    bool failed = false;
    bool fallback = false;
    std::string error;
    double seconds = 0.0;
    std::string label_file;
};

struct ExternalRow {
    std::string algorithm;
    std::string index;
    std::optional<double> value;
    std::string error;
    double seconds = 0.0; ///< index evaluation only
};

struct ReportTable {
    std::string internal_index;
    std::vector<InternalRow> internal;
    std::optional<std::vector<ExternalRow>> external; ///< present iff true labels exist

    /// `timings = false` drops seconds and label file paths, leaving only
    /// values that are a pure function of (data, spec).
    [[nodiscard]] json to_json(bool timings = true) const;
    [[nodiscard]] std::string to_csv(bool timings = true) const;

    /// Adds or replaces the rows of `other`'s algorithms.
    void merge(const ReportTable& other);
};

json curves_to_json(std::span<const IndexCurve> curves);
std::vector<IndexCurve> curves_from_json(const json& j);

struct GridResult {
    ReportTable report;
    std::vector<IndexCurve> curves;
    std::map<std::string, Partition> best_labels;
    std::map<std::string, std::filesystem::path> label_files;
};

GridResult run_grid(const ExpressionMatrix& data, const GridSpec& spec);

/// Writes one label per line to dir/<run_id>_<UTC timestamp>[_<n>].txt,
/// never overwriting an existing file.
std::filesystem::path persist_labels(std::span<const int> labels, const std::filesystem::path& dir,
                                     const std::string& run_id);
std::vector<int> read_labels(const std::filesystem::path& path);

} // namespace genclust
