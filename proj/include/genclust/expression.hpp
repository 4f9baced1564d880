#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "genclust/matrix.hpp"

namespace genclust {

/// Genes x conditions expression table. Rows are the objects that get
/// clustered. Immutable once built; share freely across threads.
class ExpressionMatrix {
public:
    /// Validates the invariants: finite values, at least 2x2, id lengths
    /// matching, and true labels (if any) positive with one per row.
    /// Empty id lists are filled with "g1".. / "c1"...
    ExpressionMatrix(Matrix values, std::vector<std::string> gene_ids = {},
                     std::vector<std::string> condition_ids = {},
                     std::optional<std::vector<int>> true_labels = std::nullopt);

    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t rows() const noexcept { return values_.rows(); }
    [[nodiscard]] std::size_t cols() const noexcept { return values_.cols(); }
    [[nodiscard]] const std::vector<std::string>& gene_ids() const noexcept { return gene_ids_; }
    [[nodiscard]] const std::vector<std::string>& condition_ids() const noexcept { return condition_ids_; }
    [[nodiscard]] const std::optional<std::vector<int>>& true_labels() const noexcept { return true_labels_; }
    [[nodiscard]] bool has_true_labels() const noexcept { return true_labels_.has_value(); }

private:
    Matrix values_;
    std::vector<std::string> gene_ids_;
    std::vector<std::string> condition_ids_;
    std::optional<std::vector<int>> true_labels_;
};

struct PreprocessConfig {
    std::optional<std::size_t> top_n; ///< nullopt selects all genes
    bool normalize = false;
    std::optional<std::size_t> class_column; ///< 1-based
};

/// Parses delimited text (tab if the first line contains one, else comma).
/// A first row that does not parse as numbers is a header. When the header
/// has one more field than the data rows, or the first column of every data
/// row is non-numeric, the first column holds gene ids.
ExpressionMatrix parse_matrix(const std::string& text, std::optional<std::size_t> class_column = std::nullopt);
ExpressionMatrix load_matrix(const std::filesystem::path& path,
                             std::optional<std::size_t> class_column = std::nullopt);

/// Sample variance (n - 1 denominator).
double sample_variance(std::span<const double> row);

/// The n rows with the largest sample variance, in descending variance order
/// (stable for ties).
ExpressionMatrix select_top_genes(const ExpressionMatrix& m, std::size_t n);

/// Per-row z-score: mean 0, sample std 1. Throws naming the gene for a
/// constant row.
ExpressionMatrix normalize_rows(const ExpressionMatrix& m);

ExpressionMatrix preprocess(const ExpressionMatrix& m, const PreprocessConfig& cfg);

/// CSV with a header row ("gene", conditions..., and "class" when labels exist).
std::string to_csv(const ExpressionMatrix& m);
void write_csv(const ExpressionMatrix& m, const std::filesystem::path& path);

} // namespace genclust
