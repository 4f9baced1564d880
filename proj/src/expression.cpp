#include "genclust/expression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace genclust {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        out.emplace_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) {
        return std::nullopt;
    }
    if (s.front() == '+') {
        s.remove_prefix(1);
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return v;
}

} // namespace

ExpressionMatrix::ExpressionMatrix(Matrix values, std::vector<std::string> gene_ids,
                                   std::vector<std::string> condition_ids,
                                   std::optional<std::vector<int>> true_labels)
    : values_(std::move(values)), gene_ids_(std::move(gene_ids)),
      condition_ids_(std::move(condition_ids)), true_labels_(std::move(true_labels)) {
    if (values_.rows() < 2 || values_.cols() < 2) {
        throw Error("expression matrix must have at least 2 rows and 2 columns");
    }
    for (std::size_t r = 0; r < values_.rows(); ++r) {
        for (std::size_t c = 0; c < values_.cols(); ++c) {
            if (!std::isfinite(values_(r, c))) {
                throw Error("non-finite value at row " + std::to_string(r + 1) + ", column " +
                            std::to_string(c + 1));
            }
        }
    }
    if (gene_ids_.empty()) {
        for (std::size_t r = 0; r < values_.rows(); ++r) {
            gene_ids_.push_back("g" + std::to_string(r + 1));
        }
    }
    if (condition_ids_.empty()) {
        for (std::size_t c = 0; c < values_.cols(); ++c) {
            condition_ids_.push_back("c" + std::to_string(c + 1));
        }
    }
    if (gene_ids_.size() != values_.rows()) {
        throw Error("gene id count does not match row count");
    }
    if (condition_ids_.size() != values_.cols()) {
        throw Error("condition id count does not match column count");
    }
    if (true_labels_) {
        if (true_labels_->size() != values_.rows()) {
            throw Error("true label count does not match row count");
        }
        if (std::any_of(true_labels_->begin(), true_labels_->end(), [](int l) { return l < 1; })) {
            throw Error("true labels must be positive integers");
        }
    }
}

ExpressionMatrix parse_matrix(const std::string& text, std::optional<std::size_t> class_column) {
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!trim(line).empty()) {
                lines.push_back(line);
            }
        }
    }
    if (lines.empty()) {
        throw Error("empty input");
    }
    const char delim = lines.front().find('\t') != std::string::npos ? '\t' : ',';

    std::vector<std::vector<std::string>> rows;
    rows.reserve(lines.size());
    for (const auto& l : lines) {
        rows.push_back(split(l, delim));
    }

    // A class column may hold non-numeric class names, so it is excluded from
    // the header and id-column probes.
    auto numeric_except_class = [&](const std::vector<std::string>& fields) {
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (class_column && c + 1 == *class_column) {
                continue;
            }
            if (!parse_number(fields[c])) {
                return false;
            }
        }
        return true;
    };

    // Row 0 is a header unless every value cell (skipping a leading id cell
    // when the body carries gene ids) parses as a number.
    const bool body_has_ids = rows.size() > 1 && !parse_number(rows[1].front());
    std::optional<std::vector<std::string>> header;
    std::size_t first_data = 0;
    {
        auto probe = rows.front();
        if (body_has_ids && !probe.empty()) {
            probe.front() = "0";
        }
        if (!numeric_except_class(probe)) {
            header = rows.front();
            first_data = 1;
        }
    }
    if (rows.size() - first_data < 1) {
        throw Error("no data rows");
    }

    const std::size_t width = rows[first_data].size();
    for (std::size_t r = first_data; r < rows.size(); ++r) {
        if (rows[r].size() != width) {
            throw Error("ragged row " + std::to_string(r + 1) + ": expected " + std::to_string(width) +
                        " fields, found " + std::to_string(rows[r].size()));
        }
    }

    bool id_column = true;
    for (std::size_t r = first_data; r < rows.size(); ++r) {
        if (parse_number(rows[r].front()) || (class_column && *class_column == 1)) {
            id_column = false;
            break;
        }
    }
    if (class_column && (*class_column < 1 || *class_column > width)) {
        throw Error("class column " + std::to_string(*class_column) + " out of range 1.." +
                    std::to_string(width));
    }
    if (class_column && id_column && *class_column == 1) {
        throw Error("class column 1 holds gene ids");
    }

    std::vector<std::size_t> value_cols;
    for (std::size_t c = id_column ? 1 : 0; c < width; ++c) {
        if (!class_column || c + 1 != *class_column) {
            value_cols.push_back(c);
        }
    }

    const std::size_t n = rows.size() - first_data;
    Matrix values(n, value_cols.size());
    std::vector<std::string> gene_ids;
    std::optional<std::vector<int>> labels;
    std::unordered_map<std::string, int> label_codes;
    if (class_column) {
        labels.emplace();
    }
    for (std::size_t r = 0; r < n; ++r) {
        const auto& fields = rows[first_data + r];
        for (std::size_t j = 0; j < value_cols.size(); ++j) {
            const auto& cell = fields[value_cols[j]];
            const auto v = parse_number(cell);
            if (!v || !std::isfinite(*v)) {
                throw Error("invalid numeric cell '" + cell + "' at row " +
                            std::to_string(first_data + r + 1) + ", column " +
                            std::to_string(value_cols[j] + 1));
            }
            values(r, j) = *v;
        }
        if (id_column) {
            gene_ids.push_back(fields.front());
        }
        if (class_column) {
            const auto& raw = fields[*class_column - 1];
            if (raw.empty()) {
                throw Error("missing class label at row " + std::to_string(first_data + r + 1));
            }
            auto [it, inserted] = label_codes.emplace(raw, static_cast<int>(label_codes.size()) + 1);
            labels->push_back(it->second);
        }
    }

    std::vector<std::string> condition_ids;
    if (header) {
        // Header may omit the id column's title.
        const std::size_t offset = header->size() + 1 == width ? 1 : 0;
        if (header->size() != width && offset == 0) {
            throw Error("header has " + std::to_string(header->size()) + " fields, data rows have " +
                        std::to_string(width));
        }
        for (const auto c : value_cols) {
            condition_ids.push_back((*header)[c - offset]);
        }
    }
    return ExpressionMatrix(std::move(values), std::move(gene_ids), std::move(condition_ids),
                            std::move(labels));
}

ExpressionMatrix load_matrix(const std::filesystem::path& path, std::optional<std::size_t> class_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix(buf.str(), class_column);
}

double sample_variance(std::span<const double> row) {
    const double n = static_cast<double>(row.size());
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / n;
    double ss = 0.0;
    for (const double v : row) {
        ss += (v - mean) * (v - mean);
    }
    return ss / (n - 1.0);
}

namespace {

ExpressionMatrix take_rows(const ExpressionMatrix& m, const std::vector<std::size_t>& order) {
    Matrix values(order.size(), m.cols());
    std::vector<std::string> ids;
    std::optional<std::vector<int>> labels;
    if (m.has_true_labels()) {
        labels.emplace();
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto src = m.values().row(order[i]);
        std::copy(src.begin(), src.end(), values.row(i).begin());
        ids.push_back(m.gene_ids()[order[i]]);
        if (labels) {
            labels->push_back((*m.true_labels())[order[i]]);
        }
    }
    // Keep labels consecutive after dropping rows.
    if (labels) {
        std::unordered_map<int, int> remap;
        for (auto& l : *labels) {
            auto [it, _] = remap.emplace(l, static_cast<int>(remap.size()) + 1);
            l = it->second;
        }
    }
    return ExpressionMatrix(std::move(values), std::move(ids), m.condition_ids(), std::move(labels));
}

} // namespace

ExpressionMatrix select_top_genes(const ExpressionMatrix& m, std::size_t n) {
    if (n < 1 || n > m.rows()) {
        throw Error("top_n " + std::to_string(n) + " out of range 1.." + std::to_string(m.rows()));
    }
    if (n < 2) {
        throw Error("top_n must keep at least 2 genes");
    }
    std::vector<double> var(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        var[r] = sample_variance(m.values().row(r));
    }
    std::vector<std::size_t> order(m.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
    order.resize(n);
    return take_rows(m, order);
}

ExpressionMatrix normalize_rows(const ExpressionMatrix& m) {
    Matrix values = m.values();
    const double d = static_cast<double>(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = values.row(r);
        const double mean = std::accumulate(row.begin(), row.end(), 0.0) / d;
        double ss = 0.0;
        for (const double v : row) {
            ss += (v - mean) * (v - mean);
        }
        const double sd = std::sqrt(ss / (d - 1.0));
        if (!(sd > 0.0) || std::all_of(row.begin(), row.end(), [&](double v) { return v == row[0]; })) {
            throw Error("constant row for gene '" + m.gene_ids()[r] + "' cannot be normalized");
        }
        for (auto& v : row) {
            v = (v - mean) / sd;
        }
    }
    return ExpressionMatrix(std::move(values), m.gene_ids(), m.condition_ids(), m.true_labels());
}

ExpressionMatrix preprocess(const ExpressionMatrix& m, const PreprocessConfig& cfg) {
    ExpressionMatrix out = cfg.top_n ? select_top_genes(m, *cfg.top_n) : m;
    if (cfg.normalize) {
        out = normalize_rows(out);
    }
    return out;
}

std::string to_csv(const ExpressionMatrix& m) {
    std::ostringstream out;
    out.precision(17);
    out << "gene";
    for (const auto& c : m.condition_ids()) {
        out << ',' << c;
    }
    if (m.has_true_labels()) {
        out << ",class";
    }
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out << m.gene_ids()[r];
        for (const double v : m.values().row(r)) {
            out << ',' << v;
        }
        if (m.has_true_labels()) {
            out << ',' << (*m.true_labels())[r];
        }
        out << '\n';
    }
    return out.str();
}

void write_csv(const ExpressionMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << to_csv(m);
}

} // namespace genclust
