#include "genclust/metric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace genclust {

namespace {

struct NamedKind {
    std::string_view name;
    MetricKind kind;
};

constexpr NamedKind kNames[] = {
    {"euclidean", MetricKind::Euclidean},     {"sqeuclidean", MetricKind::SqEuclidean},
    {"seuclidean", MetricKind::Seuclidean},   {"cityblock", MetricKind::Cityblock},
    {"mahalanobis", MetricKind::Mahalanobis}, {"minkowski", MetricKind::Minkowski},
    {"cosine", MetricKind::Cosine},           {"correlation", MetricKind::Correlation},
    {"spearman", MetricKind::Spearman},       {"hamming", MetricKind::Hamming},
    {"jaccard", MetricKind::Jaccard},         {"chebychev", MetricKind::Chebychev},
};

double pearson(std::span<const double> x, std::span<const double> y, const char* what) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(std::string(what) + " distance undefined for a constant vector");
    }
    return sxy / std::sqrt(sxx * syy);
}

double one_minus(double similarity) {
    return std::clamp(1.0 - similarity, 0.0, 2.0);
}

} // namespace

Metric::Metric(MetricKind kind, double p) : kind_(kind), p_(p) {
    if (kind_ == MetricKind::Minkowski && !(std::isfinite(p_) && p_ > 0.0)) {
        throw Error("minkowski exponent must be finite and positive");
    }
}

Metric Metric::parse(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string_view base = lower;
    std::optional<double> p;
    if (const auto colon = base.find(':'); colon != std::string_view::npos) {
        const auto arg = base.substr(colon + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), v);
        if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
            throw Error("bad metric parameter in '" + std::string(name) + "'");
        }
        p = v;
        base = base.substr(0, colon);
    }
    if (base == "chebyshev") {
        base = "chebychev";
    }
    for (const auto& [n, kind] : kNames) {
        if (n == base) {
            if (p && kind != MetricKind::Minkowski) {
                throw Error("metric '" + std::string(n) + "' takes no parameter");
            }
            return Metric(kind, p.value_or(2.0));
        }
    }
    throw Error("unknown metric '" + std::string(name) + "'");
}

std::string Metric::name() const {
    for (const auto& [n, kind] : kNames) {
        if (kind == kind_) {
            if (kind_ == MetricKind::Minkowski) {
                std::ostringstream out;
                out << n << ':' << p_;
                return out.str();
            }
            return std::string(n);
        }
    }
    return "unknown";
}

bool Metric::needs_context() const noexcept {
    return kind_ == MetricKind::Seuclidean || kind_ == MetricKind::Mahalanobis;
}

Metric Metric::with_context(MetricContext ctx) const {
    Metric m = *this;
    m.ctx_ = std::make_shared<const MetricContext>(std::move(ctx));
    return m;
}

Metric Metric::prepared(const Matrix& data) const {
    if (!needs_context()) {
        return *this;
    }
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (n < 2) {
        throw Error("metric context needs at least 2 rows");
    }
    std::vector<double> mean(d, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            mean[c] += data(r, c);
        }
    }
    for (auto& m : mean) {
        m /= static_cast<double>(n);
    }
    MetricContext ctx;
    if (kind_ == MetricKind::Seuclidean) {
        ctx.inv_std.assign(d, 0.0);
        for (std::size_t c = 0; c < d; ++c) {
            double ss = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                ss += (data(r, c) - mean[c]) * (data(r, c) - mean[c]);
            }
            const double sd = std::sqrt(ss / static_cast<double>(n - 1));
            // Zero-variance dimensions carry no information; they are skipped.
            ctx.inv_std[c] = sd > 0.0 ? 1.0 / sd : 0.0;
        }
        return with_context(std::move(ctx));
    }

    Eigen::MatrixXd centered(n, d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            centered(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data(r, c) - mean[c];
        }
    }
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    const double eps = 1e-6 * cov.trace() / static_cast<double>(d);
    if (!(eps > 0.0)) {
        throw Error("mahalanobis: data has zero variance");
    }
    cov.diagonal().array() += eps;
    const Eigen::MatrixXd inv = cov.ldlt().solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
    ctx.inv_cov = Matrix(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            ctx.inv_cov(i, j) = inv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }
    return with_context(std::move(ctx));
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) {
            ranks[idx[t]] = r;
        }
        i = j + 1;
    }
    return ranks;
}

double Metric::distance(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != y.size()) {
        throw Error("distance: vector lengths differ (" + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()) + ")");
    }
    if (x.empty()) {
        throw Error("distance: empty vectors");
    }
    if (needs_context() && !ctx_) {
        throw Error("distance: metric '" + name() + "' needs dataset context");
    }
    const std::size_t d = x.size();
    switch (kind_) {
    case MetricKind::Euclidean:
        return std::sqrt(squared_euclidean(x, y));
    case MetricKind::SqEuclidean:
        return squared_euclidean(x, y);
    case MetricKind::Seuclidean: {
        if (ctx_->inv_std.size() != d) {
            throw Error("distance: seuclidean context has wrong dimension");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double t = (x[i] - y[i]) * ctx_->inv_std[i];
            s += t * t;
        }
        return std::sqrt(s);
    }
    case MetricKind::Cityblock: {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += std::abs(x[i] - y[i]);
        }
        return s;
    }
    case MetricKind::Mahalanobis: {
        const Matrix& inv = ctx_->inv_cov;
        if (inv.rows() != d) {
            throw Error("distance: mahalanobis context has wrong dimension");
        }
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                row += inv(i, j) * (x[j] - y[j]);
            }
            s += (x[i] - y[i]) * row;
        }
        return std::sqrt(std::max(s, 0.0));
    }
    case MetricKind::Minkowski: {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            s += std::pow(std::abs(x[i] - y[i]), p_);
        }
        return std::pow(s, 1.0 / p_);
    }
    case MetricKind::Cosine: {
        double xy = 0.0, xx = 0.0, yy = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            xy += x[i] * y[i];
            xx += x[i] * x[i];
            yy += y[i] * y[i];
        }
        if (xx == 0.0 || yy == 0.0) {
            throw Error("cosine distance undefined for a zero vector");
        }
        if (std::equal(x.begin(), x.end(), y.begin())) {
            return 0.0;
        }
        return one_minus(xy / std::sqrt(xx * yy));
    }
    case MetricKind::Correlation: {
        const double r = pearson(x, y, "correlation");
        return std::equal(x.begin(), x.end(), y.begin()) ? 0.0 : one_minus(r);
    }
    case MetricKind::Spearman: {
        const auto rx = average_ranks(x);
        const auto ry = average_ranks(y);
        const double r = pearson(rx, ry, "spearman");
        return rx == ry ? 0.0 : one_minus(r);
    }
    case MetricKind::Hamming: {
        std::size_t diff = 0;
        for (std::size_t i = 0; i < d; ++i) {
            diff += x[i] != y[i] ? 1 : 0;
        }
        return static_cast<double>(diff) / static_cast<double>(d);
    }
    case MetricKind::Jaccard: {
        std::size_t nonzero = 0, diff = 0;
        for (std::size_t i = 0; i < d; ++i) {
            if (x[i] != 0.0 || y[i] != 0.0) {
                ++nonzero;
                diff += x[i] != y[i] ? 1 : 0;
            }
        }
        return nonzero == 0 ? 0.0 : static_cast<double>(diff) / static_cast<double>(nonzero);
    }
    case MetricKind::Chebychev: {
        double m = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            m = std::max(m, std::abs(x[i] - y[i]));
        }
        return m;
    }
    }
    throw Error("distance: unknown metric kind");
}

DistanceMatrix pairwise(const Metric& metric, const Matrix& data) {
    const Metric m = metric.needs_context() && !metric.has_context() ? metric.prepared(data) : metric;
    const std::size_t n = data.rows();
    DistanceMatrix out(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = m.distance(data.row(i), data.row(j));
            if (std::isnan(v)) {
                throw Error("pairwise: NaN distance");
            }
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

} // namespace genclust
