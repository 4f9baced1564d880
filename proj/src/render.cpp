#include "genclust/render.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace genclust {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr const char* kMarkers[] = {"circle", "square", "triangle", "diamond", "cross", "triangle-down"};

const char* palette(std::size_t i) {
    return kPalette[i % std::size(kPalette)];
}

std::string escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << v;
    return out.str();
}

class Svg {
public:
    Svg(int width, int height) {
        out_ << R"(<?xml version="1.0" encoding="UTF-8"?>)" << '\n'
             << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << width << R"(" height=")" << height
             << R"(" viewBox="0 0 )" << width << ' ' << height << R"(" font-family="sans-serif" font-size="11">)"
             << '\n'
             << R"(<rect class="background" x="0" y="0" width=")" << width << R"(" height=")" << height
             << R"(" fill="#ffffff"/>)" << '\n';
    }

    Svg& raw(const std::string& s) {
        out_ << s << '\n';
        return *this;
    }

    Svg& text(double x, double y, std::string_view content, std::string_view extra = "") {
        out_ << R"(<text x=")" << num(x) << R"(" y=")" << num(y) << '"';
        if (!extra.empty()) {
            out_ << ' ' << extra;
        }
        out_ << '>' << escape(content) << "</text>\n";
        return *this;
    }

    std::string finish() {
        out_ << "</svg>\n";
        return out_.str();
    }

private:
    std::ostringstream out_;
};

void check_partition(const ExpressionMatrix& data, const Partition& partition) {
    if (partition.labels.empty()) {
        throw Error("render: empty partition");
    }
    if (partition.labels.size() != data.rows()) {
        throw Error("render: partition length does not match row count");
    }
}

std::string marker(std::string_view shape, double x, double y, const char* color) {
    const double r = 4.0;
    std::ostringstream out;
    out << R"(<g class="marker marker-)" << shape << R"(">)";
    if (shape == "circle") {
        out << R"(<circle cx=")" << num(x) << R"(" cy=")" << num(y) << R"(" r=")" << num(r) << R"(" fill=")"
            << color << R"("/>)";
    } else if (shape == "square") {
        out << R"(<rect x=")" << num(x - r) << R"(" y=")" << num(y - r) << R"(" width=")" << num(2 * r)
            << R"(" height=")" << num(2 * r) << R"(" fill=")" << color << R"("/>)";
    } else if (shape == "triangle") {
        out << R"(<polygon points=")" << num(x) << ',' << num(y - r) << ' ' << num(x + r) << ',' << num(y + r) << ' '
            << num(x - r) << ',' << num(y + r) << R"(" fill=")" << color << R"("/>)";
    } else if (shape == "triangle-down") {
        out << R"(<polygon points=")" << num(x) << ',' << num(y + r) << ' ' << num(x + r) << ',' << num(y - r) << ' '
            << num(x - r) << ',' << num(y - r) << R"(" fill=")" << color << R"("/>)";
    } else if (shape == "diamond") {
        out << R"(<polygon points=")" << num(x) << ',' << num(y - r) << ' ' << num(x + r) << ',' << num(y) << ' '
            << num(x) << ',' << num(y + r) << ' ' << num(x - r) << ',' << num(y) << R"(" fill=")" << color
            << R"("/>)";
    } else {
        out << R"(<path d="M)" << num(x - r) << ',' << num(y - r) << 'L' << num(x + r) << ',' << num(y + r) << 'M'
            << num(x - r) << ',' << num(y + r) << 'L' << num(x + r) << ',' << num(y - r) << R"(" stroke=")" << color
            << R"(" stroke-width="2"/>)";
    }
    out << "</g>";
    return out.str();
}

} // namespace

Rgb heat_color(double value) {
    const double v = std::clamp(value, -3.0, 3.0);
    if (v <= 0.0) {
        const int c = static_cast<int>(std::lround(255.0 * (v + 3.0) / 3.0));
        return {c, c, 255};
    }
    const int c = static_cast<int>(std::lround(255.0 * (3.0 - v) / 3.0));
    return {255, c, c};
}

std::string hex(const Rgb& c) {
    std::ostringstream out;
    out << '#' << std::hex << std::setfill('0') << std::setw(2) << c.r << std::setw(2) << c.g << std::setw(2) << c.b;
    return out.str();
}

std::string render_heatmap(const ExpressionMatrix& data, const Partition& partition, const RenderOptions& opt) {
    check_partition(data, partition);
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return partition.labels[a] < partition.labels[b]; });

    const double plot_w = opt.width - Margins::left - Margins::right;
    const double plot_h = opt.height - Margins::top - Margins::bottom;
    const double cw = plot_w / static_cast<double>(data.cols());
    const double ch = plot_h / static_cast<double>(data.rows());

    Svg svg(opt.width, opt.height);
    svg.text(Margins::left, 20, opt.title.empty() ? "Heatmap" : opt.title, R"(class="title" font-size="14")");
    svg.raw(R"(<g class="cells">)");
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto row = data.values().row(order[r]);
        for (std::size_t c = 0; c < data.cols(); ++c) {
            std::ostringstream cell;
            cell << R"(<rect class="cell" x=")" << num(Margins::left + c * cw) << R"(" y=")"
                 << num(Margins::top + r * ch) << R"(" width=")" << num(cw) << R"(" height=")" << num(ch)
                 << R"(" fill=")" << hex(heat_color(row[c])) << R"("/>)";
            svg.raw(cell.str());
        }
    }
    svg.raw("</g>");
    for (std::size_t r = 1; r < order.size(); ++r) {
        if (partition.labels[order[r]] != partition.labels[order[r - 1]]) {
            const double y = Margins::top + r * ch;
            svg.raw(R"(<line class="separator" x1=")" + num(Margins::left) + R"(" y1=")" + num(y) + R"(" x2=")" +
                    num(Margins::left + plot_w) + R"(" y2=")" + num(y) + R"(" stroke="#000000" stroke-width="2"/>)");
        }
    }
    // Gene names (Y) and condition names (X); thinned when too dense to read.
    const std::size_t row_step = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(10.0 / ch)));
    for (std::size_t r = 0; r < order.size(); r += row_step) {
        svg.text(Margins::left - 4, Margins::top + (r + 0.5) * ch + 4, data.gene_ids()[order[r]],
                 R"(class="ylabel" text-anchor="end")");
    }
    const std::size_t col_step = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(30.0 / cw)));
    for (std::size_t c = 0; c < data.cols(); c += col_step) {
        svg.text(Margins::left + (c + 0.5) * cw, Margins::top + plot_h + 16, data.condition_ids()[c],
                 R"(class="xlabel" text-anchor="middle")");
    }
    svg.text(Margins::left + plot_w / 2, opt.height - 10, "Conditions", R"(class="axis-title" text-anchor="middle")");

    // Color legend: seven swatches across [-3, 3].
    const double lx = Margins::left + plot_w + 20;
    svg.raw(R"(<g class="legend">)");
    for (int i = 0; i <= 6; ++i) {
        const double v = 3.0 - i;
        const double y = Margins::top + i * 22.0;
        svg.raw(R"(<rect class="legend-swatch" x=")" + num(lx) + R"(" y=")" + num(y) + R"(" width="16" height="16" fill=")" +
                hex(heat_color(v)) + R"("/>)");
        std::ostringstream label;
        label << std::showpos << v;
        svg.text(lx + 22, y + 12, label.str());
    }
    svg.raw("</g>");
    return svg.finish();
}

std::string render_profile(const ExpressionMatrix& data, const Partition& partition, const RenderOptions& opt) {
    check_partition(data, partition);
    const double plot_w = opt.width - Margins::left - Margins::right;
    const double plot_h = opt.height - Margins::top - Margins::bottom;
    const auto values = data.values().values();
    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double step = plot_w / static_cast<double>(data.cols() - 1);
    auto ymap = [&](double v) { return Margins::top + (hi - v) / (hi - lo) * plot_h; };

    Svg svg(opt.width, opt.height);
    svg.text(Margins::left, 20, opt.title.empty() ? "Cluster profiles" : opt.title, R"(class="title" font-size="14")");
    svg.raw(R"(<rect class="frame" x=")" + num(Margins::left) + R"(" y=")" + num(Margins::top) + R"(" width=")" +
            num(plot_w) + R"(" height=")" + num(plot_h) + R"(" fill="none" stroke="#888888"/>)");
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const int label = partition.labels[i];
        std::ostringstream line;
        line << R"(<polyline class="profile" data-gene=")" << escape(data.gene_ids()[i]) << R"(" data-cluster=")"
             << label << R"(" fill="none" stroke=")" << palette(static_cast<std::size_t>(label - 1))
             << R"(" stroke-width="1" points=")";
        for (std::size_t j = 0; j < data.cols(); ++j) {
            line << (j ? " " : "") << num(Margins::left + j * step) << ',' << num(ymap(data.values()(i, j)));
        }
        line << R"("/>)";
        svg.raw(line.str());
    }
    for (std::size_t j = 0; j < data.cols(); ++j) {
        svg.text(Margins::left + j * step, Margins::top + plot_h + 16, data.condition_ids()[j],
                 R"(class="xlabel" text-anchor="middle")");
    }
    svg.text(Margins::left - 6, Margins::top + 4, num(hi), R"(class="ylabel" text-anchor="end")");
    svg.text(Margins::left - 6, Margins::top + plot_h, num(lo), R"(class="ylabel" text-anchor="end")");
    svg.text(Margins::left + plot_w / 2, opt.height - 10, "Conditions", R"(class="axis-title" text-anchor="middle")");

    std::vector<int> clusters(partition.labels.begin(), partition.labels.end());
    std::sort(clusters.begin(), clusters.end());
    clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
    const double lx = Margins::left + plot_w + 20;
    svg.raw(R"(<g class="legend">)");
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const double y = Margins::top + i * 18.0;
        svg.raw(R"(<g class="legend-entry"><line x1=")" + num(lx) + R"(" y1=")" + num(y + 6) + R"(" x2=")" + num(lx + 20) +
                R"(" y2=")" + num(y + 6) + R"(" stroke=")" + palette(static_cast<std::size_t>(clusters[i] - 1)) +
                R"(" stroke-width="2"/>)");
        svg.text(lx + 26, y + 10, "Cluster " + std::to_string(clusters[i]));
        svg.raw("</g>");
    }
    svg.raw("</g>");
    return svg.finish();
}

std::string render_index_curves(std::span<const IndexCurve> curves, const RenderOptions& opt) {
    if (curves.empty()) {
        throw Error("render: no curves");
    }
    int kmin = std::numeric_limits<int>::max();
    int kmax = std::numeric_limits<int>::min();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& c : curves) {
        for (const auto& p : c.points) {
            kmin = std::min(kmin, p.k);
            kmax = std::max(kmax, p.k);
            if (p.value) {
                lo = std::min(lo, *p.value);
                hi = std::max(hi, *p.value);
            }
        }
    }
    if (kmin > kmax) {
        kmin = kmax = 0;
    }
    if (!std::isfinite(lo)) {
        lo = 0.0;
        hi = 1.0;
    } else if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double plot_w = opt.width - Margins::left - Margins::right;
    const double plot_h = opt.height - Margins::top - Margins::bottom;
    auto xmap = [&](int k) {
        return kmax == kmin ? Margins::left + plot_w / 2
                            : Margins::left + (k - kmin) * plot_w / static_cast<double>(kmax - kmin);
    };
    auto ymap = [&](double v) { return Margins::top + (hi - v) / (hi - lo) * plot_h; };

    Svg svg(opt.width, opt.height);
    svg.text(Margins::left, 20, opt.title.empty() ? "Validity index vs number of clusters" : opt.title,
             R"(class="title" font-size="14")");
    const double axis_y = Margins::top + plot_h;
    svg.raw(R"(<line class="axis" x1=")" + num(Margins::left) + R"(" y1=")" + num(axis_y) + R"(" x2=")" +
            num(Margins::left + plot_w) + R"(" y2=")" + num(axis_y) + R"(" stroke="#000000"/>)");
    svg.raw(R"(<line class="axis" x1=")" + num(Margins::left) + R"(" y1=")" + num(Margins::top) + R"(" x2=")" +
            num(Margins::left) + R"(" y2=")" + num(axis_y) + R"(" stroke="#000000"/>)");
    for (int k = kmin; k <= kmax; ++k) {
        const double x = xmap(k);
        svg.raw(R"(<line class="xtick" x1=")" + num(x) + R"(" y1=")" + num(axis_y) + R"(" x2=")" + num(x) +
                R"(" y2=")" + num(axis_y + 5) + R"(" stroke="#000000"/>)");
        svg.text(x, axis_y + 18, std::to_string(k), R"(class="xticklabel" text-anchor="middle")");
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = lo + (hi - lo) * i / 4.0;
        const double y = ymap(v);
        svg.raw(R"(<line class="ytick" x1=")" + num(Margins::left - 5) + R"(" y1=")" + num(y) + R"(" x2=")" +
                num(Margins::left) + R"(" y2=")" + num(y) + R"(" stroke="#000000"/>)");
        std::ostringstream label;
        label << std::setprecision(4) << v;
        svg.text(Margins::left - 8, y + 4, label.str(), R"(class="yticklabel" text-anchor="end")");
    }
    svg.text(Margins::left + plot_w / 2, opt.height - 10, "Number of clusters",
             R"(class="axis-title" text-anchor="middle")");

    const double lx = Margins::left + plot_w + 20;
    for (std::size_t s = 0; s < curves.size(); ++s) {
        const auto& c = curves[s];
        const char* color = palette(s);
        const auto shape = kMarkers[s % std::size(kMarkers)];
        std::ostringstream d;
        bool pen_down = false;
        for (const auto& p : c.points) {
            if (!p.value) {
                pen_down = false;
                continue;
            }
            d << (pen_down ? " L" : (d.tellp() > 0 ? " M" : "M")) << num(xmap(p.k)) << ',' << num(ymap(*p.value));
            pen_down = true;
        }
        svg.raw(R"(<g class="series" data-algorithm=")" + escape(c.algorithm) + R"(">)");
        svg.raw(R"(<path class="curve" fill="none" stroke=")" + std::string(color) + R"(" stroke-width="2" d=")" +
                d.str() + R"("/>)");
        for (const auto& p : c.points) {
            if (p.value) {
                svg.raw(marker(shape, xmap(p.k), ymap(*p.value), color));
            }
        }
        svg.raw("</g>");
        const double y = Margins::top + s * 18.0;
        svg.raw(R"(<g class="legend-entry">)" + marker(shape, lx + 8, y + 6, color));
        svg.text(lx + 20, y + 10, c.index + "/" + c.algorithm);
        svg.raw("</g>");
    }
    return svg.finish();
}

} // namespace genclust
