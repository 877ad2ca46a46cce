#include "lava/render.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lava/analysis.hpp"
#include "lava/data_io.hpp"
#include "lava/error.hpp"

namespace lava {

namespace {

// Fixed 3-decimal formatting with trailing zeros removed.
std::string num(double v) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.3f", v);
    std::string s(buf.data());
    if (s.find('.') != std::string::npos) {
        while (s.back() == '0') {
            s.pop_back();
        }
        if (s.back() == '.') {
            s.pop_back();
        }
    }
    if (s == "-0") {
        s = "0";
    }
    return s;
}

struct Rgb {
    double r, g, b;
};

std::string hex(const Rgb& c) {
    std::array<char, 8> buf{};
    const auto to_byte = [](double x) { return static_cast<int>(std::lround(std::clamp(x, 0.0, 255.0))); };
    std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", to_byte(c.r), to_byte(c.g), to_byte(c.b));
    return buf.data();
}

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::string heat_color(double t) {
    return hex(lerp({255, 255, 255}, {8, 48, 107}, std::clamp(t, 0.0, 1.0)));
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_open(double width, double height) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           num(width) + "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
}

}  // namespace

GridLayout GridLayout::parse(const std::string& text) {
    const auto x = text.find_first_of("xX");
    GridLayout layout;
    const auto parse_part = [&](std::string_view part, std::size_t& out) {
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc() || ptr != part.data() + part.size() || out == 0) {
            throw ParameterError("grid layout must look like HxW, got '" + text + "'");
        }
    };
    if (x == std::string::npos) {
        throw ParameterError("grid layout must look like HxW, got '" + text + "'");
    }
    parse_part(std::string_view(text).substr(0, x), layout.height);
    parse_part(std::string_view(text).substr(x + 1), layout.width);
    return layout;
}

void GridLayout::validate(std::size_t features) const {
    if (height * width != features) {
        throw ParameterError("layout error: grid " + std::to_string(height) + "x" + std::to_string(width) + " has " +
                             std::to_string(height * width) + " cells but there are " + std::to_string(features) +
                             " features");
    }
}

std::string presence_color(double t) {
    static constexpr std::array<Rgb, 5> kStops = {
        Rgb{68, 1, 84}, Rgb{59, 82, 139}, Rgb{33, 145, 140}, Rgb{94, 201, 98}, Rgb{253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * static_cast<double>(kStops.size() - 1);
    const auto lo = std::min<std::size_t>(static_cast<std::size_t>(pos), kStops.size() - 2);
    return hex(lerp(kStops[lo], kStops[lo + 1], pos - static_cast<double>(lo)));
}

std::string grid_heatmap_svg(std::span<const double> pair_values, const GridLayout& layout, const RenderSpec& spec) {
    if (!(spec.exponent > 0.0) || spec.line_threshold < 0.0 || spec.line_threshold >= 1.0) {
        throw ParameterError("render spec needs exponent > 0 and 0 <= threshold < 1");
    }
    const auto pairs = PairIndex::from_pair_count(pair_values.size());
    layout.validate(pairs.features());
    const auto sums = feature_sums(pair_values, pairs);
    const double top = *std::max_element(sums.begin(), sums.end());
    const double cell = spec.cell_px;
    const double width = cell * static_cast<double>(layout.width);
    const double height = cell * static_cast<double>(layout.height);

    std::string svg = svg_open(width, height);
    for (std::size_t f = 0; f < sums.size(); ++f) {
        const double x = cell * static_cast<double>(f % layout.width);
        const double y = cell * static_cast<double>(f / layout.width);
        const double t = top > 0.0 ? sums[f] / top : 0.0;
        svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" + num(cell) +
               "\" fill=\"" + heat_color(t) + "\"/>\n";
    }
    const double max_width = spec.max_line_fraction * width;
    for (std::size_t p = 0; p < pair_values.size(); ++p) {
        const double v = std::pow(std::max(pair_values[p], 0.0), spec.exponent);
        if (!(v > 0.0) || v < spec.line_threshold) {
            continue;
        }
        const auto [a, b] = pairs.pair(p);
        const auto cx = [&](std::size_t f) { return cell * (static_cast<double>(f % layout.width) + 0.5); };
        const auto cy = [&](std::size_t f) { return cell * (static_cast<double>(f / layout.width) + 0.5); };
        svg += "<line x1=\"" + num(cx(a)) + "\" y1=\"" + num(cy(a)) + "\" x2=\"" + num(cx(b)) + "\" y2=\"" +
               num(cy(b)) + "\" stroke=\"#d62728\" stroke-opacity=\"0.7\" stroke-width=\"" + num(max_width * v) +
               "\" stroke-linecap=\"round\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

void render_grid_heatmap(std::span<const double> pair_values, const GridLayout& layout, const RenderSpec& spec,
                         const std::filesystem::path& path) {
    write_text_file(path, grid_heatmap_svg(pair_values, layout, spec));
}

std::string presence_scatter_svg(const RealMatrix& embeddings, const RealMatrix& probes,
                                 std::span<const double> presence) {
    if (embeddings.cols() < 2 || probes.cols() != embeddings.cols()) {
        throw ParameterError("scatter needs at least 2 latent dimensions shared by samples and probes");
    }
    if (presence.size() != probes.rows()) {
        throw ParameterError("presence length must equal the locality count");
    }
    constexpr double kPlot = 400.0;
    constexpr double kMargin = 20.0;
    constexpr double kLegend = 70.0;
    double xmin = embeddings(0, 0);
    double xmax = xmin;
    double ymin = embeddings(0, 1);
    double ymax = ymin;
    const auto extend = [&](const RealMatrix& m) {
        for (std::size_t i = 0; i < m.rows(); ++i) {
            xmin = std::min(xmin, m(i, 0));
            xmax = std::max(xmax, m(i, 0));
            ymin = std::min(ymin, m(i, 1));
            ymax = std::max(ymax, m(i, 1));
        }
    };
    extend(embeddings);
    extend(probes);
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    const double yspan = ymax > ymin ? ymax - ymin : 1.0;
    const auto px = [&](double x) { return kMargin + (x - xmin) / xspan * kPlot; };
    const auto py = [&](double y) { return kMargin + (ymax - y) / yspan * kPlot; };

    const double width = kPlot + 2 * kMargin + kLegend;
    const double height = kPlot + 2 * kMargin;
    std::string svg = svg_open(width, height);
    svg += "<defs><linearGradient id=\"presence\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">";
    for (int s = 0; s <= 4; ++s) {
        svg += "<stop offset=\"" + num(s / 4.0) + "\" stop-color=\"" + presence_color(s / 4.0) + "\"/>";
    }
    svg += "</linearGradient></defs>\n";
    svg += "<g id=\"samples\" fill=\"#d9d9d9\">\n";
    for (std::size_t i = 0; i < embeddings.rows(); ++i) {
        svg += "<circle cx=\"" + num(px(embeddings(i, 0))) + "\" cy=\"" + num(py(embeddings(i, 1))) + "\" r=\"1.5\"/>\n";
    }
    svg += "</g>\n<g id=\"probes\" stroke=\"#000000\" stroke-width=\"0.5\">\n";
    for (std::size_t l = 0; l < probes.rows(); ++l) {
        svg += "<circle cx=\"" + num(px(probes(l, 0))) + "\" cy=\"" + num(py(probes(l, 1))) + "\" r=\"5\" fill=\"" +
               presence_color(presence[l]) + "\"/>\n";
    }
    const double lx = kPlot + 2 * kMargin + 10.0;
    svg += "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"10\">\n";
    svg += "<rect x=\"" + num(lx) + "\" y=\"" + num(kMargin) + "\" width=\"15\" height=\"" + num(kPlot) +
           "\" fill=\"url(#presence)\"/>\n";
    svg += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(kMargin + 10) + "\">1</text>\n";
    svg += "<text x=\"" + num(lx + 20) + "\" y=\"" + num(kMargin + kPlot) + "\">0</text>\n";
    svg += "<text x=\"" + num(lx) + "\" y=\"" + num(kMargin - 6) + "\">presence</text>\n";
    svg += "</g>\n</svg>\n";
    return svg;
}

void render_presence_scatter(const RealMatrix& embeddings, const RealMatrix& probes, std::span<const double> presence,
                             const std::filesystem::path& path) {
    write_text_file(path, presence_scatter_svg(embeddings, probes, presence));
}

std::string pair_bar_chart_svg(std::span<const double> pair_values, std::span<const std::string> feature_names,
                               std::size_t top) {
    const auto pairs = PairIndex::from_pair_count(pair_values.size());
    if (feature_names.size() != pairs.features()) {
        throw ParameterError("feature name count does not match the pair vector");
    }
    std::vector<std::size_t> order(pair_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pair_values[a] > pair_values[b]; });
    order.resize(std::min(top, order.size()));
    while (!order.empty() && !(pair_values[order.back()] > 0.0)) {
        order.pop_back();
    }

    constexpr double kLabel = 220.0;
    constexpr double kBar = 300.0;
    constexpr double kRow = 16.0;
    const double height = kRow * static_cast<double>(order.size()) + 20.0;
    std::string svg = svg_open(kLabel + kBar + 50.0, height);
    svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
        const auto [a, b] = pairs.pair(order[r]);
        const double y = 10.0 + kRow * static_cast<double>(r);
        const double v = pair_values[order[r]];
        svg += "<text x=\"" + num(kLabel - 6) + "\" y=\"" + num(y + 11) + "\" text-anchor=\"end\">" +
               escape_xml(feature_names[a] + " / " + feature_names[b]) + "</text>\n";
        svg += "<rect x=\"" + num(kLabel) + "\" y=\"" + num(y + 2) + "\" width=\"" + num(kBar * std::clamp(v, 0.0, 1.0)) +
               "\" height=\"" + num(kRow - 4) + "\" fill=\"#08306b\"/>\n";
        svg += "<text x=\"" + num(kLabel + kBar * std::clamp(v, 0.0, 1.0) + 4) + "\" y=\"" + num(y + 11) + "\">" +
               num(v) + "</text>\n";
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

}  // namespace lava
