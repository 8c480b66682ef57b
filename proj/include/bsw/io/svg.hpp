#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "bsw/beats.hpp"
#include "bsw/diagnosis.hpp"
#include "bsw/error.hpp"
#include "bsw/io/atomic_write.hpp"

namespace bsw {

struct SvgCurve {
    std::string label;
    Beat samples;
    double occurrence = 1.0;  // drives stroke opacity
};

// Translucent background band, e.g. to mark the P/QRS/T windows.
struct WaveBand {
    std::size_t start = 0;
    std::size_t end = 0;  // inclusive sample index
    std::string color = "#dddddd";
    std::string label;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
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

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace detail

// One polyline per curve on a shared amplitude scale; stroke opacity is the
// curve's occurrence divided by the largest occurrence, so denser prototypes
// draw darker. Optional shaded bands go behind the curves.
inline void emit_svg_comparison(const std::vector<SvgCurve>& curves,
                                const std::vector<WaveBand>& bands,
                                const std::filesystem::path& path,
                                const std::string& title = {}) {
    if (curves.empty())
        fail(ErrorCode::EmptyInput, "an SVG needs at least one curve");
    const std::size_t n = curves.front().samples.size();
    if (n < 2) fail(ErrorCode::LengthMismatch, "curves need at least 2 samples");
    for (const SvgCurve& c : curves)
        if (c.samples.size() != n)
            fail(ErrorCode::LengthMismatch, "curves differ in length");

    const double width = 800.0, height = 400.0;
    const double ml = 50.0, mr = 15.0, mt = title.empty() ? 15.0 : 35.0, mb = 30.0;
    double lo = curves[0].samples[0], hi = lo;
    for (const SvgCurve& c : curves) {
        for (double v : c.samples) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (hi - lo < 1e-12) {  // flat curves still need a finite scale
        hi += 0.5;
        lo -= 0.5;
    }
    double max_occ = 0.0;
    for (const SvgCurve& c : curves) max_occ = std::max(max_occ, c.occurrence);
    if (max_occ <= 0.0) max_occ = 1.0;

    auto x_of = [&](double t) {
        return ml + (width - ml - mr) * t / static_cast<double>(n - 1);
    };
    auto y_of = [&](double v) {
        return mt + (height - mt - mb) * (hi - v) / (hi - lo);
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::fmt(width) + "\" height=\"" + detail::fmt(height) +
           "\" viewBox=\"0 0 " + detail::fmt(width) + " " + detail::fmt(height) +
           "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        svg += "<text x=\"" + detail::fmt(width / 2) +
               "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"16\">" +
               detail::xml_escape(title) + "</text>\n";
    for (const WaveBand& band : bands) {
        const double x0 = x_of(static_cast<double>(std::min(band.start, n - 1)));
        const double x1 = x_of(static_cast<double>(std::min(band.end, n - 1)));
        svg += "<rect x=\"" + detail::fmt(x0) + "\" y=\"" + detail::fmt(mt) +
               "\" width=\"" + detail::fmt(std::max(x1 - x0, 1.0)) + "\" height=\"" +
               detail::fmt(height - mt - mb) + "\" fill=\"" +
               detail::xml_escape(band.color) + "\" fill-opacity=\"0.35\"/>\n";
        if (!band.label.empty())
            svg += "<text x=\"" + detail::fmt((x0 + x1) / 2) + "\" y=\"" +
                   detail::fmt(mt + 14) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                   "font-size=\"11\" fill=\"#555555\">" +
                   detail::xml_escape(band.label) + "</text>\n";
    }
    // zero line and frame
    if (lo < 0.0 && hi > 0.0)
        svg += "<line x1=\"" + detail::fmt(ml) + "\" y1=\"" + detail::fmt(y_of(0)) +
               "\" x2=\"" + detail::fmt(width - mr) + "\" y2=\"" +
               detail::fmt(y_of(0)) + "\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
    svg += "<rect x=\"" + detail::fmt(ml) + "\" y=\"" + detail::fmt(mt) +
           "\" width=\"" + detail::fmt(width - ml - mr) + "\" height=\"" +
           detail::fmt(height - mt - mb) +
           "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    for (const SvgCurve& c : curves) {
        svg += "<polyline fill=\"none\" stroke=\"#1a466b\" stroke-width=\"1.5\" "
               "stroke-opacity=\"" +
               detail::fmt(c.occurrence / max_occ) + "\"";
        if (!c.label.empty())
            svg += " data-label=\"" + detail::xml_escape(c.label) + "\"";
        svg += " points=\"";
        for (std::size_t t = 0; t < n; ++t) {
            if (t) svg += ' ';
            svg += detail::fmt(x_of(static_cast<double>(t))) + "," +
                   detail::fmt(y_of(c.samples[t]));
        }
        svg += "\"/>\n";
    }
    // amplitude extent labels
    svg += "<text x=\"4\" y=\"" + detail::fmt(mt + 10) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::fmt(hi) +
           "</text>\n";
    svg += "<text x=\"4\" y=\"" + detail::fmt(height - mb) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::fmt(lo) +
           "</text>\n";
    svg += "</svg>\n";
    write_file_atomic(path, svg);
}

// Row-normalized 2x2 confusion matrix per method, Fig.-5 style: cell shading
// tracks the row share, with counts and shares printed in each cell.
inline void emit_svg_confusion(const std::vector<std::pair<std::string, ConfusionMatrix>>& methods,
                               const std::filesystem::path& path) {
    if (methods.empty())
        fail(ErrorCode::EmptyInput, "confusion figure needs at least one method");
    const double cell = 90.0, gap = 60.0, ml = 110.0, mt = 70.0;
    const double block = 2 * cell + gap;
    const double width = ml + methods.size() * block;
    const double height = mt + 2 * cell + 50.0;

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           detail::fmt(width) + "\" height=\"" + detail::fmt(height) +
           "\" viewBox=\"0 0 " + detail::fmt(width) + " " + detail::fmt(height) +
           "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"12\" y=\"" + detail::fmt(mt + cell / 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\">true LVH</text>\n";
    svg += "<text x=\"12\" y=\"" + detail::fmt(mt + cell + cell / 2) +
           "\" font-family=\"sans-serif\" font-size=\"12\">true Normal</text>\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
        const auto& [name, cm] = methods[m];
        const double x0 = ml + m * block;
        svg += "<text x=\"" + detail::fmt(x0 + cell) +
               "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"14\">" +
               detail::xml_escape(name) + "</text>\n";
        svg += "<text x=\"" + detail::fmt(x0 + cell / 2) + "\" y=\"" +
               detail::fmt(mt - 8) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">pred LVH</text>\n";
        svg += "<text x=\"" + detail::fmt(x0 + cell + cell / 2) + "\" y=\"" +
               detail::fmt(mt - 8) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">pred Normal</text>\n";
        const double lvh_row = static_cast<double>(cm.tp + cm.fn);
        const double norm_row = static_cast<double>(cm.fp + cm.tn);
        const double shares[2][2] = {
            {lvh_row > 0 ? cm.tp / lvh_row : 0.0, lvh_row > 0 ? cm.fn / lvh_row : 0.0},
            {norm_row > 0 ? cm.fp / norm_row : 0.0,
             norm_row > 0 ? cm.tn / norm_row : 0.0}};
        const std::size_t counts[2][2] = {{cm.tp, cm.fn}, {cm.fp, cm.tn}};
        for (int row = 0; row < 2; ++row) {
            for (int col = 0; col < 2; ++col) {
                const double x = x0 + col * cell;
                const double y = mt + row * cell;
                const int shade =
                    255 - static_cast<int>(std::lround(shares[row][col] * 160.0));
                char color[16];
                std::snprintf(color, sizeof color, "#%02x%02xff", shade, shade);
                svg += "<rect x=\"" + detail::fmt(x) + "\" y=\"" + detail::fmt(y) +
                       "\" width=\"" + detail::fmt(cell) + "\" height=\"" +
                       detail::fmt(cell) + "\" fill=\"" + color +
                       "\" stroke=\"#666666\"/>\n";
                char text[64];
                std::snprintf(text, sizeof text, "%zu (%.2f)", counts[row][col],
                              shares[row][col]);
                svg += "<text x=\"" + detail::fmt(x + cell / 2) + "\" y=\"" +
                       detail::fmt(y + cell / 2 + 4) +
                       "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                       "font-size=\"12\">" +
                       text + "</text>\n";
            }
        }
        char stats[96];
        std::snprintf(stats, sizeof stats, "sens %.2f / spec %.2f",
                      cm.sensitivity(), cm.specificity());
        svg += "<text x=\"" + detail::fmt(x0 + cell) + "\" y=\"" +
               detail::fmt(mt + 2 * cell + 24) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"12\">" +
               stats + "</text>\n";
    }
    svg += "</svg>\n";
    write_file_atomic(path, svg);
}

}  // namespace bsw
