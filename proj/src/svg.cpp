#include "cache3d/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cache3d {

namespace {

constexpr double kWidth = 760.0, kHeight = 460.0;
constexpr double kLeft = 64.0, kRight = 744.0, kTop = 30.0, kBottom = 414.0;
const char* kDepthColor[4] = {"#999999", "#1f77b4", "#ff7f0e", "#2ca02c"};
const char* kLevelColor[3] = {"#1f77b4", "#ff7f0e", "#2ca02c"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Canvas {
    std::ostringstream body;
    double x_lo = 0.0, x_hi = 1.0;  // log10(budget) range
    double y_lo = 0.0, y_hi = 1.0;

    double px(double budget) const {
        double t = (std::log10(budget) - x_lo) / (x_hi - x_lo);
        return kLeft + t * (kRight - kLeft);
    }
    double py(double v) const {
        double t = (v - y_lo) / (y_hi - y_lo);
        return kBottom - t * (kBottom - kTop);
    }

    void line(double x1, double y1, double x2, double y2, const char* stroke,
              double width = 1.0) {
        body << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\""
             << fmt(x2) << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << stroke
             << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
    }
    void rect(double x, double y, double w, double h, const char* fill) {
        if (h <= 0.0 || w <= 0.0) return;
        body << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" width=\""
             << fmt(w) << "\" height=\"" << fmt(h) << "\" fill=\"" << fill
             << "\"/>\n";
    }
    void circle(double x, double y, double r, const char* fill) {
        body << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\""
             << fmt(r) << "\" fill=\"" << fill << "\"/>\n";
    }
    void text(double x, double y, const std::string& s, const char* anchor,
              double size = 11.0) {
        body << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y)
             << "\" font-family=\"sans-serif\" font-size=\"" << fmt(size)
             << "\" text-anchor=\"" << anchor << "\">" << s << "</text>\n";
    }

    void axes(const std::string& title, const std::string& x_label,
              const std::string& y_label) {
        line(kLeft, kBottom, kRight, kBottom, "#000000");
        line(kLeft, kBottom, kLeft, kTop, "#000000");
        text((kLeft + kRight) / 2.0, 18.0, title, "middle", 13.0);
        text((kLeft + kRight) / 2.0, kHeight - 8.0, x_label, "middle");
        body << "<text x=\"16\" y=\"" << fmt((kTop + kBottom) / 2.0)
             << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\""
             << "middle\" transform=\"rotate(-90 16 "
             << fmt((kTop + kBottom) / 2.0) << ")\">" << y_label << "</text>\n";
        // x ticks at decades
        int k_lo = static_cast<int>(std::ceil(x_lo - 1e-9));
        int k_hi = static_cast<int>(std::floor(x_hi + 1e-9));
        for (int k = k_lo; k <= k_hi; ++k) {
            double x = px(std::pow(10.0, k));
            line(x, kBottom, x, kBottom + 5.0, "#000000");
            text(x, kBottom + 18.0, fmt(std::pow(10.0, k)), "middle");
        }
        // y ticks
        for (int i = 0; i <= 5; ++i) {
            double v = y_lo + (y_hi - y_lo) * i / 5.0;
            double y = py(v);
            line(kLeft - 5.0, y, kLeft, y, "#000000");
            text(kLeft - 8.0, y + 4.0, fmt(v), "end");
            if (i > 0) line(kLeft, y, kRight, y, "#e0e0e0", 0.5);
        }
    }

    std::string finish() const {
        std::ostringstream out;
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
               "width=\""
            << fmt(kWidth) << "\" height=\"" << fmt(kHeight) << "\">\n"
            << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kWidth) << "\" height=\""
            << fmt(kHeight) << "\" fill=\"#ffffff\"/>\n"
            << body.str() << "</svg>\n";
        return out.str();
    }
};

Canvas make_canvas(const std::vector<SweepRow>& rows, double y_lo, double y_hi) {
    Canvas c;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& r : rows) {
        lo = std::min(lo, std::log10(r.area_budget));
        hi = std::max(hi, std::log10(r.area_budget));
    }
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    c.x_lo = lo;
    c.x_hi = hi;
    c.y_lo = y_lo;
    c.y_hi = y_hi;
    return c;
}

double bar_width(const Canvas& c, const std::vector<SweepRow>& rows) {
    double step = (kRight - kLeft);
    for (std::size_t i = 1; i < rows.size(); ++i)
        step = std::min(step, c.px(rows[i].area_budget) -
                                  c.px(rows[i - 1].area_budget));
    return std::max(1.0, 0.8 * step);
}

void depth_legend(Canvas& c) {
    for (int d = 1; d <= 3; ++d) {
        double y = kTop + 14.0 * d;
        c.circle(kRight - 86.0, y - 4.0, 4.0, kDepthColor[d]);
        c.text(kRight - 76.0, y, "depth " + std::to_string(d), "start");
    }
}

void level_legend(Canvas& c) {
    for (int l = 0; l < 3; ++l) {
        double y = kTop + 14.0 * (l + 1);
        c.rect(kRight - 90.0, y - 9.0, 9.0, 9.0, kLevelColor[l]);
        c.text(kRight - 76.0, y, "L" + std::to_string(l + 1), "start");
    }
}

}  // namespace

std::string chart_delay_vs_area(const std::vector<SweepRow>& rows) {
    double max_delay = 0.0;
    for (const auto& r : rows)
        if (r.delay) max_delay = std::max(max_delay, *r.delay);
    if (max_delay <= 0.0) max_delay = 1.0;
    Canvas c = make_canvas(rows, 0.0, 1.05 * max_delay);
    c.axes("optimal average memory delay vs. area budget", "area budget",
           "average memory delay");

    // polyline segments between consecutive feasible points
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (!rows[i - 1].delay || !rows[i].delay) continue;
        c.line(c.px(rows[i - 1].area_budget), c.py(*rows[i - 1].delay),
               c.px(rows[i].area_budget), c.py(*rows[i].delay), "#555555", 1.2);
    }
    for (const auto& r : rows) {
        if (!r.delay) continue;
        c.circle(c.px(r.area_budget), c.py(*r.delay), 3.0,
                 kDepthColor[std::clamp(r.winner_depth, 0, 3)]);
    }
    depth_legend(c);
    return c.finish();
}

std::string chart_area_fractions(const std::vector<SweepRow>& rows) {
    Canvas c = make_canvas(rows, 0.0, 1.0);
    c.axes("per-level fraction of cache area vs. area budget", "area budget",
           "fraction of area");
    double w = bar_width(c, rows);
    for (const auto& r : rows) {
        if (r.winner_depth == 0) continue;
        double x = c.px(r.area_budget) - w / 2.0;
        double base = 0.0;
        for (int l = 0; l < r.winner_depth; ++l) {
            double top = base + r.area_frac[l];
            c.rect(x, c.py(top), w, c.py(base) - c.py(top), kLevelColor[l]);
            base = top;
        }
    }
    level_legend(c);
    return c.finish();
}

std::string chart_layer_allocation(const std::vector<SweepRow>& rows,
                                   int total_layers) {
    Canvas c = make_canvas(rows, 0.0, static_cast<double>(total_layers));
    c.axes("per-level 3D layer allocation vs. area budget", "area budget",
           "3D silicon layers");
    double w = bar_width(c, rows);
    for (const auto& r : rows) {
        if (r.winner_depth == 0) continue;
        double x = c.px(r.area_budget) - w / 2.0;
        double base = 0.0;
        for (int l = 0; l < r.winner_depth; ++l) {
            double top = base + r.layers[l];
            c.rect(x, c.py(top), w, c.py(base) - c.py(top), kLevelColor[l]);
            base = top;
        }
    }
    level_legend(c);
    return c.finish();
}

}  // namespace cache3d
