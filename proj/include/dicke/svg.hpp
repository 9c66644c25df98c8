#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dicke/io.hpp"

// Small self-contained SVG emitter for the three plot kinds the tools need:
// line plots (survival probability curves), heatmaps (Lyapunov and P_R maps)
// and scatter plots (Poincare sections). Plots are generated purely from
// in-memory data that has already been written to CSV.

namespace dicke::svg {

struct Series {
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    std::string label;
    double line_width = 1.3;
    double marker_radius = 0.0;  // > 0 draws dots instead of a line
};

struct PlotOptions {
    std::string title, xlabel, ylabel;
    double width = 880, height = 560;
    bool log_y = false;
    std::vector<std::pair<double, std::string>> hlines;  // value, label
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
    std::vector<double> ticks;
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 0.5 * step; t += step) ticks.push_back(t == 0.0 ? 0.0 : t);
    return ticks;
}

struct Frame {
    double x0, y0, x1, y1;          // pixel corners of the data area
    double dx_lo, dx_hi, dy_lo, dy_hi;  // data ranges (y already log10 if log)
    double px(double x) const { return x0 + (x - dx_lo) / (dx_hi - dx_lo) * (x1 - x0); }
    double py(double y) const { return y1 - (y - dy_lo) / (dy_hi - dy_lo) * (y1 - y0); }
};

inline void draw_axes(std::string& out, const Frame& f, const PlotOptions& opts) {
    out += "<rect x='" + num(f.x0) + "' y='" + num(f.y0) + "' width='" + num(f.x1 - f.x0) +
           "' height='" + num(f.y1 - f.y0) + "' fill='none' stroke='#333' stroke-width='1'/>\n";
    for (double t : nice_ticks(f.dx_lo, f.dx_hi)) {
        const double x = f.px(t);
        out += "<line x1='" + num(x) + "' y1='" + num(f.y1) + "' x2='" + num(x) + "' y2='" +
               num(f.y1 + 5) + "' stroke='#333'/>\n";
        out += "<text x='" + num(x) + "' y='" + num(f.y1 + 18) +
               "' font-size='11' text-anchor='middle'>" + num(t) + "</text>\n";
    }
    if (opts.log_y) {
        for (int d = static_cast<int>(std::ceil(f.dy_lo)); d <= static_cast<int>(std::floor(f.dy_hi)); ++d) {
            const double y = f.py(d);
            out += "<line x1='" + num(f.x0 - 5) + "' y1='" + num(y) + "' x2='" + num(f.x0) +
                   "' y2='" + num(y) + "' stroke='#333'/>\n";
            out += "<text x='" + num(f.x0 - 8) + "' y='" + num(y + 4) +
                   "' font-size='11' text-anchor='end'>1e" + std::to_string(d) + "</text>\n";
        }
    } else {
        for (double t : nice_ticks(f.dy_lo, f.dy_hi)) {
            const double y = f.py(t);
            out += "<line x1='" + num(f.x0 - 5) + "' y1='" + num(y) + "' x2='" + num(f.x0) +
                   "' y2='" + num(y) + "' stroke='#333'/>\n";
            out += "<text x='" + num(f.x0 - 8) + "' y='" + num(y + 4) +
                   "' font-size='11' text-anchor='end'>" + num(t) + "</text>\n";
        }
    }
    if (!opts.title.empty())
        out += "<text x='" + num(0.5 * (f.x0 + f.x1)) + "' y='20' font-size='14' "
               "text-anchor='middle' font-weight='bold'>" + opts.title + "</text>\n";
    if (!opts.xlabel.empty())
        out += "<text x='" + num(0.5 * (f.x0 + f.x1)) + "' y='" + num(f.y1 + 36) +
               "' font-size='12' text-anchor='middle'>" + opts.xlabel + "</text>\n";
    if (!opts.ylabel.empty())
        out += "<text x='14' y='" + num(0.5 * (f.y0 + f.y1)) +
               "' font-size='12' text-anchor='middle' transform='rotate(-90 14 " +
               num(0.5 * (f.y0 + f.y1)) + ")'>" + opts.ylabel + "</text>\n";
}

// five-stop approximation of a perceptually uniform dark-to-bright ramp
inline std::string ramp_color(double u) {
    static const double stops[5][3] = {
        {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
    u = std::min(1.0, std::max(0.0, u));
    const double s = u * 4.0;
    const int k = std::min(3, static_cast<int>(s));
    const double f = s - k;
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                  static_cast<int>(stops[k][0] + f * (stops[k + 1][0] - stops[k][0])),
                  static_cast<int>(stops[k][1] + f * (stops[k + 1][1] - stops[k][1])),
                  static_cast<int>(stops[k][2] + f * (stops[k + 1][2] - stops[k][2])));
    return buf;
}

}  // namespace detail

// ------------------------------------------------------------- line plot ----

inline std::string line_plot(const std::vector<Series>& series, const PlotOptions& opts) {
    using detail::num;
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    const auto ty = [&](double y) { return opts.log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (opts.log_y && s.y[i] <= 0.0) continue;
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, ty(s.y[i]));
            y_hi = std::max(y_hi, ty(s.y[i]));
        }
    for (const auto& h : opts.hlines) {
        y_lo = std::min(y_lo, ty(h.first));
        y_hi = std::max(y_hi, ty(h.first));
    }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
    const double pad = 0.04 * (y_hi - y_lo);
    detail::Frame f{70, 32, opts.width - 20, opts.height - 52, x_lo, x_hi, y_lo - pad, y_hi + pad};

    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(opts.width) +
                      "' height='" + num(opts.height) + "'>\n";
    out += "<rect width='100%' height='100%' fill='white'/>\n";
    detail::draw_axes(out, f, opts);

    for (const auto& h : opts.hlines) {
        const double y = f.py(ty(h.first));
        out += "<line x1='" + num(f.x0) + "' y1='" + num(y) + "' x2='" + num(f.x1) + "' y2='" +
               num(y) + "' stroke='#888' stroke-dasharray='6 4'/>\n";
        if (!h.second.empty())
            out += "<text x='" + num(f.x1 - 4) + "' y='" + num(y - 4) +
                   "' font-size='11' text-anchor='end' fill='#555'>" + h.second + "</text>\n";
    }

    double legend_y = f.y0 + 16;
    for (const auto& s : series) {
        if (s.marker_radius > 0.0) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                if (opts.log_y && s.y[i] <= 0.0) continue;
                out += "<circle cx='" + num(f.px(s.x[i])) + "' cy='" + num(f.py(ty(s.y[i]))) +
                       "' r='" + num(s.marker_radius) + "' fill='" + s.color + "'/>\n";
            }
        } else {
            std::string d;
            bool pen_down = false;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const bool ok = std::isfinite(s.x[i]) && std::isfinite(s.y[i]) &&
                                (!opts.log_y || s.y[i] > 0.0);
                if (!ok) {
                    pen_down = false;
                    continue;
                }
                d += (pen_down ? "L" : "M") + num(f.px(s.x[i])) + " " + num(f.py(ty(s.y[i])));
                pen_down = true;
            }
            out += "<path d='" + d + "' fill='none' stroke='" + s.color + "' stroke-width='" +
                   num(s.line_width) + "'/>\n";
        }
        if (!s.label.empty()) {
            out += "<line x1='" + num(f.x1 - 150) + "' y1='" + num(legend_y) + "' x2='" +
                   num(f.x1 - 120) + "' y2='" + num(legend_y) + "' stroke='" + s.color +
                   "' stroke-width='2'/>\n";
            out += "<text x='" + num(f.x1 - 114) + "' y='" + num(legend_y + 4) +
                   "' font-size='11'>" + s.label + "</text>\n";
            legend_y += 16;
        }
    }
    out += "</svg>\n";
    return out;
}

// --------------------------------------------------------------- heatmap ----

struct HeatmapOptions {
    std::string title, xlabel, ylabel;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    double width = 760, height = 640;
    // value range for the ramp; equal bounds trigger auto-scaling
    double v_min = 0.0, v_max = 0.0;
};

// values laid out row-major, rows along y bottom-up; NaN cells render grey
inline std::string heatmap(const std::vector<double>& values, int nx, int ny,
                           HeatmapOptions opts) {
    using detail::num;
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny)
        throw std::invalid_argument("heatmap: value count does not match the grid");
    double v_lo = opts.v_min, v_hi = opts.v_max;
    if (v_lo == v_hi) {
        v_lo = std::numeric_limits<double>::infinity();
        v_hi = -v_lo;
        for (double v : values)
            if (std::isfinite(v)) {
                v_lo = std::min(v_lo, v);
                v_hi = std::max(v_hi, v);
            }
        if (!(v_hi > v_lo)) {
            v_lo = 0.0;
            v_hi = 1.0;
        }
    }
    PlotOptions axis_opts{opts.title, opts.xlabel, opts.ylabel, opts.width, opts.height};
    detail::Frame f{70, 32, opts.width - 90, opts.height - 52,
                    opts.x_min, opts.x_max, opts.y_min, opts.y_max};
    std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(opts.width) +
                      "' height='" + num(opts.height) + "'>\n";
    out += "<rect width='100%' height='100%' fill='white'/>\n";
    const double cw = (f.x1 - f.x0) / nx, ch = (f.y1 - f.y0) / ny;
    for (int r = 0; r < ny; ++r)
        for (int c = 0; c < nx; ++c) {
            const double v = values[static_cast<std::size_t>(r) * nx + c];
            const std::string color =
                std::isfinite(v) ? detail::ramp_color((v - v_lo) / (v_hi - v_lo)) : "#d9d9d9";
            out += "<rect x='" + num(f.x0 + c * cw) + "' y='" + num(f.y1 - (r + 1) * ch) +
                   "' width='" + num(cw + 0.5) + "' height='" + num(ch + 0.5) + "' fill='" +
                   color + "'/>\n";
        }
    detail::draw_axes(out, f, axis_opts);
    // colorbar
    const double bx = f.x1 + 18, bw = 16;
    for (int i = 0; i < 50; ++i) {
        const double u0 = i / 50.0;
        out += "<rect x='" + num(bx) + "' y='" + num(f.y1 - (i + 1) / 50.0 * (f.y1 - f.y0)) +
               "' width='" + num(bw) + "' height='" + num((f.y1 - f.y0) / 50.0 + 0.5) +
               "' fill='" + detail::ramp_color(u0 + 0.01) + "'/>\n";
    }
    out += "<text x='" + num(bx + bw + 4) + "' y='" + num(f.y1 + 4) + "' font-size='10'>" +
           num(v_lo) + "</text>\n";
    out += "<text x='" + num(bx + bw + 4) + "' y='" + num(f.y0 + 8) + "' font-size='10'>" +
           num(v_hi) + "</text>\n";
    out += "</svg>\n";
    return out;
}

inline void write_plot(const std::string& path, const std::string& svg_text) {
    io::write_text_atomic(path, svg_text);
}

}  // namespace dicke::svg
