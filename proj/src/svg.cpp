#include "wga/svg.hpp"

#include "wga/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wga {

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

// 1-2-5 steps giving roughly six ticks over [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> t;
    for (double v = std::ceil(lo / step - 1e-9) * step; v <= hi + 1e-9 * step; v += step) {
        t.push_back(v);
    }
    return t;
}

}  // namespace

std::string render_line_chart(const std::vector<Series>& series, const ChartOptions& opts) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto usable = [&](const std::optional<double>& y) {
        return y && std::isfinite(*y) && (!opts.log_y || *y > 0.0);
    };
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) {
            throw InvalidParameter("series '" + s.label + "' has mismatched x and y lengths");
        }
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
            const double y = opts.log_y ? std::log10(*s.y[i]) : *s.y[i];
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmax >= xmin) || !(ymax >= ymin)) {
        throw InvalidParameter("chart has no drawable points");
    }
    if (xmax == xmin) { xmin -= 0.5; xmax += 0.5; }
    if (opts.log_y) {
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
        if (ymax == ymin) ymax += 1.0;
    } else if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    } else {
        const double pad = 0.04 * (ymax - ymin);
        ymin -= pad;
        ymax += pad;
    }

    const double left = 80, right = 20 + 150, top = 40, bottom = 60;
    const double pw = opts.width - left - right, ph = opts.height - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
      << opts.height << "\" viewBox=\"0 0 " << opts.width << ' ' << opts.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(opts.title) << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (double t : linear_ticks(xmin, xmax)) {
        o << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(px(t))
          << "\" y2=\"" << num(top + ph + 5) << "\" stroke=\"black\"/>"
          << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18)
          << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
    std::vector<double> yt;
    if (opts.log_y) {
        const int stride = std::max(1, static_cast<int>(std::ceil((ymax - ymin) / 8.0)));
        for (double e = ymin; e <= ymax + 1e-9; e += stride) yt.push_back(e);
    } else {
        yt = linear_ticks(ymin, ymax);
    }
    for (double t : yt) {
        const std::string lab = opts.log_y ? "1e" + tick_label(t) : tick_label(t);
        o << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left)
          << "\" y2=\"" << num(py(t)) << "\" stroke=\"black\"/>"
          << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(t) + 4)
          << "\" text-anchor=\"end\">" << lab << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(opts.height - 15.0)
      << "\" text-anchor=\"middle\">" << escape(opts.x_label) << "</text>\n";
    o << "<text transform=\"translate(18 " << num(top + ph / 2) << ") rotate(-90)\" "
      << "text-anchor=\"middle\">" << escape(opts.y_label) << (opts.log_y ? " (log scale)" : "")
      << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
        std::string path;
        bool pen = false;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!usable(s.y[i])) {
                pen = false;
                continue;
            }
            const double y = opts.log_y ? std::log10(*s.y[i]) : *s.y[i];
            path += (pen ? " L" : " M") + num(px(s.x[i])) + ' ' + num(py(y));
            pen = true;
        }
        if (!path.empty()) {
            o << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << color
              << "\" stroke-width=\"1.5\"/>\n";
        }
        const double ly = top + 14.0 + 18.0 * static_cast<double>(k);
        o << "<line x1=\"" << num(left + pw + 12) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
          << num(left + pw + 32) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/><text x=\"" << num(left + pw + 38) << "\" y=\"" << num(ly)
          << "\">" << escape(s.label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace wga
