#include "wga/field.hpp"

#include "wga/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace wga {

void TransverseGrid::validate() const {
    if (nx < 8 || ny < 8) {
        throw InvalidParameter("transverse grid needs nx, ny >= 8");
    }
    if (!(dx > 0.0) || !(dy > 0.0) || !std::isfinite(dx) || !std::isfinite(dy)) {
        throw InvalidParameter("transverse grid steps must be positive and finite");
    }
    if (!std::isfinite(x0) || !std::isfinite(y0)) {
        throw InvalidParameter("transverse grid origin must be finite");
    }
}

TransverseGrid TransverseGrid::covering(double xmin, double xmax, double ymin, double ymax,
                                        double dx, double dy) {
    if (!(xmax > xmin) || !(ymax > ymin) || !(dx > 0.0) || !(dy > 0.0)) {
        throw InvalidParameter("covering grid needs a non-empty box and positive steps");
    }
    TransverseGrid g;
    g.dx = dx;
    g.dy = dy;
    g.nx = static_cast<std::size_t>(std::ceil((xmax - xmin) / dx - 1e-9)) + 1;
    g.ny = static_cast<std::size_t>(std::ceil((ymax - ymin) / dy - 1e-9)) + 1;
    g.x0 = 0.5 * (xmin + xmax) - 0.5 * static_cast<double>(g.nx - 1) * dx;
    g.y0 = 0.5 * (ymin + ymax) - 0.5 * static_cast<double>(g.ny - 1) * dy;
    g.validate();
    return g;
}

bool TransverseGrid::same_as(const TransverseGrid& o) const noexcept {
    return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy && x0 == o.x0 && y0 == o.y0;
}

namespace {

template <typename F>
void require_same_grid(const F& a, const F& b) {
    if (!a.grid.same_as(b.grid)) {
        throw InvalidParameter("fields are sampled on different grids");
    }
}

}  // namespace

double inner(const RealField& a, const RealField& b) {
    require_same_grid(a, b);
    return a.values.dot(b.values) * a.grid.cell_area();
}

std::complex<double> inner(const ComplexField& a, const ComplexField& b) {
    require_same_grid(a, b);
    return a.values.dot(b.values) * a.grid.cell_area();
}

double norm(const RealField& f) { return std::sqrt(f.values.squaredNorm() * f.grid.cell_area()); }

double norm(const ComplexField& f) {
    return std::sqrt(f.values.squaredNorm() * f.grid.cell_area());
}

ComplexField to_complex(const RealField& f) {
    return ComplexField(f.grid, f.values.cast<std::complex<double>>());
}

RealField intensity(const ComplexField& f) { return RealField(f.grid, f.values.cwiseAbs2()); }

RealField amplitude(const ComplexField& f) { return RealField(f.grid, f.values.cwiseAbs()); }

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field(std::ostream& out, const RealField& f) {
    const auto& g = f.grid;
    out << "# nx=" << g.nx << " ny=" << g.ny << " dx=" << format_double(g.dx)
        << " dy=" << format_double(g.dy) << " x0=" << format_double(g.x0)
        << " y0=" << format_double(g.y0) << '\n';
    for (std::size_t iy = 0; iy < g.ny; ++iy) {
        for (std::size_t ix = 0; ix < g.nx; ++ix) {
            if (ix > 0) {
                out << ' ';
            }
            out << format_double(f.at(ix, iy));
        }
        out << '\n';
    }
}

namespace {

double parse_double(const std::string& token, const char* what) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
        throw FormatError(std::string("malformed ") + what + ": '" + token + "'");
    }
    return v;
}

}  // namespace

RealField read_field(std::istream& in) {
    std::string header;
    if (!std::getline(in, header) || header.rfind('#', 0) != 0) {
        throw FormatError("field file must start with a '# nx=... ny=...' header line");
    }
    std::map<std::string, std::string> kv;
    std::istringstream hs(header.substr(1));
    std::string item;
    while (hs >> item) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw FormatError("malformed header entry '" + item + "'");
        }
        kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
    for (const char* key : {"nx", "ny", "dx", "dy", "x0", "y0"}) {
        if (!kv.count(key)) {
            throw FormatError(std::string("field header lacks '") + key + "'");
        }
    }
    TransverseGrid g;
    g.nx = static_cast<std::size_t>(parse_double(kv["nx"], "nx"));
    g.ny = static_cast<std::size_t>(parse_double(kv["ny"], "ny"));
    g.dx = parse_double(kv["dx"], "dx");
    g.dy = parse_double(kv["dy"], "dy");
    g.x0 = parse_double(kv["x0"], "x0");
    g.y0 = parse_double(kv["y0"], "y0");
    g.validate();

    RealField f(g);
    std::string token;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(in >> token)) {
            throw FormatError("field file ended after " + std::to_string(i) + " of " +
                              std::to_string(g.size()) + " values");
        }
        f.values(static_cast<Eigen::Index>(i)) = parse_double(token, "value");
    }
    if (in >> token) {
        throw FormatError("field file has trailing values");
    }
    return f;
}

void save_field(const std::string& path, const RealField& f) {
    std::ostringstream out;
    write_field(out, f);
    write_file_atomic(path, out.str());
}

RealField load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open field file '" + path + "'");
    }
    return read_field(in);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot open '" + tmp + "' for writing");
        }
        out << content;
        if (!out.flush()) {
            throw Error("failed writing '" + tmp + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
    }
}

}  // namespace wga
