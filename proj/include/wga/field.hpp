// Transverse grids, sampled 2D fields and their text file format
//
// Samples are stored row-major with y increasing: index = iy * nx + ix, and
// sample (ix, iy) sits at (x0 + ix*dx, y0 + iy*dy). Lengths are in um.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>

namespace wga {

struct TransverseGrid {
    std::size_t nx{8};
    std::size_t ny{8};
    double dx{1.0};
    double dy{1.0};
    double x0{0.0};
    double y0{0.0};

    // Throws InvalidParameter unless nx, ny >= 8 and dx, dy > 0.
    void validate() const;

    // Smallest grid with the given steps covering [xmin, xmax] x [ymin, ymax],
    // symmetric about the centre of that box.
    static TransverseGrid covering(double xmin, double xmax, double ymin, double ymax, double dx,
                                   double dy);

    std::size_t size() const noexcept { return nx * ny; }
    std::size_t index(std::size_t ix, std::size_t iy) const noexcept { return iy * nx + ix; }
    double x(std::size_t ix) const noexcept { return x0 + static_cast<double>(ix) * dx; }
    double y(std::size_t iy) const noexcept { return y0 + static_cast<double>(iy) * dy; }
    double x_max() const noexcept { return x(nx - 1); }
    double y_max() const noexcept { return y(ny - 1); }
    double cell_area() const noexcept { return dx * dy; }

    bool same_as(const TransverseGrid& other) const noexcept;
};

template <typename Scalar>
struct Field {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    TransverseGrid grid;
    Vector values;

    Field() = default;
    explicit Field(const TransverseGrid& g) : grid(g), values(Vector::Zero(static_cast<Eigen::Index>(g.size()))) {}
    Field(const TransverseGrid& g, Vector v) : grid(g), values(std::move(v)) {}

    Scalar& at(std::size_t ix, std::size_t iy) { return values(static_cast<Eigen::Index>(grid.index(ix, iy))); }
    Scalar at(std::size_t ix, std::size_t iy) const { return values(static_cast<Eigen::Index>(grid.index(ix, iy))); }
};

using RealField = Field<double>;
using ComplexField = Field<std::complex<double>>;

// Grid inner product <a|b> = sum conj(a) b dx dy.
double inner(const RealField& a, const RealField& b);
std::complex<double> inner(const ComplexField& a, const ComplexField& b);
double norm(const RealField& f);
double norm(const ComplexField& f);

ComplexField to_complex(const RealField& f);
RealField intensity(const ComplexField& f);
RealField amplitude(const ComplexField& f);

// Text format: "# nx=.. ny=.. dx=.. dy=.. x0=.. y0=.." then ny rows of nx
// whitespace-separated values at 17 significant digits. NaN is written "nan".
void write_field(std::ostream& out, const RealField& f);
RealField read_field(std::istream& in);
void save_field(const std::string& path, const RealField& f);
RealField load_field(const std::string& path);

// Formats a double with 17 significant digits ("%.17g"); NaN -> "nan".
std::string format_double(double v);

// Writes content to path via a temporary file and rename.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace wga
