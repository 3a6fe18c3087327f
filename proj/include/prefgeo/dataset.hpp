#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "prefgeo/errors.hpp"
#include "prefgeo/point_pattern.hpp"
#include "prefgeo/window.hpp"

namespace prefgeo {

// Plain-text covariate raster: a one-line header
//   ncols nrows cellsize xmin ymin
// followed by ncols*nrows row-major values, row 0 at ymin.
struct Raster {
    int ncols = 0, nrows = 0;
    double cellsize = 1.0, xmin = 0.0, ymin = 0.0;
    std::vector<double> values;

    Window extent() const {
        return Window{xmin, xmin + ncols * cellsize, ymin, ymin + nrows * cellsize};
    }

    double at(int col, int row) const {
        return values[static_cast<std::size_t>(row) * ncols + col];
    }

    // Bilinear on cell centers, clamped at the half-cell boundary band.
    double bilinear(double x, double y) const {
        double u = (x - xmin) / cellsize - 0.5;
        double v = (y - ymin) / cellsize - 0.5;
        int i0 = std::max(0, std::min(static_cast<int>(std::floor(u)), ncols - 2));
        int j0 = std::max(0, std::min(static_cast<int>(std::floor(v)), nrows - 2));
        double fu = std::min(1.0, std::max(0.0, u - i0));
        double fv = std::min(1.0, std::max(0.0, v - j0));
        return (1 - fu) * (1 - fv) * at(i0, j0) + fu * (1 - fv) * at(i0 + 1, j0) +
               (1 - fu) * fv * at(i0, j0 + 1) + fu * fv * at(i0 + 1, j0 + 1);
    }

    static Raster read(std::istream& is) {
        Raster r;
        if (!(is >> r.ncols >> r.nrows >> r.cellsize >> r.xmin >> r.ymin))
            throw DataError("raster: malformed header (want: ncols nrows cellsize xmin ymin)");
        if (r.ncols < 2 || r.nrows < 2 || !(r.cellsize > 0.0))
            throw DataError("raster: invalid dimensions");
        r.values.resize(static_cast<std::size_t>(r.ncols) * r.nrows);
        for (auto& v : r.values)
            if (!(is >> v)) throw DataError("raster: too few values");
        return r;
    }

    void write(std::ostream& os) const {
        os << ncols << ' ' << nrows << ' ' << detail::fmt_double(cellsize) << ' '
           << detail::fmt_double(xmin) << ' ' << detail::fmt_double(ymin) << "\n";
        for (int row = 0; row < nrows; ++row) {
            for (int col = 0; col < ncols; ++col)
                os << (col ? " " : "") << detail::fmt_double(at(col, row));
            os << "\n";
        }
    }
};

struct IngestReport {
    std::size_t kept = 0;
    std::size_t rejected_outside = 0;
    std::size_t rejected_domain = 0;  // marks failing the transform domain
};

// Reads `x,y,mark` CSV into a PointPattern, optionally sampling a covariate
// from a raster and applying the log(mark - 9) transform used for diameter
// data. Malformed rows fail hard with their line number; out-of-window and
// out-of-domain rows are dropped and counted.
inline PointPattern ingest_dataset(std::istream& csv, const Raster* covariate,
                                   bool log_dbh_transform,
                                   std::optional<Window> window = std::nullopt,
                                   IngestReport* report = nullptr) {
    std::string line;
    if (!std::getline(csv, line)) throw DataError("dataset: empty file");
    if (line.rfind("x,y,mark", 0) != 0)
        throw DataError("dataset: expected header x,y,mark");

    struct Row {
        double x, y, mark;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(csv, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw DataError("dataset: malformed value at line " + std::to_string(lineno));
            vals.push_back(v);
        }
        if (vals.size() != 3)
            throw DataError("dataset: expected 3 columns at line " + std::to_string(lineno));
        rows.push_back({vals[0], vals[1], vals[2]});
    }

    Window win;
    if (window)
        win = *window;
    else if (covariate)
        win = covariate->extent();
    else {
        if (rows.empty()) throw DataError("dataset: no rows and no window given");
        double x0 = rows[0].x, x1 = rows[0].x, y0 = rows[0].y, y1 = rows[0].y;
        for (const auto& r : rows) {
            x0 = std::min(x0, r.x);
            x1 = std::max(x1, r.x);
            y0 = std::min(y0, r.y);
            y1 = std::max(y1, r.y);
        }
        win = Window{x0, x1, y0, y1};
    }
    win.validate();

    IngestReport rep;
    PointPattern pat;
    pat.window = win;
    pat.p = covariate ? 2 : 1;
    for (const auto& r : rows) {
        if (!win.contains(r.x, r.y)) {
            ++rep.rejected_outside;
            continue;
        }
        double mark = r.mark;
        if (log_dbh_transform) {
            if (!(mark > 9.0)) {
                ++rep.rejected_domain;
                continue;
            }
            mark = std::log(mark - 9.0);
        }
        std::vector<double> wv{1.0};
        if (covariate) wv.push_back(covariate->bilinear(r.x, r.y));
        pat.add_point(r.x, r.y, mark, wv);
        ++rep.kept;
    }
    if (report) *report = rep;
    return pat;
}

}  // namespace prefgeo
