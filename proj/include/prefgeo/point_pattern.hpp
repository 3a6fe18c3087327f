#pragma once

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "prefgeo/errors.hpp"
#include "prefgeo/window.hpp"

namespace prefgeo {

// Observed locations in a window with per-point marks and covariate vectors.
// Covariates are stored row-major, p per point, first entry the intercept 1.
struct PointPattern {
    Window window;
    std::vector<double> x, y;  // locations
    std::vector<double> z;     // marks
    std::vector<double> w;     // covariates, size() == n * p
    std::size_t p = 1;

    std::size_t size() const { return x.size(); }
    std::size_t covariate_dim() const { return p; }
    double covariate(std::size_t i, std::size_t a) const { return w[i * p + a]; }

    void add_point(double px, double py, double mark, const std::vector<double>& cov) {
        x.push_back(px);
        y.push_back(py);
        z.push_back(mark);
        w.insert(w.end(), cov.begin(), cov.end());
    }

    void validate() const {
        window.validate();
        if (y.size() != size() || z.size() != size() || w.size() != size() * p)
            throw DataError("PointPattern: field lengths disagree");
        if (p < 1) throw DataError("PointPattern: p >= 1 required");
        for (std::size_t i = 0; i < size(); ++i)
            if (!window.contains(x[i], y[i]))
                throw DataError("PointPattern: point outside window at index " +
                                std::to_string(i));
    }
};

namespace detail {

// Shortest round-trip decimal form of a double.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back;
    std::sscanf(buf, "%lg", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char shorter[40];
            std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
            std::sscanf(shorter, "%lg", &back);
            if (back == v) return shorter;
        }
    }
    return buf;
}

}  // namespace detail

// CSV with header x,y,z,w1,...,wp. Doubles are written in the shortest
// round-trip form so serialize/parse is bit-exact.
inline void write_pattern_csv(const PointPattern& pat, std::ostream& os) {
    os << "x,y,z";
    for (std::size_t a = 0; a < pat.p; ++a) os << ",w" << (a + 1);
    os << "\n";
    for (std::size_t i = 0; i < pat.size(); ++i) {
        os << detail::fmt_double(pat.x[i]) << ',' << detail::fmt_double(pat.y[i]) << ','
           << detail::fmt_double(pat.z[i]);
        for (std::size_t a = 0; a < pat.p; ++a)
            os << ',' << detail::fmt_double(pat.covariate(i, a));
        os << "\n";
    }
}

inline PointPattern read_pattern_csv(std::istream& is, const Window& window) {
    PointPattern pat;
    pat.window = window;
    std::string line;
    if (!std::getline(is, line)) throw DataError("pattern csv: empty file");
    std::size_t ncols = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    if (ncols < 4 || line.rfind("x,y,z", 0) != 0)
        throw DataError("pattern csv: expected header x,y,z,w1,...");
    pat.p = ncols - 3;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw DataError("pattern csv: malformed value at line " + std::to_string(lineno));
            vals.push_back(v);
        }
        if (vals.size() != ncols)
            throw DataError("pattern csv: wrong column count at line " + std::to_string(lineno));
        pat.x.push_back(vals[0]);
        pat.y.push_back(vals[1]);
        pat.z.push_back(vals[2]);
        for (std::size_t a = 0; a < pat.p; ++a) pat.w.push_back(vals[3 + a]);
    }
    pat.validate();
    return pat;
}

}  // namespace prefgeo
