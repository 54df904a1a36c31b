#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "virtlev/core.hpp"

namespace virtlev {

/// Compactly supported complex potential: V(x) = 0 for |x| > a. Used both on
/// the line and, with x read as r >= 0, for radial potentials.
struct Potential1D {
    double support_radius = 1.0;
    std::function<cplx(double)> sampler;
    std::string label;

    cplx operator()(double x) const {
        if (std::abs(x) > support_radius) return 0.0;
        return sampler(x);
    }
};

inline void validate(const Potential1D& v) {
    if (!(v.support_radius > 0.0) || !std::isfinite(v.support_radius))
        fail(ErrorKind::InvalidInput, "potential: support radius must be positive");
    if (!v.sampler) fail(ErrorKind::InvalidInput, "potential: missing sampler");
}

inline Potential1D zero_potential() {
    return {1.0, [](double) { return cplx(0.0); }, "zero"};
}

/// amp * indicator of [-a, a]
inline Potential1D bump_potential(cplx amp, double a = 1.0) {
    std::ostringstream os;
    os.precision(15);
    os << "bump:amp=" << amp.real();
    if (amp.imag() != 0.0) os << ",amp_im=" << amp.imag();
    os << ",a=" << a;
    return {a, [amp](double) { return amp; }, os.str()};
}

/// Square well -g * indicator of [-1, 1]
inline Potential1D well_potential(double g, double a = 1.0) {
    std::ostringstream os;
    os.precision(15);
    os << "well:g=" << g;
    if (a != 1.0) os << ",a=" << a;
    return {a, [g](double) { return cplx(-g); }, os.str()};
}

/// amp * (1 - (x/a)^2)^2 on [-a, a], a C^1 bump
inline Potential1D smooth_bump_potential(cplx amp, double a = 1.0) {
    if (!(a > 0.0)) fail(ErrorKind::InvalidInput, "smooth bump: a must be positive");
    std::ostringstream os;
    os.precision(15);
    os << "smooth:amp=" << amp.real();
    if (amp.imag() != 0.0) os << ",amp_im=" << amp.imag();
    os << ",a=" << a;
    return {a,
            [amp, a](double x) {
                const double t = 1.0 - (x / a) * (x / a);
                return amp * (t * t);
            },
            os.str()};
}

/// Piecewise-linear interpolation of tabulated (x, V) pairs, zero outside the
/// tabulated range.
inline Potential1D table_potential(std::vector<double> xs, std::vector<cplx> vs, std::string label = "table") {
    if (xs.size() < 2 || xs.size() != vs.size()) fail(ErrorKind::InvalidInput, "table potential: need >= 2 rows");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !is_finite(vs[i])) fail(ErrorKind::InvalidInput, "table potential: non-finite entry");
        if (i && !(xs[i] > xs[i - 1])) fail(ErrorKind::InvalidInput, "table potential: x must be increasing");
    }
    const double a = std::max(std::abs(xs.front()), std::abs(xs.back()));
    auto data = std::make_shared<std::pair<std::vector<double>, std::vector<cplx>>>(std::move(xs), std::move(vs));
    return {a,
            [data](double x) -> cplx {
                const auto& [px, pv] = *data;
                if (x < px.front() || x > px.back()) return 0.0;
                auto it = std::upper_bound(px.begin(), px.end(), x);
                if (it == px.end()) return pv.back();
                const std::size_t i = std::size_t(it - px.begin());
                const double t = (x - px[i - 1]) / (px[i] - px[i - 1]);
                return (1.0 - t) * pv[i - 1] + t * pv[i];
            },
            std::move(label)};
}

/// Reads "x,V_re[,V_im]" rows; blank lines and lines starting with '#' or a
/// non-numeric header are skipped.
inline Potential1D load_table_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidInput, "table potential: cannot open " + path);
    std::vector<double> xs;
    std::vector<cplx> vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x = 0, re = 0, im = 0;
        if (!(row >> x >> re)) {
            if (xs.empty()) continue;
            fail(ErrorKind::InvalidInput, "table potential: malformed row '" + line + "'");
        }
        if (!(row >> im)) im = 0.0;
        xs.push_back(x);
        vs.emplace_back(re, im);
    }
    return table_potential(std::move(xs), std::move(vs), "table:" + path);
}

namespace detail {

inline std::map<std::string, std::string> parse_kv_list(const std::string& s) {
    std::map<std::string, std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            fail(ErrorKind::Usage, "potential spec: expected key=value, got '" + item + "'");
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

inline double parse_number(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        fail(ErrorKind::Usage, "potential spec: bad number for " + key + ": '" + s + "'");
    }
}

} // namespace detail

/// Parses `zero`, `well:g=G[,a=A]`, `bump:amp=A[,amp_im=B][,a=A]`,
/// `smooth:amp=A[,amp_im=B][,a=A]`,
/// `table:path.csv`.
inline Potential1D parse_potential(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "zero" && rest.empty()) return zero_potential();
    if (kind == "table") {
        if (rest.empty()) fail(ErrorKind::Usage, "potential spec: table needs a path");
        return load_table_potential(rest);
    }
    auto kv = detail::parse_kv_list(rest);
    const auto take = [&](const std::string& key, std::optional<double> fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) {
            if (!fallback) fail(ErrorKind::Usage, "potential spec: missing " + key + " in '" + spec + "'");
            return *fallback;
        }
        const double v = detail::parse_number(it->second, key);
        kv.erase(it);
        return v;
    };
    Potential1D v;
    if (kind == "well") {
        const double g = take("g", std::nullopt);
        const double a = take("a", 1.0);
        v = well_potential(g, a);
    } else if (kind == "bump" || kind == "smooth") {
        const double amp = take("amp", std::nullopt);
        const double amp_im = take("amp_im", 0.0);
        const double a = take("a", 1.0);
        v = kind == "bump" ? bump_potential(cplx(amp, amp_im), a) : smooth_bump_potential(cplx(amp, amp_im), a);
    } else {
        fail(ErrorKind::Usage, "potential spec: unknown kind '" + kind + "'");
    }
    if (!kv.empty()) fail(ErrorKind::Usage, "potential spec: unknown key '" + kv.begin()->first + "'");
    validate(v);
    return v;
}

/// Average of V over [x - h/2, x + h/2] by two-point Gauss-Legendre on each
/// half cell. Jumps located at grid nodes are averaged exactly.
inline cplx cell_average(const Potential1D& v, double x, double h) {
    static const double g = 0.5 / std::sqrt(3.0);
    const double q = 0.5 * h;
    const double left = x - 0.5 * q;
    const double right = x + 0.5 * q;
    return 0.25 * (v(left - g * q) + v(left + g * q) + v(right - g * q) + v(right + g * q));
}

} // namespace virtlev
