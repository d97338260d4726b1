#include "edgelab/distance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "edgelab/errors.hpp"

namespace edgelab {

std::string_view to_string(DistanceMetric m) {
    switch (m) {
    case DistanceMetric::Cosine: return "cosine";
    case DistanceMetric::Euclidean: return "euclidean";
    case DistanceMetric::Correlation: return "correlation";
    case DistanceMetric::Chebyshev: return "chebyshev";
    case DistanceMetric::BrayCurtis: return "braycurtis";
    case DistanceMetric::Canberra: return "canberra";
    case DistanceMetric::Manhattan: return "manhattan";
    case DistanceMetric::SquareEuclidean: return "sqeuclidean";
    }
    return "?";
}

DistanceMetric parse_metric(std::string_view name) {
    std::string s;
    for (char c : name)
        if (c != '-' && c != '_') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (DistanceMetric m : kAllMetrics)
        if (s == to_string(m)) return m;
    if (s == "squareeuclidean") return DistanceMetric::SquareEuclidean;
    throw ArgumentError("unknown distance metric '" + std::string(name) +
                        "' (valid: cosine, euclidean, correlation, chebyshev, braycurtis, canberra, "
                        "manhattan, sqeuclidean)");
}

double distance(DistanceMetric m, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw ArgumentError("distance: vectors must have equal, nonzero length");
    if (std::equal(x.begin(), x.end(), y.begin())) return 0.0;
    const std::size_t n = x.size();
    switch (m) {
    case DistanceMetric::Cosine: {
        double xy = 0, xx = 0, yy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            xy += x[i] * y[i];
            xx += x[i] * x[i];
            yy += y[i] * y[i];
        }
        if (xx == 0.0 || yy == 0.0) return 0.0;
        return std::max(0.0, 1.0 - xy / (std::sqrt(xx) * std::sqrt(yy)));
    }
    case DistanceMetric::Euclidean:
        return std::sqrt(distance(DistanceMetric::SquareEuclidean, x, y));
    case DistanceMetric::SquareEuclidean: {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return s;
    }
    case DistanceMetric::Correlation: {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += x[i];
            my += y[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = x[i] - mx, dy = y[i] - my;
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        if (sxx == 0.0 || syy == 0.0) return 0.0;
        return std::clamp(1.0 - sxy / std::sqrt(sxx * syy), 0.0, 2.0);
    }
    case DistanceMetric::Chebyshev: {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(x[i] - y[i]));
        return s;
    }
    case DistanceMetric::BrayCurtis: {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < n; ++i) {
            num += std::abs(x[i] - y[i]);
            den += std::abs(x[i] + y[i]);
        }
        if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
        return num / den;
    }
    case DistanceMetric::Canberra: {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double den = std::abs(x[i]) + std::abs(y[i]);
            if (den > 0.0) s += std::abs(x[i] - y[i]) / den;
        }
        return s;
    }
    case DistanceMetric::Manhattan: {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
        return s;
    }
    }
    throw ArgumentError("distance: unknown metric");
}

} // namespace edgelab
