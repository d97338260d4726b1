#pragma once

#include <span>
#include <string_view>

namespace edgelab {

enum class DistanceMetric {
    Cosine,
    Euclidean,
    Correlation,
    Chebyshev,
    BrayCurtis,
    Canberra,
    Manhattan,
    SquareEuclidean,
};

inline constexpr DistanceMetric kAllMetrics[] = {
    DistanceMetric::Cosine,    DistanceMetric::Euclidean,  DistanceMetric::Correlation,
    DistanceMetric::Chebyshev, DistanceMetric::BrayCurtis, DistanceMetric::Canberra,
    DistanceMetric::Manhattan, DistanceMetric::SquareEuclidean,
};

std::string_view to_string(DistanceMetric m);
DistanceMetric parse_metric(std::string_view name);

/// Closed-form distances between equal-length vectors.
///
/// Degenerate denominators: Cosine with a zero vector and Correlation with a
/// constant vector give 0. Bray-Curtis uses sum|x_i + y_i| in the denominator
/// (identical to sum(x_i + y_i) for the non-negative posteriors it was defined
/// on, and well-defined for signed posterior deltas); a zero denominator gives
/// 0 when x == y and 1 otherwise. Canberra skips 0/0 terms.
double distance(DistanceMetric m, std::span<const double> x, std::span<const double> y);

} // namespace edgelab
