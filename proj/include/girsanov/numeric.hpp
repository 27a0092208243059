#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace girsanov {

/// Pairwise (cascade) summation; the result depends only on the order of
/// the input, never on how it was produced.
double pairwise_sum(std::span<const double> values);

/// Shortest round-trip text of v with 17 significant digits and '.' as separator.
std::string format_double(double v);

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0; // unbiased
    std::size_t n = 0;
};

SampleMoments sample_moments(std::span<const double> values);

/// Evaluates fn(i) for i in [0, n) on `workers` threads and returns the
/// values in index order. workers == 0 means hardware concurrency.
std::vector<double> parallel_map(std::size_t n, unsigned workers,
                                 const std::function<double(std::size_t)>& fn);

/// Same as parallel_map for functions returning a fixed number of outputs
/// per index; output is row-major (index, component).
std::vector<double> parallel_map_multi(
    std::size_t n, std::size_t width, unsigned workers,
    const std::function<void(std::size_t, std::span<double>)>& fn);

/// Uniform table with linear interpolation; falls back to direct
/// evaluation outside [lo, hi].
class TabulatedFunction {
public:
    TabulatedFunction(std::function<double(double)> fn, double lo, double hi, std::size_t points);

    double operator()(double x) const;

private:
    std::function<double(double)> fn_;
    double lo_;
    double hi_;
    double step_;
    std::vector<double> values_;
};

} // namespace girsanov
