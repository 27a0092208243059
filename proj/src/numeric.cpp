#include "girsanov/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <exception>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace girsanov {

double pairwise_sum(std::span<const double> values)
{
    constexpr std::size_t kBlock = 64;
    if (values.size() <= kBlock) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

SampleMoments sample_moments(std::span<const double> values)
{
    SampleMoments out;
    out.n = values.size();
    if (out.n == 0)
        return out;
    out.mean = pairwise_sum(values) / static_cast<double>(out.n);
    if (out.n < 2)
        return out;
    std::vector<double> sq(values.size());
    std::transform(values.begin(), values.end(), sq.begin(),
                   [m = out.mean](double v) { return (v - m) * (v - m); });
    out.variance = pairwise_sum(sq) / static_cast<double>(out.n - 1);
    return out;
}

namespace {

unsigned resolve_workers(unsigned workers, std::size_t n)
{
    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
}

} // namespace

std::vector<double> parallel_map(std::size_t n, unsigned workers,
                                 const std::function<double(std::size_t)>& fn)
{
    return parallel_map_multi(n, 1, workers,
                              [&fn](std::size_t i, std::span<double> out) { out[0] = fn(i); });
}

std::vector<double> parallel_map_multi(
    std::size_t n, std::size_t width, unsigned workers,
    const std::function<void(std::size_t, std::span<double>)>& fn)
{
    std::vector<double> out(n * width, 0.0);
    const unsigned w = resolve_workers(workers, n);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            fn(i, std::span<double>(out.data() + i * width, width));
    };
    if (w <= 1) {
        run_range(0, n);
        return out;
    }
    // Static contiguous chunks; each index writes only its own slot.
    std::vector<std::exception_ptr> errors(w);
    {
        std::vector<std::jthread> threads;
        threads.reserve(w);
        const std::size_t chunk = (n + w - 1) / w;
        for (unsigned k = 0; k < w; ++k) {
            const std::size_t begin = std::min(n, k * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            threads.emplace_back([&, k, begin, end] {
                try {
                    run_range(begin, end);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

TabulatedFunction::TabulatedFunction(std::function<double(double)> fn, double lo, double hi,
                                     std::size_t points)
    : fn_(std::move(fn)), lo_(lo), hi_(hi)
{
    if (!(hi > lo) || points < 2)
        throw std::invalid_argument("TabulatedFunction: need hi > lo and at least two points");
    step_ = (hi - lo) / static_cast<double>(points - 1);
    values_.resize(points);
    for (std::size_t i = 0; i < points; ++i)
        values_[i] = fn_(lo + step_ * static_cast<double>(i));
}

double TabulatedFunction::operator()(double x) const
{
    if (x < lo_ || x > hi_)
        return fn_(x);
    const double pos = (x - lo_) / step_;
    const auto i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * values_[i] + w * values_[i + 1];
}

} // namespace girsanov
