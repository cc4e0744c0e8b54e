#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace folmod {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Expression-source errors; `offset` is the byte position in the source text.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Domain violations during expression evaluation (log of non-positive, ...).
class EvalError : public Error {
public:
    using Error::Error;
};

/// Scenario / CLI configuration problems.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failures (degenerate metric, degenerate submersion, ...).
class NumericError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Small value types
// ---------------------------------------------------------------------------

/// Point in chart coordinates, or a contravariant tangent vector.
struct Vec2 {
    double u = 0.0;
    double v = 0.0;

    Vec2 operator+(const Vec2& o) const { return {u + o.u, v + o.v}; }
    Vec2 operator-(const Vec2& o) const { return {u - o.u, v - o.v}; }
    Vec2 operator*(double s) const { return {u * s, v * s}; }
    Vec2 operator/(double s) const { return {u / s, v / s}; }
    Vec2& operator+=(const Vec2& o) {
        u += o.u;
        v += o.v;
        return *this;
    }
};

inline Vec2 operator*(double s, const Vec2& p) { return p * s; }

using Point = Vec2;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
    double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

/// Number of quadrature cells per chart direction.
struct GridSpec {
    int nu = 96;
    int nv = 96;
};

// ---------------------------------------------------------------------------
// Numerical parameters
// ---------------------------------------------------------------------------

/// Knobs shared across the library. Defaults are tuned for unit-order charts.
struct NumericParams {
    double h_fd = 1e-5;             // central-difference step for metric / expression fields
    double h_grad_field = 1e-3;     // FD step for derived fields (extremal function, log f0)
    double h_pushforward = 1e-6;    // FD step for flow tangent maps
    double sing_tol = 1e-10;        // |grad phi| below this = degenerate submersion
    double trace_tol = 1e-8;        // allowed |phi - level| drift along a traced leaf
    double level_quantum_frac = 1e-6;  // leaf-integral memo: level quantum as a fraction of range
    int gauss_points = 2;           // Gauss-Legendre points per cell per direction (2x2 tensor)
    double arc_step_frac = 5e-4;    // leaf tracing arc step = frac * chart diameter
    double max_leaf_length_factor = 64.0;  // leaves longer than factor*diameter are an error
    int table_levels = 0;           // leaf table size; 0 = derived from the grid
    double flow_step = 1e-3;        // RK4 time step for vector-field flows
    int probe_n = 129;              // probe grid resolution for ranges / seeds / bounds
};

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

inline double wrap_periodic(double x, double lo, double hi) {
    const double len = hi - lo;
    double y = std::fmod(x - lo, len);
    if (y < 0) y += len;
    return lo + y;
}

/// Difference a-b reduced to [-len/2, len/2] modulo len.
inline double periodic_diff(double a, double b, double len) {
    double d = std::fmod(a - b, len);
    if (d > 0.5 * len) d -= len;
    if (d < -0.5 * len) d += len;
    return d;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    if (n == 1) {
        xs[0] = 0.5 * (lo + hi);
        return xs;
    }
    const double step = (hi - lo) / (n - 1);
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + step * i;
    xs.back() = hi;
    return xs;
}

inline std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parallel loop (deterministic: results indexed by slot, never reduced
// in thread order). FOLMOD_THREADS caps the worker count.
// ---------------------------------------------------------------------------

inline int thread_budget() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("FOLMOD_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1 && cap < hw) hw = static_cast<int>(cap);
    }
    return hw;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(thread_budget()), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            try {
                for (std::size_t i = t; i < n; i += threads) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

/// Deterministic uniform double in [0,1) from raw generator bits
/// (distribution classes are not portable across standard libraries).
template <typename Rng>
double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

template <typename Rng>
double uniform_in(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace folmod
