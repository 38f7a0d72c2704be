#pragma once

// Core numeric carriers shared by every module: error taxonomy, dense
// vector/matrix types, and a deterministic RNG whose draws do not depend
// on the standard library's distribution implementations.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hsc {

inline constexpr double kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct DegenerateInputError : Error {
    using Error::Error;
};

struct UsageError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

using Vec = std::vector<double>;

// Row-major dense matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw ShapeError("matrix dimensions must be non-negative");
    }

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }
    double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline constexpr double kNormFloor = 1e-12;

inline int isize(const Vec& v) { return static_cast<int>(v.size()); }

inline void require_dim(const Vec& v, int d, const char* what) {
    if (isize(v) != d)
        throw ShapeError(std::string(what) + ": expected dim " + std::to_string(d) + ", got " +
                         std::to_string(v.size()));
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const Matrix& m) {
    for (double x : m.a)
        if (!std::isfinite(x)) return false;
    return true;
}

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw ShapeError("axpy: dimension mismatch");
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec matvec(const Matrix& m, const Vec& x) {
    if (isize(x) != m.cols) throw ShapeError("matvec: dimension mismatch");
    Vec y(static_cast<size_t>(m.rows), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        double s = 0.0;
        for (int j = 0; j < m.cols; ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

// m^T * y
inline Vec matvec_t(const Matrix& m, const Vec& y) {
    if (isize(y) != m.rows) throw ShapeError("matvec_t: dimension mismatch");
    Vec x(static_cast<size_t>(m.cols), 0.0);
    for (int i = 0; i < m.rows; ++i) {
        const double* r = m.row(i);
        for (int j = 0; j < m.cols; ++j) x[j] += r[j] * y[i];
    }
    return x;
}

// m += y * x^T
inline void add_outer(Matrix& m, const Vec& y, const Vec& x) {
    if (isize(y) != m.rows || isize(x) != m.cols) throw ShapeError("add_outer: dimension mismatch");
    for (int i = 0; i < m.rows; ++i) {
        double* r = m.row(i);
        for (int j = 0; j < m.cols; ++j) r[j] += y[i] * x[j];
    }
}

inline Vec concat(const Vec& a, const Vec& b) {
    Vec c;
    c.reserve(a.size() + b.size());
    c.insert(c.end(), a.begin(), a.end());
    c.insert(c.end(), b.begin(), b.end());
    return c;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Deterministic generator. The raw engine is std::mt19937_64 (fully specified
// by the standard); the real-valued draws are derived here rather than through
// std distributions so that byte-identical streams are reproducible everywhere.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed) { state_.seed(seed); }

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() {
        return state_();
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; consumes exactly two draws per call.
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Unbiased integer in [0, n).
    int uniform_int(int n) {
        if (n <= 0) throw UsageError("uniform_int: n must be positive");
        uint64_t un = static_cast<uint64_t>(n);
        uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % un;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    // Independent child stream; derived from the original seed, so forks are
    // stable regardless of how many draws the parent has consumed.
    Rng fork(uint64_t stream) const { return Rng(splitmix64(seed_ ^ splitmix64(stream + 1))); }

private:
    uint64_t seed_;
    std::mt19937_64 state_;
};

}  // namespace hsc
