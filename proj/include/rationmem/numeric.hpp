#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace rationmem {

// Dense 64-bit float vector.
struct Vec64 {
    std::vector<double> values;

    Vec64() = default;
    explicit Vec64(std::size_t dim, double fill = 0.0) : values(dim, fill) {}
    Vec64(std::initializer_list<double> init) : values(init) {}

    std::size_t dim() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    double* data() { return values.data(); }
    const double* data() const { return values.data(); }

    bool operator==(const Vec64&) const = default;
};

// Dense 64-bit float matrix, row-major. The layout is fixed so that
// checkpoints serialize identically everywhere.
struct Mat64 {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Mat64() = default;
    Mat64(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double* row(std::size_t r) { return values.data() + r * cols; }
    const double* row(std::size_t r) const { return values.data() + r * cols; }

    static Mat64 identity(std::size_t n);

    bool operator==(const Mat64&) const = default;
};

using Tensor = std::variant<Vec64, Mat64>;

// Named parameter slots. Iteration order is insertion order and therefore
// stable across runs given the same construction sequence; shapes are fixed
// once a slot is added.
class ParamStore {
public:
    ParamStore() = default;

    void add(std::string name, Vec64 v);
    void add(std::string name, Mat64 m);

    bool has(std::string_view name) const;
    std::size_t slot_count() const { return slots_.size(); }
    const std::string& name_at(std::size_t i) const { return slots_[i].name; }

    Vec64& vec(std::string_view name);
    const Vec64& vec(std::string_view name) const;
    Mat64& mat(std::string_view name);
    const Mat64& mat(std::string_view name) const;

    // Flat element access within slot i, for optimizers and finite differences.
    std::size_t size_at(std::size_t i) const;
    double* data_at(std::size_t i);
    const double* data_at(std::size_t i) const;

    std::size_t total_size() const;

    ParamStore zeros_like() const;
    bool same_shape(const ParamStore& other) const;

    // this += scale * other; shapes must match.
    void add_scaled(const ParamStore& other, double scale);
    void fill(double value);

    bool operator==(const ParamStore&) const;

private:
    struct Slot {
        std::string name;
        Tensor value;
    };
    const Tensor& tensor(std::string_view name) const;
    Tensor& tensor(std::string_view name);

    std::vector<Slot> slots_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Numerically stable logistic function; for x < 0 evaluates
// exp(x) / (1 + exp(x)) so that exp never overflows.
double sigmoid(double x);

// Inner product, accumulated in 64-bit, left-to-right.
double dot(const Vec64& a, const Vec64& b);

bool all_finite(const Vec64& v);
bool all_finite(const Mat64& m);
bool all_finite(const ParamStore& p);

// Central-difference gradient of f at params: for every scalar entry theta,
// (f(theta + eps) - f(theta - eps)) / (2 eps), same shapes as params.
// Throws if f returns a non-finite value, naming the perturbed parameter.
ParamStore finite_diff_grad(const std::function<double(const ParamStore&)>& f,
                            const ParamStore& params, double eps = 1e-6);

}  // namespace rationmem
