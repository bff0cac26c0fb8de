#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace evcs::nn {

/// Row-major dense matrix of doubles. Vectors are n x 1 matrices.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    std::size_t size() const { return data.size(); }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<double> span() { return data; }
    std::span<const double> span() const { return data; }

    bool operator==(const Matrix&) const = default;
};

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;

    Parameter() = default;
    Parameter(std::string n, std::size_t rows, std::size_t cols)
        : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
    void init_uniform(double bound, std::mt19937_64& rng);
};

using ParamRefs = std::vector<Parameter*>;
using ConstParamRefs = std::vector<const Parameter*>;

void zero_grads(const ParamRefs& params);
std::size_t parameter_count(const ConstParamRefs& params);

/// Copies values (not gradients). Throws ShapeError if the lists do not line up.
void copy_values(const ConstParamRefs& from, const ParamRefs& to);

/// Throws DivergenceError naming the first non-finite gradient entry.
void require_finite_grads(const ConstParamRefs& params);

ConstParamRefs as_const(const ParamRefs& params);

}  // namespace evcs::nn
