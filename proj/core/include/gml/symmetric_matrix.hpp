#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace gml {

/// Dense real symmetric matrix with packed upper-triangular storage.
///
/// Symmetry is structural: (i, j) and (j, i) address the same slot, so
/// there is no way to construct an asymmetric instance.
class SymmetricMatrix {
public:
    /// Zero matrix of dimension `dim` (must be >= 1).
    explicit SymmetricMatrix(std::size_t dim);

    static SymmetricMatrix identity(std::size_t dim);
    static SymmetricMatrix diagonal(std::span<const double> values);

    /// Builds from full row-major rows. Throws std::invalid_argument when the
    /// rows are ragged or not exactly symmetric.
    static SymmetricMatrix from_rows(const std::vector<std::vector<double>>& rows);
    static SymmetricMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    /// Builds from a full row-major buffer of dim*dim values (symmetry checked).
    static SymmetricMatrix from_row_major(std::size_t dim, std::span<const double> entries);

    std::size_t dim() const noexcept { return dim_; }

    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[index(i, j)]; }
    double& at(std::size_t i, std::size_t j) noexcept { return data_[index(i, j)]; }
    void set(std::size_t i, std::size_t j, double value) noexcept { data_[index(i, j)] = value; }

    double trace() const noexcept;

    /// y = M x
    std::vector<double> multiply(std::span<const double> x) const;
    /// xᵀ M x
    double quadratic_form(std::span<const double> x) const;

    std::vector<double> diagonal_values() const;
    std::vector<double> to_row_major() const;

    SymmetricMatrix& operator+=(const SymmetricMatrix& other);
    SymmetricMatrix& operator*=(double factor) noexcept;
    friend SymmetricMatrix operator+(SymmetricMatrix lhs, const SymmetricMatrix& rhs) { return lhs += rhs; }
    friend SymmetricMatrix operator*(double factor, SymmetricMatrix m) { return m *= factor; }

    /// this + step * direction
    SymmetricMatrix axpy(double step, const SymmetricMatrix& direction) const;

    bool operator==(const SymmetricMatrix&) const = default;

private:
    std::size_t index(std::size_t i, std::size_t j) const noexcept {
        if (i > j) {
            std::swap(i, j);
        }
        // row i of the upper triangle starts after i rows of decreasing length
        return i * dim_ - i * (i - 1) / 2 + (j - i);
    }

    std::size_t dim_;
    std::vector<double> data_;
};

}  // namespace gml
