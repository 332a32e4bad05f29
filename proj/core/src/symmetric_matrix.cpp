#include "gml/symmetric_matrix.hpp"

#include <stdexcept>
#include <string>

namespace gml {

SymmetricMatrix::SymmetricMatrix(std::size_t dim) : dim_(dim), data_(dim * (dim + 1) / 2, 0.0) {
    if (dim == 0) {
        throw std::invalid_argument("SymmetricMatrix: dimension must be at least 1");
    }
}

SymmetricMatrix SymmetricMatrix::identity(std::size_t dim) {
    SymmetricMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m.set(i, i, 1.0);
    }
    return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(std::span<const double> values) {
    SymmetricMatrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        m.set(i, i, values[i]);
    }
    return m;
}

SymmetricMatrix SymmetricMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (const auto& row : rows) {
        if (row.size() != n) {
            throw std::invalid_argument("SymmetricMatrix: rows must form a square matrix");
        }
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return from_row_major(n, flat);
}

SymmetricMatrix SymmetricMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<std::vector<double>> copy;
    copy.reserve(rows.size());
    for (const auto& row : rows) {
        copy.emplace_back(row);
    }
    return from_rows(copy);
}

SymmetricMatrix SymmetricMatrix::from_row_major(std::size_t dim, std::span<const double> entries) {
    if (entries.size() != dim * dim) {
        throw std::invalid_argument("SymmetricMatrix: expected " + std::to_string(dim * dim) + " entries, got " +
                                    std::to_string(entries.size()));
    }
    SymmetricMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
            const double upper = entries[i * dim + j];
            if (upper != entries[j * dim + i]) {
                throw std::invalid_argument("SymmetricMatrix: entries (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") and its transpose differ");
            }
            m.set(i, j, upper);
        }
    }
    return m;
}

double SymmetricMatrix::trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        t += (*this)(i, i);
    }
    return t;
}

std::vector<double> SymmetricMatrix::multiply(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("SymmetricMatrix::multiply: dimension mismatch");
    }
    std::vector<double> y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        y[i] += (*this)(i, i) * x[i];
        for (std::size_t j = i + 1; j < dim_; ++j) {
            const double v = (*this)(i, j);
            y[i] += v * x[j];
            y[j] += v * x[i];
        }
    }
    return y;
}

double SymmetricMatrix::quadratic_form(std::span<const double> x) const {
    if (x.size() != dim_) {
        throw std::invalid_argument("SymmetricMatrix::quadratic_form: dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        acc += (*this)(i, i) * x[i] * x[i];
        double cross = 0.0;
        for (std::size_t j = i + 1; j < dim_; ++j) {
            cross += (*this)(i, j) * x[j];
        }
        acc += 2.0 * x[i] * cross;
    }
    return acc;
}

std::vector<double> SymmetricMatrix::diagonal_values() const {
    std::vector<double> d(dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        d[i] = (*this)(i, i);
    }
    return d;
}

std::vector<double> SymmetricMatrix::to_row_major() const {
    std::vector<double> out(dim_ * dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            out[i * dim_ + j] = (*this)(i, j);
        }
    }
    return out;
}

SymmetricMatrix& SymmetricMatrix::operator+=(const SymmetricMatrix& other) {
    if (other.dim_ != dim_) {
        throw std::invalid_argument("SymmetricMatrix: dimension mismatch in addition");
    }
    for (std::size_t k = 0; k < data_.size(); ++k) {
        data_[k] += other.data_[k];
    }
    return *this;
}

SymmetricMatrix& SymmetricMatrix::operator*=(double factor) noexcept {
    for (double& v : data_) {
        v *= factor;
    }
    return *this;
}

SymmetricMatrix SymmetricMatrix::axpy(double step, const SymmetricMatrix& direction) const {
    if (direction.dim_ != dim_) {
        throw std::invalid_argument("SymmetricMatrix: dimension mismatch in axpy");
    }
    SymmetricMatrix out(*this);
    for (std::size_t k = 0; k < data_.size(); ++k) {
        out.data_[k] += step * direction.data_[k];
    }
    return out;
}

}  // namespace gml
