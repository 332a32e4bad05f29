#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gml/eigensolver.hpp"
#include "gml/symmetric_matrix.hpp"

namespace gml {

/// Off-diagonal magnitude above which two features count as connected.
inline constexpr double kConnectivityFloor = 1e-12;
/// Relative floor for positive definiteness: lambda_min > factor * trace / K.
inline constexpr double kDefaultPdFloor = 1e-10;
/// Relative eigen-residual accepted for a supplied certificate.
inline constexpr double kCertificateResidualTol = 1e-8;
/// Largest dimension validated with the dense eigensolver; LOBPCG above it.
inline constexpr std::size_t kDenseValidationMaxDim = 200;

struct Certificate {
    double lambda_min = 0.0;
    std::vector<double> eigvec;  // unit norm, strictly positive
};

enum class Violation {
    NonPositiveDiagonal,
    PositiveOffDiagonal,
    Disconnected,
    NotPositiveDefinite,
    NonPositiveEigenvector,
    InvalidCertificate,
};

std::string to_string(Violation v);

struct RejectionReport {
    std::vector<Violation> reasons;
    double lambda_min = std::numeric_limits<double>::quiet_NaN();  // NaN when no eigensolve ran

    bool contains(Violation v) const;
    std::string message() const;
};

class CertificationError : public std::runtime_error {
public:
    explicit CertificationError(RejectionReport report);
    const RejectionReport& report() const noexcept { return report_; }

private:
    RejectionReport report_;
};

class ValidationResult;
class GraphMetric;

/// Checks every graph-metric condition against an eigenpair the caller
/// already holds. The pair must satisfy the eigen equation to
/// kCertificateResidualTol (relative to max(1, |lambda|)).
ValidationResult validate_with_pair(const SymmetricMatrix& m, const EigenPair& pair,
                                    double pd_floor = kDefaultPdFloor);

/// A symmetric matrix known to be a PD generalized graph Laplacian of a
/// connected graph with positive edge weights and node degrees, together
/// with its first eigenpair. Only obtainable through validation.
class GraphMetric {
public:
    const SymmetricMatrix& matrix() const noexcept { return matrix_; }
    const Certificate& certificate() const noexcept { return certificate_; }
    std::size_t dim() const noexcept { return matrix_.dim(); }
    double lambda_min() const noexcept { return certificate_.lambda_min; }

private:
    GraphMetric(SymmetricMatrix m, Certificate c) : matrix_(std::move(m)), certificate_(std::move(c)) {}
    friend ValidationResult validate_with_pair(const SymmetricMatrix&, const EigenPair&, double);

    SymmetricMatrix matrix_;
    Certificate certificate_;
};

class ValidationResult {
public:
    explicit ValidationResult(GraphMetric metric) : metric_(std::move(metric)) {}
    explicit ValidationResult(RejectionReport report) : report_(std::move(report)) {}

    bool ok() const noexcept { return metric_.has_value(); }
    explicit operator bool() const noexcept { return ok(); }

    /// Throws CertificationError carrying the report when rejected.
    const GraphMetric& metric() const&;
    GraphMetric metric() &&;
    const RejectionReport& report() const noexcept { return report_; }

private:
    std::optional<GraphMetric> metric_;
    RejectionReport report_;
};

/// Checks every graph-metric condition and, when all hold, certifies the
/// matrix with its smallest eigenpair (dense solve for K <= 200, LOBPCG above).
/// `pd_floor` is relative: lambda_min must exceed pd_floor * trace(m) / K.
ValidationResult validate_graph_metric(const SymmetricMatrix& m, double pd_floor = kDefaultPdFloor);

/// Validation that throws CertificationError on rejection.
GraphMetric certify(const SymmetricMatrix& m, double pd_floor = kDefaultPdFloor);

/// Breadth-first connectivity of the graph with an edge wherever |m_ij| > floor.
bool is_connected(const SymmetricMatrix& m, double floor = kConnectivityFloor);

/// Strictly positive similarity-transform scalars s_1..s_K.
class GershgorinScalars {
public:
    /// Throws std::invalid_argument if any value is not strictly positive and finite.
    explicit GershgorinScalars(std::vector<double> values);
    static GershgorinScalars ones(std::size_t dim) { return GershgorinScalars(std::vector<double>(dim, 1.0)); }

    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

private:
    std::vector<double> values_;
};

/// Per-row Gershgorin disc left ends m_ii - sum_{j != i} |m_ij|.
std::vector<double> gershgorin_left_ends(const SymmetricMatrix& m);

/// Left ends of the discs of S M S^-1: m_ii - s_i sum_{j != i} |m_ij| / s_j.
std::vector<double> scaled_left_ends(const SymmetricMatrix& m, const GershgorinScalars& s);

/// Scaled disc radius of row i, excluding column `skip` when given.
double scaled_radius(const SymmetricMatrix& m, const GershgorinScalars& s, std::size_t row,
                     std::optional<std::size_t> skip = std::nullopt);

/// Scalars s_k = 1 / v_k from the certified first eigenvector; these align
/// every scaled disc left end at lambda_min.
GershgorinScalars alignment_scalars(const GraphMetric& g);
/// Same from a raw eigenvector; throws CertificationError if any v_k <= 0.
GershgorinScalars alignment_scalars(std::span<const double> eigvec);

/// exp(-delta) for delta >= 0; throws std::domain_error on negative or NaN input.
double edge_weight(double delta);

/// (f_i - f_j)ᵀ M (f_i - f_j)
double mahalanobis(std::span<const double> fi, std::span<const double> fj, const SymmetricMatrix& m);

}  // namespace gml
