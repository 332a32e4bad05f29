#include "gml/graph_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace gml {

std::string to_string(Violation v) {
    switch (v) {
        case Violation::NonPositiveDiagonal:
            return "non-positive diagonal";
        case Violation::PositiveOffDiagonal:
            return "positive off-diagonal";
        case Violation::Disconnected:
            return "disconnected graph";
        case Violation::NotPositiveDefinite:
            return "non-PD";
        case Violation::NonPositiveEigenvector:
            return "first eigenvector not strictly positive";
        case Violation::InvalidCertificate:
            return "eigenpair certificate fails the eigen equation";
    }
    return "unknown";
}

bool RejectionReport::contains(Violation v) const {
    return std::find(reasons.begin(), reasons.end(), v) != reasons.end();
}

std::string RejectionReport::message() const {
    std::ostringstream os;
    os << "not a graph metric:";
    for (std::size_t i = 0; i < reasons.size(); ++i) {
        os << (i == 0 ? " " : "; ") << to_string(reasons[i]);
    }
    if (!std::isnan(lambda_min)) {
        os << " (lambda_min = " << lambda_min << ")";
    }
    return os.str();
}

CertificationError::CertificationError(RejectionReport report)
    : std::runtime_error(report.message()), report_(std::move(report)) {}

const GraphMetric& ValidationResult::metric() const& {
    if (!metric_) {
        throw CertificationError(report_);
    }
    return *metric_;
}

GraphMetric ValidationResult::metric() && {
    if (!metric_) {
        throw CertificationError(report_);
    }
    return std::move(*metric_);
}

bool is_connected(const SymmetricMatrix& m, double floor) {
    const std::size_t n = m.dim();
    std::vector<char> seen(n, 0);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
        const std::size_t i = frontier.front();
        frontier.pop();
        for (std::size_t j = 0; j < n; ++j) {
            if (!seen[j] && j != i && std::abs(m(i, j)) > floor) {
                seen[j] = 1;
                ++reached;
                frontier.push(j);
            }
        }
    }
    return reached == n;
}

ValidationResult validate_with_pair(const SymmetricMatrix& m, const EigenPair& pair, double pd_floor) {
    const std::size_t n = m.dim();
    RejectionReport report;
    report.lambda_min = pair.value;

    bool diag_ok = true;
    bool offdiag_ok = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(m(i, i) > 0.0)) {
            diag_ok = false;
        }
        for (std::size_t j = i + 1; j < n; ++j) {
            if (m(i, j) > 0.0) {
                offdiag_ok = false;
            }
        }
    }
    if (!diag_ok) {
        report.reasons.push_back(Violation::NonPositiveDiagonal);
    }
    if (!offdiag_ok) {
        report.reasons.push_back(Violation::PositiveOffDiagonal);
    }
    if (n > 1 && !is_connected(m)) {
        report.reasons.push_back(Violation::Disconnected);
    }

    const double floor = std::max(0.0, pd_floor * m.trace() / static_cast<double>(n));
    if (!(pair.value > floor)) {
        report.reasons.push_back(Violation::NotPositiveDefinite);
    }

    Certificate cert;
    cert.lambda_min = pair.value;
    cert.eigvec = pair.vector;
    double len = 0.0;
    for (double x : cert.eigvec) {
        len += x * x;
    }
    len = std::sqrt(len);
    if (cert.eigvec.size() != n || !(len > 0.0)) {
        report.reasons.push_back(Violation::InvalidCertificate);
        return ValidationResult(std::move(report));
    }
    for (double& x : cert.eigvec) {
        x /= len;
    }
    normalize_sign(cert.eigvec);

    const double residual = eigen_residual(m, cert.eigvec, cert.lambda_min);
    if (!(residual <= kCertificateResidualTol * std::max(1.0, std::abs(cert.lambda_min)))) {
        report.reasons.push_back(Violation::InvalidCertificate);
    }
    if (report.reasons.empty()) {
        const double min_entry = *std::min_element(cert.eigvec.begin(), cert.eigvec.end());
        if (!(min_entry > 0.0)) {
            report.reasons.push_back(Violation::NonPositiveEigenvector);
        }
    }
    if (!report.reasons.empty()) {
        return ValidationResult(std::move(report));
    }
    return ValidationResult(GraphMetric(m, std::move(cert)));
}

ValidationResult validate_graph_metric(const SymmetricMatrix& m, double pd_floor) {
    EigenPair pair;
    if (m.dim() <= kDenseValidationMaxDim) {
        pair = smallest_eigenpair_dense(m);
    } else {
        try {
            pair = smallest_eigenpair_lobpcg(m, std::nullopt, LobpcgOptions{1e-10, 2000});
        } catch (const LobpcgNotConverged& e) {
            pair = m.dim() <= kDenseEigenMaxDim ? smallest_eigenpair_dense(m) : e.best();
        }
    }
    return validate_with_pair(m, refined_if_needed(m, std::move(pair)), pd_floor);
}

GraphMetric certify(const SymmetricMatrix& m, double pd_floor) {
    return validate_graph_metric(m, pd_floor).metric();
}

GershgorinScalars::GershgorinScalars(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("GershgorinScalars: empty");
    }
    for (double s : values_) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("GershgorinScalars: scalars must be strictly positive and finite");
        }
    }
}

std::vector<double> gershgorin_left_ends(const SymmetricMatrix& m) {
    const std::size_t n = m.dim();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double radius = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                radius += std::abs(m(i, j));
            }
        }
        out[i] = m(i, i) - radius;
    }
    return out;
}

double scaled_radius(const SymmetricMatrix& m, const GershgorinScalars& s, std::size_t row,
                     std::optional<std::size_t> skip) {
    double radius = 0.0;
    for (std::size_t j = 0; j < m.dim(); ++j) {
        if (j != row && (!skip || j != *skip)) {
            radius += std::abs(m(row, j)) * (s[row] / s[j]);
        }
    }
    return radius;
}

std::vector<double> scaled_left_ends(const SymmetricMatrix& m, const GershgorinScalars& s) {
    if (s.size() != m.dim()) {
        throw std::invalid_argument("scaled_left_ends: scalar count does not match matrix dimension");
    }
    std::vector<double> out(m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i) {
        out[i] = m(i, i) - scaled_radius(m, s, i);
    }
    return out;
}

GershgorinScalars alignment_scalars(std::span<const double> eigvec) {
    std::vector<double> s(eigvec.size());
    for (std::size_t k = 0; k < eigvec.size(); ++k) {
        if (!(eigvec[k] > 0.0)) {
            RejectionReport report;
            report.lambda_min = std::numeric_limits<double>::quiet_NaN();
            report.reasons.push_back(Violation::NonPositiveEigenvector);
            throw CertificationError(std::move(report));
        }
        s[k] = 1.0 / eigvec[k];
    }
    return GershgorinScalars(std::move(s));
}

GershgorinScalars alignment_scalars(const GraphMetric& g) { return alignment_scalars(g.certificate().eigvec); }

double edge_weight(double delta) {
    if (!(delta >= 0.0)) {
        throw std::domain_error("edge_weight: feature distance must be non-negative");
    }
    return std::exp(-delta);
}

double mahalanobis(std::span<const double> fi, std::span<const double> fj, const SymmetricMatrix& m) {
    if (fi.size() != fj.size() || fi.size() != m.dim()) {
        throw std::invalid_argument("mahalanobis: dimension mismatch");
    }
    std::vector<double> diff(fi.size());
    for (std::size_t k = 0; k < fi.size(); ++k) {
        diff[k] = fi[k] - fj[k];
    }
    return m.quadratic_form(diff);
}

}  // namespace gml
