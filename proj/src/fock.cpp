#include "qtomo/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qtomo {

namespace {

constexpr double kPi = std::numbers::pi;

double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

cplx ipow(cplx z, int k) {
    cplx out{1.0, 0.0};
    for (int i = 0; i < k; ++i) out *= z;
    return out;
}

/// Normalized harmonic-oscillator eigenfunction psi_n(x).
double hermite_function(int n, double x) {
    double h0 = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
    if (n == 0) return h0;
    double h1 = std::sqrt(2.0) * x * h0;
    if (n == 1) return h1;
    for (int k = 1; k < n; ++k) {
        double h2 = std::sqrt(2.0 / (k + 1.0)) * x * h1 - std::sqrt(k / (k + 1.0)) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

void warn(Warnings* sink, const std::string& msg) {
    if (sink) sink->push_back(msg);
}

Eigen::VectorXd hermitian_eigenvalues(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// Fock coefficients of the requested pure state, untruncated-norm == 1.
Eigen::VectorXcd pure_coefficients(const StateSpec& spec) {
    switch (spec.kind) {
        case StateSpec::Kind::Fock: {
            if (spec.fock_n < 0 || spec.fock_n >= spec.dim)
                throw InvalidSpec("fock index outside [0, dim)");
            Eigen::VectorXcd c = Eigen::VectorXcd::Zero(spec.dim);
            c[spec.fock_n] = 1.0;
            return c;
        }
        case StateSpec::Kind::Coherent:
            return coherent_coefficients(spec.alpha, spec.dim);
        case StateSpec::Kind::Cat: {
            double s = spec.parity_sign >= 0 ? 1.0 : -1.0;
            double a2 = std::norm(spec.alpha);
            double norm2 = 2.0 * (1.0 + s * std::exp(-2.0 * a2));
            if (norm2 < 1e-300) throw InvalidSpec("cat state has vanishing norm");
            Eigen::VectorXcd c = coherent_coefficients(spec.alpha, spec.dim);
            for (int m = 0; m < spec.dim; ++m)
                c[m] *= (1.0 + s * (m % 2 == 0 ? 1.0 : -1.0)) / std::sqrt(norm2);
            return c;
        }
        default:
            throw InvalidSpec("not a pure-state spec");
    }
}

// Square-lattice grid-state coefficients with photon-number envelope
// exp(-delta2 * n) applied to the ideal position comb at x = 2 s sqrt(pi).
// Defined directly in the truncated space; the caller tunes delta2.
Eigen::VectorXcd gkp_coefficients(int dim, double delta2) {
    const double step = 2.0 * std::sqrt(kPi);
    const int smax = static_cast<int>(std::ceil((std::sqrt(2.0 * dim + 1.0) + 6.0) / step)) + 1;
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(dim);
    for (int n = 0; n < dim; n += 2) {  // odd-n comb sums cancel by symmetry
        double comb = hermite_function(n, 0.0);
        for (int s = 1; s <= smax; ++s) comb += 2.0 * hermite_function(n, s * step);
        c[n] = std::exp(-delta2 * n) * comb;
    }
    double nrm = c.norm();
    if (nrm < 1e-300) throw InvalidSpec("grid state construction collapsed to zero");
    return c / nrm;
}

double gkp_mean_photon(int dim, double delta2) {
    Eigen::VectorXcd c = gkp_coefficients(dim, delta2);
    double mean = 0.0;
    for (int n = 0; n < dim; ++n) mean += n * std::norm(c[n]);
    return mean;
}

}  // namespace

Eigen::VectorXd DensityMatrix::eigenvalues() const { return hermitian_eigenvalues(mat); }

double DensityMatrix::min_eigenvalue() const { return eigenvalues().minCoeff(); }

double DensityMatrix::mean_photon_number() const {
    double mean = 0.0;
    for (int n = 0; n < dim(); ++n) mean += n * mat(n, n).real();
    return mean;
}

std::vector<double> DensityMatrix::photon_distribution() const {
    std::vector<double> p(dim());
    for (int n = 0; n < dim(); ++n) p[n] = mat(n, n).real();
    return p;
}

DensityMatrix fock_state(int n, int dim) {
    return build_state(StateSpec::fock(n, dim));
}

DensityMatrix pure_state(const Eigen::VectorXcd& coeffs) {
    Eigen::VectorXcd c = coeffs / coeffs.norm();
    return DensityMatrix(c * c.adjoint());
}

StateSpec StateSpec::fock(int n, int dim) {
    StateSpec s;
    s.kind = Kind::Fock;
    s.fock_n = n;
    s.dim = dim;
    return s;
}

StateSpec StateSpec::coherent(cplx alpha, int dim) {
    StateSpec s;
    s.kind = Kind::Coherent;
    s.alpha = alpha;
    s.dim = dim;
    return s;
}

StateSpec StateSpec::cat(cplx alpha, int dim, int parity_sign) {
    StateSpec s;
    s.kind = Kind::Cat;
    s.alpha = alpha;
    s.dim = dim;
    s.parity_sign = parity_sign;
    return s;
}

StateSpec StateSpec::gkp(double target_mean_photon, int dim) {
    StateSpec s;
    s.kind = Kind::Gkp;
    s.target_mean_photon = target_mean_photon;
    s.dim = dim;
    return s;
}

StateSpec StateSpec::mixture(std::vector<std::pair<double, StateSpec>> components, int dim) {
    StateSpec s;
    s.kind = Kind::Mixture;
    s.components = std::move(components);
    s.dim = dim;
    return s;
}

Eigen::VectorXcd coherent_coefficients(cplx alpha, int dim) {
    if (dim < 1) throw InvalidSpec("dimension must be positive");
    Eigen::VectorXcd c(dim);
    c[0] = std::exp(-0.5 * std::norm(alpha));
    for (int m = 1; m < dim; ++m) c[m] = c[m - 1] * alpha / std::sqrt(static_cast<double>(m));
    return c;
}

int coherent_cutoff(cplx alpha, double tail) {
    const double lambda = std::norm(alpha);
    double term = std::exp(-lambda);
    double cum = term;
    int d = 1;
    while (cum < 1.0 - tail && d < 512) {
        term *= lambda / d;
        cum += term;
        ++d;
    }
    return d;
}

double laguerre(int k, int a, double x) {
    if (k == 0) return 1.0;
    double lm1 = 1.0;
    double l = 1.0 + a - x;
    for (int j = 1; j < k; ++j) {
        double lp1 = ((2.0 * j + 1.0 + a - x) * l - (j + a) * lm1) / (j + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

cplx displaced_parity_element(int n, int m, cplx alpha) {
    if (n < 0 || m < 0) throw InvalidSpec("negative Fock index");
    if (n > m) return std::conj(displaced_parity_element(m, n, alpha));
    const int k = m - n;
    const double a2 = std::norm(alpha);
    double scale = std::exp(0.5 * (k * std::log(2.0) + std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    // conj(alpha) on the upper triangle keeps Tr[rho Pi] consistent with the
    // position-representation Wigner integral for complex-valued states
    return 2.0 * sign * scale * std::exp(-a2) * ipow(std::conj(alpha), k) * laguerre(n, k, 2.0 * a2);
}

Eigen::MatrixXcd displaced_parity_matrix(int dim, cplx alpha) {
    Eigen::MatrixXcd pi(dim, dim);
    const double a2 = std::norm(alpha);
    const double ea = std::exp(-a2);
    for (int n = 0; n < dim; ++n) {
        double sign = (n % 2 == 0) ? 1.0 : -1.0;
        double scale = 1.0;  // sqrt(2^k n!/m!) built up incrementally over m
        cplx apow{1.0, 0.0};
        for (int m = n; m < dim; ++m) {
            int k = m - n;
            if (k > 0) {
                scale *= std::sqrt(2.0 / m);
                apow *= std::conj(alpha);
            }
            cplx v = 2.0 * sign * scale * ea * apow * laguerre(n, k, 2.0 * a2);
            pi(n, m) = v;
            pi(m, n) = std::conj(v);
        }
    }
    return pi;
}

double wigner_point(const DensityMatrix& rho, double q, double p) {
    Eigen::MatrixXcd pi = displaced_parity_matrix(rho.dim(), cplx(q, p));
    cplx tr = (rho.mat.transpose().cwiseProduct(pi)).sum();
    return tr.real() / (2.0 * kPi);
}

WignerGrid wigner_grid(const DensityMatrix& rho, const std::vector<double>& q_values,
                       const std::vector<double>& p_values) {
    WignerGrid g;
    g.q_values = q_values;
    g.p_values = p_values;
    g.values.resize(static_cast<Eigen::Index>(q_values.size()),
                    static_cast<Eigen::Index>(p_values.size()));
    for (std::size_t i = 0; i < q_values.size(); ++i)
        for (std::size_t j = 0; j < p_values.size(); ++j)
            g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                wigner_point(rho, q_values[i], p_values[j]);
    return g;
}

double parity_expectation(const DensityMatrix& rho) {
    double p = 0.0;
    for (int n = 0; n < rho.dim(); ++n)
        p += (n % 2 == 0 ? 1.0 : -1.0) * rho.mat(n, n).real();
    return p;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& target) {
    if (rho.dim() != target.dim()) throw DimensionMismatch("fidelity: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_t(target.mat);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es_r(rho.mat);
    if (es_t.eigenvalues().minCoeff() < -1e-6 || es_r.eigenvalues().minCoeff() < -1e-6)
        throw NonPhysicalInput("fidelity: input has eigenvalue below -1e-6");

    // Pure target: F = <psi|rho|psi> = Tr[rho sigma].
    if (std::abs(target.purity() - 1.0) < 1e-10)
        return std::max(0.0, (rho.mat * target.mat).trace().real());

    Eigen::VectorXd lam = es_r.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd sqrt_rho =
        es_r.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es_r.eigenvectors().adjoint();
    Eigen::MatrixXcd inner = sqrt_rho * target.mat * sqrt_rho;
    Eigen::VectorXd mu = hermitian_eigenvalues((inner + inner.adjoint()) / 2.0).cwiseMax(0.0);
    double f = mu.cwiseSqrt().sum();
    return std::max(0.0, f * f);
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw DimensionMismatch("trace_distance: dimension mismatch");
    Eigen::VectorXd lam = hermitian_eigenvalues(rho.mat - sigma.mat);
    return 0.5 * lam.cwiseAbs().sum();
}

DensityMatrix build_state(const StateSpec& spec, BuildInfo* info, Warnings* warnings) {
    if (spec.dim < 1) throw InvalidSpec("dimension must be positive");

    if (spec.kind == StateSpec::Kind::Mixture) {
        if (spec.components.empty()) throw InvalidSpec("mixture needs at least one component");
        double wsum = 0.0;
        for (const auto& [w, _] : spec.components) {
            if (w <= 0.0) throw InvalidSpec("mixture weights must be positive");
            wsum += w;
        }
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(spec.dim, spec.dim);
        double leak = 0.0;
        for (const auto& [w, sub] : spec.components) {
            StateSpec s = sub;
            s.dim = spec.dim;
            s.allow_truncation = spec.allow_truncation;
            BuildInfo sub_info;
            acc += (w / wsum) * build_state(s, &sub_info, warnings).mat;
            leak += (w / wsum) * sub_info.leakage;
        }
        if (info) info->leakage = leak;
        return DensityMatrix(acc);
    }

    if (spec.kind == StateSpec::Kind::Gkp) {
        // Mean photon number is monotone decreasing in the envelope parameter;
        // bisect until the truncated, renormalized state hits the target.
        double lo = 1e-4, hi = 4.0;
        if (gkp_mean_photon(spec.dim, lo) < spec.target_mean_photon - 1e-3)
            throw InvalidSpec("gkp: target mean photon unreachable at this dimension");
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            if (gkp_mean_photon(spec.dim, mid) > spec.target_mean_photon)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-12) break;
        }
        double delta2 = 0.5 * (lo + hi);
        if (std::abs(gkp_mean_photon(spec.dim, delta2) - spec.target_mean_photon) > 1e-3)
            throw InvalidSpec("gkp: envelope bisection failed to reach target mean photon");
        if (info) {
            info->leakage = 0.0;  // construction is defined in the truncated space
            info->gkp_envelope = delta2;
        }
        Eigen::VectorXcd c = gkp_coefficients(spec.dim, delta2);
        return DensityMatrix(c * c.adjoint());
    }

    // Pure states with a known untruncated expansion.
    if (spec.kind == StateSpec::Kind::Coherent || spec.kind == StateSpec::Kind::Cat) {
        double a = std::abs(spec.alpha);
        if (a * a + 6.0 * a >= spec.dim && !spec.allow_truncation)
            throw TruncationError("state amplitude too large for dimension (|a|^2 + 6|a| >= dim)");
    }
    Eigen::VectorXcd c = pure_coefficients(spec);
    double leak = std::max(0.0, 1.0 - c.squaredNorm());
    if (info) info->leakage = leak;
    if (leak > 1e-6) {
        if (!spec.allow_truncation)
            throw TruncationError("truncation leakage " + std::to_string(leak) + " exceeds 1e-6");
        warn(warnings, "truncation leakage " + std::to_string(leak) + " exceeds 1e-6");
    }
    return pure_state(c);
}

}  // namespace qtomo
