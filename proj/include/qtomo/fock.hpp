#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/errors.hpp"

namespace qtomo {

using cplx = std::complex<double>;
using Warnings = std::vector<std::string>;

/// Truncated-Fock-basis density matrix. `normalized` distinguishes proper
/// states from raw reconstructions that have not been rescaled to unit trace.
struct DensityMatrix {
    Eigen::MatrixXcd mat;
    bool normalized = true;

    DensityMatrix() = default;
    explicit DensityMatrix(Eigen::MatrixXcd m, bool norm = true)
        : mat(std::move(m)), normalized(norm) {}

    int dim() const { return static_cast<int>(mat.rows()); }
    cplx trace() const { return mat.trace(); }
    double trace_error() const { return std::abs(mat.trace() - cplx(1.0, 0.0)); }
    double hermiticity_error() const { return (mat - mat.adjoint()).cwiseAbs().maxCoeff(); }
    double purity() const { return (mat * mat).trace().real(); }

    /// Eigenvalues sorted ascending (dense Hermitian solver, reproducible).
    Eigen::VectorXd eigenvalues() const;
    double min_eigenvalue() const;
    double mean_photon_number() const;
    std::vector<double> photon_distribution() const;
};

/// Fock projector |n><n| embedded at the given dimension.
DensityMatrix fock_state(int n, int dim);

/// Pure state from a coefficient vector (renormalizes).
DensityMatrix pure_state(const Eigen::VectorXcd& coeffs);

// ---------------------------------------------------------------------------
// State construction
// ---------------------------------------------------------------------------

struct StateSpec {
    enum class Kind { Fock, Coherent, Cat, Gkp, Mixture };

    Kind kind = Kind::Fock;
    int dim = 1;
    int fock_n = 0;                       // Fock
    cplx alpha{0.0, 0.0};                 // Coherent / Cat
    int parity_sign = +1;                 // Cat: |a> + sign|-a>
    double target_mean_photon = 0.0;      // Gkp
    std::vector<std::pair<double, StateSpec>> components;  // Mixture
    bool allow_truncation = false;

    static StateSpec fock(int n, int dim);
    static StateSpec coherent(cplx alpha, int dim);
    static StateSpec cat(cplx alpha, int dim, int parity_sign = +1);
    static StateSpec gkp(double target_mean_photon, int dim);
    static StateSpec mixture(std::vector<std::pair<double, StateSpec>> components, int dim);
};

struct BuildInfo {
    double leakage = 0.0;   // probability mass of the untruncated state above dim-1
    double gkp_envelope = 0.0;  // fitted envelope parameter (GKP only)
};

/// Builds the density matrix for a spec. Leakage above 1e-6 raises
/// TruncationError unless spec.allow_truncation is set, in which case a
/// warning is appended and the truncated state is renormalized.
DensityMatrix build_state(const StateSpec& spec, BuildInfo* info = nullptr,
                          Warnings* warnings = nullptr);

/// Fock coefficients of |alpha>: c_m = exp(-|a|^2/2) a^m / sqrt(m!).
Eigen::VectorXcd coherent_coefficients(cplx alpha, int dim);

/// Smallest dimension holding all but `tail` of the coherent state's mass.
int coherent_cutoff(cplx alpha, double tail = 1e-12);

// ---------------------------------------------------------------------------
// Special functions and phase-space evaluation
// ---------------------------------------------------------------------------

/// Associated Laguerre polynomial L_k^a(x), three-term upward recurrence in k.
/// Valid for any real x (the recurrence is a polynomial identity).
double laguerre(int k, int a, double x);

/// Matrix element <n|Pi(q,p)|m> of the displaced parity operator at the
/// phase-space point alpha = q + i p, i.e. Pi = 2 D(g) (-1)^N D(g)^dag with
/// displacement g = alpha/sqrt(2). Vacuum at the origin gives 2.
cplx displaced_parity_element(int n, int m, cplx alpha);

/// Full dim x dim displaced-parity matrix at alpha = q + i p.
Eigen::MatrixXcd displaced_parity_matrix(int dim, cplx alpha);

/// Wigner function W(q,p) = Tr[rho Pi(q,p)] / (2 pi); vacuum peaks at 1/pi
/// and the function integrates to 1 over the whole plane.
double wigner_point(const DensityMatrix& rho, double q, double p);

struct WignerGrid {
    std::vector<double> q_values;
    std::vector<double> p_values;
    Eigen::MatrixXd values;  // values(i,j) = W(q_values[i], p_values[j])
};

WignerGrid wigner_grid(const DensityMatrix& rho, const std::vector<double>& q_values,
                       const std::vector<double>& p_values);

/// Expectation of (-1)^N; equals pi * W(0,0).
double parity_expectation(const DensityMatrix& rho);

/// Uhlmann fidelity; reduces to <psi|rho|psi> for a pure target.
/// Throws NonPhysicalInput if either matrix has an eigenvalue below -1e-6.
double fidelity(const DensityMatrix& rho, const DensityMatrix& target);

/// Half the trace norm of rho - sigma.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace qtomo
