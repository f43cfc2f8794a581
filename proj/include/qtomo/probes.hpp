#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qtomo/channels.hpp"
#include "qtomo/fock.hpp"
#include "qtomo/interference.hpp"

namespace qtomo {

/// Column index of rho_{n,m} in the vectorized state: row-major, n outer.
/// Shared between the coefficient matrix and the solver.
inline int vec_index(int n, int m, int dim) { return n * dim + m; }

struct ProbeSet {
    std::vector<cplx> probes;
    BeamsplitterSpec bs = BeamsplitterSpec::balanced();
    ModeMatch mode_match{1.0, 0.0};
    int dim = 1;
    std::vector<std::string> warnings;
};

/// Cartesian product amplitude x phase, deduplicated (all zero-amplitude
/// points collapse to a single vacuum probe). Distinct grid points that still
/// coincide raise DuplicateProbe.
ProbeSet probe_grid(const std::vector<double>& amplitudes, const std::vector<double>& phases,
                    int dim, const BeamsplitterSpec& bs = BeamsplitterSpec::balanced(),
                    const ModeMatch& mm = ModeMatch{1.0, 0.0});

/// Convenience: n_amplitudes linearly spaced in [0, amp_max] crossed with
/// n_phases spaced by 2 pi / n_phases starting at 0.
ProbeSet probe_grid_linear(int n_amplitudes, double amp_max, int n_phases, int dim,
                           const BeamsplitterSpec& bs = BeamsplitterSpec::balanced(),
                           const ModeMatch& mm = ModeMatch{1.0, 0.0});

/// Linear map from the vectorized state to the overlap vector for balanced
/// interference: entry (j, n*dim + m) = conj(c_jn) c_jm built from the
/// mode-matched probe sqrt(M) alpha_j.
struct CoefficientMatrix {
    Eigen::MatrixXcd entries;  // n_probes x dim^2
    int dim = 1;

    int rows() const { return static_cast<int>(entries.rows()); }
};

CoefficientMatrix build_coefficient_matrix(const ProbeSet& probes);

/// Applies row j to a density matrix (the predicted overlap).
double predicted_overlap(const CoefficientMatrix& c, int row, const DensityMatrix& rho);

/// Fock-basis operator T with Tr[T rho] equal to the parity measured at
/// output port a of an unbalanced beamsplitter (probe alpha, tau = t/r).
/// T = D(beta) x^N D(beta)^dag with beta = sigma alpha, x = (1-tau^2)/(1+tau^2):
/// a displaced thermal-like kernel that tends to the displaced parity sampling
/// of point-by-point Wigner tomography as tau grows, and to |beta><beta| at
/// the balanced point.
struct GeneralOverlapOperator {
    cplx beta{0.0, 0.0};
    double tau = 1.0;
    Eigen::MatrixXcd matrix;
};

/// Throws NumericalInstability for |tau^2 - 1| < 1e-6; the balanced case is
/// served exactly by the coefficient-matrix path.
GeneralOverlapOperator general_overlap_operator(cplx alpha, const BeamsplitterSpec& bs, int dim);

struct ConditionReport {
    Eigen::VectorXd singular_values;  // descending
    double condition_number = 1.0;
    int rank = 0;                     // at tolerance 1e-10 relative to s_max
};

ConditionReport condition_report(const CoefficientMatrix& c);

}  // namespace qtomo
