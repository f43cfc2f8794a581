#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/channels.hpp"
#include "qtomo/fock.hpp"
#include "qtomo/probes.hpp"

namespace qtomo {

struct SolverConfig {
    double gamma = 0.0;            // Tikhonov weight on ||P||
    int max_iterations = 50000;
    double primal_tolerance = 1e-8;
    double dual_tolerance = 1e-8;
    enum class StepRule { Fixed, Adaptive } step_rule = StepRule::Adaptive;
    double rho_penalty = 1.0;      // ADMM penalty (initial value when adaptive)
    std::uint64_t seed = 0;        // reserved; the solver is fully deterministic
    bool record_history = false;
};

struct SolverReport {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    double min_eigenvalue = 0.0;
    double trace_error = 0.0;
    bool converged = false;
    std::vector<std::array<double, 4>> history;  // iter, primal, dual, objective
};

/// Least-squares fit of the overlap data with Tikhonov damping, constrained to
/// the physical cone:
///   minimize 0.5 ||C P - O||^2 + (gamma/2) ||P||^2   s.t.  rho >= 0, Tr rho = 1.
/// Solved by operator splitting: a cached normal-equation factorization
/// alternating with projection onto {PSD, trace 1}. Never throws on slow
/// convergence; the best iterate is returned with converged = false.
std::pair<DensityMatrix, SolverReport> reconstruct_state(const Eigen::VectorXd& overlaps,
                                                         const CoefficientMatrix& c,
                                                         const SolverConfig& cfg);

/// Diagonal-wise loss deconvolution constrained to the physical cone with the
/// per-entry caps rho_nn <= eta^{-n} rho'_nn:
///   minimize 0.5 sum_i ||rho'^(i) - M^(i)(eta) rho^(i)||^2.
/// The cap constraint enters the projection step through Dykstra alternation.
std::pair<DensityMatrix, SolverReport> compensate_loss(const DensityMatrix& rho_prime,
                                                       const LossModel& loss,
                                                       const SolverConfig& cfg,
                                                       Warnings* warnings = nullptr);

/// Nearest density matrix in Frobenius norm: simplex projection of the
/// spectrum. Idempotent; physical inputs pass through unchanged.
DensityMatrix project_psd_trace_one(const Eigen::MatrixXcd& hermitian);

/// Euclidean projection of a real vector onto the probability simplex.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// Default regularization rule: 0.1 sqrt(1/max(shots,1)) ||O||_2, zero for
/// noiseless data. Any explicit config value overrides it.
double select_gamma(const Eigen::VectorXd& overlaps, long shots);

/// Objective value used by reconstruct_state, evaluated directly in the
/// complex representation (for certification against independent searches).
double reconstruction_objective(const Eigen::VectorXd& overlaps, const CoefficientMatrix& c,
                                const DensityMatrix& rho, double gamma);

/// Objective value used by compensate_loss.
double loss_fit_objective(const DensityMatrix& rho_prime, const LossModel& loss,
                          const DensityMatrix& rho);

}  // namespace qtomo
