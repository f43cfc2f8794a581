#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qtomo/fock.hpp"

namespace qtomo {

/// Uniform optical loss with total transmission eta; n_max limits the photon
/// ladder sum (0 means "use the input dimension").
struct LossModel {
    double eta = 1.0;
    int n_max = 0;
};

/// Linear map acting on the i-th diagonal of a density matrix under loss.
/// Upper triangular with diagonal entries eta^(i/2 + j), hence invertible;
/// the inverse map is the same formula evaluated at 1/eta.
struct BernoulliMap {
    int diagonal_index = 0;
    double eta = 1.0;
    Eigen::MatrixXd matrix;
};

/// Bright-field overlap between probe and signal. The non-overlapping probe
/// component reaches the detector as an independent Poisson background of
/// mean alpha_perp_intensity = (1 - m) |alpha|^2.
struct ModeMatch {
    double m = 1.0;
    double alpha_perp_intensity = 0.0;

    static ModeMatch for_probe(double m, cplx alpha) {
        return ModeMatch{m, (1.0 - m) * std::norm(alpha)};
    }
};

/// rho' under transmission eta: a photon-ladder sum with binomial weights,
/// acting independently along each diagonal. Trace- and positivity-preserving.
DensityMatrix apply_loss(const DensityMatrix& rho, const LossModel& loss,
                         Warnings* warnings = nullptr);

/// Loss acting on a bare photon-number distribution (the i = 0 diagonal map).
std::vector<double> apply_loss_to_distribution(const std::vector<double>& p, double eta);

BernoulliMap bernoulli_map(int diagonal_index, double eta, int n_max);

struct LossInversionResult {
    DensityMatrix state;  // not guaranteed physical
    double min_eigenvalue = 0.0;
    bool physical = false;
};

/// Exact diagonal-wise inversion of apply_loss via the 1/eta map. Noise on the
/// input is amplified by eta^{-n}; the result is returned unrejected and
/// flagged when it leaves the physical cone.
LossInversionResult analytic_loss_invert(const DensityMatrix& rho_prime, const LossModel& loss);

/// Number of Poisson kernel entries needed so the truncated tail mass stays
/// below ~1e-12 (lambda + 10 sqrt(lambda) + 10).
int poisson_headroom(double lambda);

/// Convolves p with the Poisson background of the mismatched probe component.
/// The output is extended by the kernel headroom so no probability is lost
/// beyond 1e-9, then renormalized. m == 1 returns the input unchanged.
std::vector<double> mode_mismatch_convolve(const std::vector<double>& p_parallel,
                                           const ModeMatch& mm);

struct DeconvolutionResult {
    std::vector<double> cleaned;  // clipped to >= 0 and renormalized
    std::vector<double> raw;      // exact triangular solve, kept for audit
    bool had_negative = false;    // any raw entry below -1e-6
};

/// Exact inverse of the Poisson convolution (lower-triangular solve with
/// diagonal e^{-lambda}). Negative entries from noisy data are clipped and
/// renormalized; the raw solution is retained.
DeconvolutionResult mode_mismatch_deconvolve(const std::vector<double>& p_measured,
                                             const ModeMatch& mm,
                                             Warnings* warnings = nullptr);

}  // namespace qtomo
