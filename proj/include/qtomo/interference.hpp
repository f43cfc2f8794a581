#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qtomo/channels.hpp"
#include "qtomo/fock.hpp"

namespace qtomo {

/// Lossless two-port beamsplitter, field convention a' = t a - r b,
/// b' = r a + t b. The probe enters port b.
struct BeamsplitterSpec {
    double r = 0.0;      // field reflectance
    double t = 1.0;      // transmittance, sqrt(1 - r^2)
    double sigma = 0.0;  // r / t
    double tau = 0.0;    // t / r

    static BeamsplitterSpec balanced();
    static BeamsplitterSpec from_reflectance(double r);
    static BeamsplitterSpec from_tau(double tau);
    bool is_balanced(double tol = 1e-9) const { return std::abs(r - t) <= tol; }
};

/// Fock-basis unitary of the two-mode rotation, block-diagonal in the total
/// photon number. Block N acts on span{|k, N-k>, k = 0..N} and is obtained by
/// exponentiating the tridiagonal generator through a Hermitian eigensolve.
class BeamsplitterBlocks {
  public:
    BeamsplitterBlocks(const BeamsplitterSpec& bs, int n_total_max);
    int n_total_max() const { return static_cast<int>(blocks_.size()) - 1; }
    const Eigen::MatrixXd& block(int n) const { return blocks_[n]; }

  private:
    std::vector<Eigen::MatrixXd> blocks_;
};

/// Reduced state of output port a after interfering rho (port a) with a
/// coherent probe (port b) and tracing out port b. Exact within the automatic
/// two-mode cutoff; output dimension is dim(rho) + probe cutoff - 1.
DensityMatrix interfere_and_reduce(const DensityMatrix& rho, cplx alpha,
                                   const BeamsplitterSpec& bs);

/// Photon-number distribution of output port a (diagonal blocks only).
std::vector<double> interfere_distribution(const DensityMatrix& rho, cplx alpha,
                                           const BeamsplitterSpec& bs,
                                           const BeamsplitterBlocks* cache = nullptr);

/// Same for output port b.
std::vector<double> interfere_distribution_second_port(const DensityMatrix& rho, cplx alpha,
                                                       const BeamsplitterSpec& bs);

/// Photon-number parity of output port a, i.e. pi * W'(0,0) of the reduced
/// state. Equals Tr[rho |alpha><alpha|] for a balanced beamsplitter.
double overlap_exact(const DensityMatrix& rho, cplx alpha, const BeamsplitterSpec& bs);

/// Parity of output port b; for a balanced beamsplitter this is the overlap
/// with the opposite-phase probe |-alpha>.
double overlap_second_port(const DensityMatrix& rho, cplx alpha, const BeamsplitterSpec& bs);

/// Empirical frequencies of a multinomial draw; reproducible given the seed.
std::vector<double> simulate_counts(const std::vector<double>& distribution, long shots,
                                    std::uint64_t seed);

struct OverlapRecord {
    int probe_index = 0;
    cplx alpha{0.0, 0.0};
    std::vector<double> distribution;
    long shots = 0;  // 0 = exact distribution
    double overlap = 0.0;
    double parity = 0.0;
};

struct SweepOptions {
    long shots = 0;
    std::uint64_t seed = 0;
    int pnr_max = -1;  // >= 0 caps the detector, overflow binned into the top bin
};

struct ProbeSet;  // probes.hpp

/// Full measurement simulation: loss on the signal, interference with the
/// mode-matched probe component, Poisson background of the mismatched
/// component, optional multinomial shot noise and detector cap. Record j
/// depends only on (seed, probe index j), never on evaluation order.
std::vector<OverlapRecord> run_probe_sweep(const DensityMatrix& rho, const ProbeSet& probes,
                                           const LossModel& loss, const ModeMatch& mm,
                                           const SweepOptions& options,
                                           Warnings* warnings = nullptr);

}  // namespace qtomo
