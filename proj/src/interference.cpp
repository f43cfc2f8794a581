#include "qtomo/interference.hpp"

#include <cmath>
#include <optional>

#include "qtomo/probes.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

namespace {

// Probe-mode cutoff: spec heuristic |a|^2 + 6|a| + 2 widened until the
// coherent tail mass drops below 1e-12, so downstream identities hold at 1e-9.
int probe_dim(cplx alpha) {
    double a = std::abs(alpha);
    int heuristic = static_cast<int>(std::ceil(a * a + 6.0 * a)) + 2;
    return std::max(heuristic, coherent_cutoff(alpha, 1e-12));
}

// Input block <a, N-a| rho (x) |c><c| |b, N'-b> for total photon numbers N, N'.
Eigen::MatrixXcd input_block(const DensityMatrix& rho, const Eigen::VectorXcd& c, int n, int np) {
    const int d1 = rho.dim();
    Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(n + 1, np + 1);
    for (int a = 0; a <= std::min(n, d1 - 1); ++a)
        for (int b = 0; b <= std::min(np, d1 - 1); ++b)
            block(a, b) = rho.mat(a, b) * c[n - a] * std::conj(c[np - b]);
    return block;
}

double distribution_parity(const std::vector<double>& p) {
    double parity = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n)
        parity += (n % 2 == 0 ? 1.0 : -1.0) * p[n];
    return parity;
}

// Photon distributions of both output ports from the diagonal blocks only.
// For Hermitian input blocks the diagonal of U B U^T is real and only the
// real part of B contributes.
void port_distributions(const DensityMatrix& rho, cplx alpha, const BeamsplitterSpec& bs,
                        const BeamsplitterBlocks* cache, std::vector<double>* port_a,
                        std::vector<double>* port_b) {
    const int d1 = rho.dim();
    const int n_max = d1 - 1 + probe_dim(alpha) - 1;

    Eigen::VectorXcd c = coherent_coefficients(alpha, n_max + 1);
    c /= c.norm();
    std::optional<BeamsplitterBlocks> local;
    if (!cache) local.emplace(bs, n_max);
    const BeamsplitterBlocks& blocks = cache ? *cache : *local;
    if (blocks.n_total_max() < n_max)
        throw DimensionMismatch("beamsplitter block cache too small for this probe");

    if (port_a) port_a->assign(n_max + 1, 0.0);
    if (port_b) port_b->assign(n_max + 1, 0.0);
    for (int n = 0; n <= n_max; ++n) {
        Eigen::MatrixXd br = input_block(rho, c, n, n).real();
        const Eigen::MatrixXd& u = blocks.block(n);
        Eigen::MatrixXd ub = u * br;
        for (int k = 0; k <= n; ++k) {
            double pk = ub.row(k).dot(u.row(k));
            if (port_a) (*port_a)[k] += pk;
            if (port_b) (*port_b)[n - k] += pk;
        }
    }
}

}  // namespace

BeamsplitterSpec BeamsplitterSpec::balanced() { return from_reflectance(1.0 / std::sqrt(2.0)); }

BeamsplitterSpec BeamsplitterSpec::from_reflectance(double r) {
    if (!(r > 0.0 && r < 1.0)) throw InvalidSpec("beamsplitter reflectance must be in (0, 1)");
    BeamsplitterSpec bs;
    bs.r = r;
    bs.t = std::sqrt(1.0 - r * r);
    bs.sigma = bs.r / bs.t;
    bs.tau = bs.t / bs.r;
    return bs;
}

BeamsplitterSpec BeamsplitterSpec::from_tau(double tau) {
    if (!(tau > 0.0)) throw InvalidSpec("beamsplitter tau must be positive");
    return from_reflectance(1.0 / std::sqrt(1.0 + tau * tau));
}

BeamsplitterBlocks::BeamsplitterBlocks(const BeamsplitterSpec& bs, int n_total_max) {
    // U = exp(theta (a^dag b - a b^dag)) with cos(theta) = t, sin(theta) = -r.
    // i G is Hermitian tridiagonal in each block, so U = V exp(-i theta L) V^dag.
    const double theta = std::atan2(-bs.r, bs.t);
    blocks_.reserve(n_total_max + 1);
    for (int n = 0; n <= n_total_max; ++n) {
        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
        for (int k = 0; k < n; ++k) {
            double g = std::sqrt((k + 1.0) * (n - k));  // <k+1, n-k-1| a^dag b |k, n-k>
            h(k + 1, k) = cplx(0.0, 1.0) * g;
            h(k, k + 1) = cplx(0.0, -1.0) * g;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
        Eigen::VectorXcd phases(n + 1);
        for (int k = 0; k <= n; ++k)
            phases[k] = std::exp(cplx(0.0, -theta * es.eigenvalues()[k]));
        Eigen::MatrixXcd u =
            es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        blocks_.push_back(u.real());
    }
}

DensityMatrix interfere_and_reduce(const DensityMatrix& rho, cplx alpha,
                                   const BeamsplitterSpec& bs) {
    const int d1 = rho.dim();
    const int d2 = probe_dim(alpha);
    const int n_max = d1 - 1 + d2 - 1;
    const int d_out = n_max + 1;

    Eigen::VectorXcd c = coherent_coefficients(alpha, d_out);
    c /= c.norm();
    BeamsplitterBlocks blocks(bs, n_max);

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d_out, d_out);
    for (int n = 0; n <= n_max; ++n) {
        const int np_lo = std::max(0, n - (d1 - 1));
        const int np_hi = std::min(n_max, n + (d1 - 1));
        for (int np = np_lo; np <= np_hi; ++np) {
            Eigen::MatrixXcd b = input_block(rho, c, n, np);
            const Eigen::MatrixXd& u = blocks.block(n);
            const Eigen::MatrixXd& up = blocks.block(np);
            Eigen::MatrixXd m_re = u * b.real() * up.transpose();
            Eigen::MatrixXd m_im = u * b.imag() * up.transpose();
            // trace over port b: pair (n1, k) with (m1, k), k = n - n1 = np - m1
            for (int n1 = std::max(0, n - np); n1 <= n; ++n1) {
                int m1 = np - (n - n1);
                out(n1, m1) += cplx(m_re(n1, m1), m_im(n1, m1));
            }
        }
    }
    return DensityMatrix(std::move(out), rho.normalized);
}

std::vector<double> interfere_distribution(const DensityMatrix& rho, cplx alpha,
                                           const BeamsplitterSpec& bs,
                                           const BeamsplitterBlocks* cache) {
    std::vector<double> p;
    port_distributions(rho, alpha, bs, cache, &p, nullptr);
    return p;
}

std::vector<double> interfere_distribution_second_port(const DensityMatrix& rho, cplx alpha,
                                                       const BeamsplitterSpec& bs) {
    std::vector<double> p;
    port_distributions(rho, alpha, bs, nullptr, nullptr, &p);
    return p;
}

double overlap_exact(const DensityMatrix& rho, cplx alpha, const BeamsplitterSpec& bs) {
    return distribution_parity(interfere_distribution(rho, alpha, bs));
}

double overlap_second_port(const DensityMatrix& rho, cplx alpha, const BeamsplitterSpec& bs) {
    return distribution_parity(interfere_distribution_second_port(rho, alpha, bs));
}

std::vector<double> simulate_counts(const std::vector<double>& distribution, long shots,
                                    std::uint64_t seed) {
    if (shots < 1) throw InvalidSpec("simulate_counts: shots must be >= 1");
    std::mt19937_64 gen(seed);
    std::vector<long> counts = multinomial_counts(distribution, shots, gen);
    std::vector<double> freq(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        freq[i] = static_cast<double>(counts[i]) / static_cast<double>(shots);
    return freq;
}

std::vector<OverlapRecord> run_probe_sweep(const DensityMatrix& rho, const ProbeSet& probes,
                                           const LossModel& loss, const ModeMatch& mm,
                                           const SweepOptions& options, Warnings* warnings) {
    DensityMatrix lossy = apply_loss(rho, loss, warnings);

    int n_max_global = 0;
    for (cplx a : probes.probes) {
        cplx matched = std::sqrt(mm.m) * a;
        n_max_global = std::max(n_max_global, lossy.dim() - 1 + probe_dim(matched) - 1);
    }
    BeamsplitterBlocks blocks(probes.bs, n_max_global);

    bool overflow_warned = false;
    std::vector<OverlapRecord> records;
    records.reserve(probes.probes.size());
    for (std::size_t j = 0; j < probes.probes.size(); ++j) {
        const cplx alpha = probes.probes[j];
        OverlapRecord rec;
        rec.probe_index = static_cast<int>(j);
        rec.alpha = alpha;
        rec.shots = options.shots;

        std::vector<double> dist =
            interfere_distribution(lossy, std::sqrt(mm.m) * alpha, probes.bs, &blocks);
        dist = mode_mismatch_convolve(dist, ModeMatch::for_probe(mm.m, alpha));

        if (options.shots > 0) {
            std::vector<double> freq =
                simulate_counts(dist, options.shots, derive_seed(options.seed, j));
            if (options.pnr_max >= 0 && static_cast<int>(freq.size()) > options.pnr_max + 1) {
                double overflow = 0.0;
                for (std::size_t n = options.pnr_max + 1; n < freq.size(); ++n)
                    overflow += freq[n];
                freq.resize(options.pnr_max + 1);
                freq.back() += overflow;
                if (overflow > 0.0 && !overflow_warned && warnings) {
                    warnings->push_back("run_probe_sweep: detector overflow binned into top bin");
                    overflow_warned = true;
                }
            }
            rec.distribution = std::move(freq);
        } else {
            rec.distribution = std::move(dist);
        }
        rec.parity = distribution_parity(rec.distribution);
        rec.overlap = rec.parity;
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace qtomo
