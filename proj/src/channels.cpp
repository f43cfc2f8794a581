#include "qtomo/channels.hpp"

#include <cmath>

namespace qtomo {

namespace {

double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// sqrt(C(n+k,k) C(m+k,k)) (1-eta)^k eta^((n+m)/2), sign handled for eta > 1
double loss_weight(int n, int m, int k, double eta) {
    if (k == 0) return std::pow(eta, 0.5 * (n + m));
    if (eta == 1.0) return 0.0;
    double lmag = 0.5 * (lchoose(n + k, k) + lchoose(m + k, k)) +
                  k * std::log(std::abs(1.0 - eta)) + 0.5 * (n + m) * std::log(eta);
    double sign = (1.0 - eta < 0.0 && k % 2 == 1) ? -1.0 : 1.0;
    return sign * std::exp(lmag);
}

std::vector<double> poisson_kernel(double lambda, int len) {
    std::vector<double> k(len);
    k[0] = std::exp(-lambda);
    for (int n = 1; n < len; ++n) k[n] = k[n - 1] * lambda / n;
    return k;
}

}  // namespace

DensityMatrix apply_loss(const DensityMatrix& rho, const LossModel& loss, Warnings* warnings) {
    if (loss.eta <= 0.0 || loss.eta > 1.0) throw InvalidSpec("loss eta must be in (0, 1]");
    const int d = rho.dim();
    if (loss.eta == 1.0) return rho;
    const int kmax = loss.n_max > 0 ? std::min(loss.n_max, d) : d;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n < d; ++n) {
        for (int m = n; m < d; ++m) {
            cplx acc{0.0, 0.0};
            for (int k = 0; n + k < d && m + k < d && k < kmax; ++k)
                acc += rho.mat(n + k, m + k) * loss_weight(n, m, k, loss.eta);
            out(n, m) = acc;
            out(m, n) = std::conj(acc);
        }
    }
    double deficit = std::abs(out.trace().real() - rho.mat.trace().real());
    if (deficit > 1e-9 && warnings)
        warnings->push_back("apply_loss: trace deficit " + std::to_string(deficit) +
                            " from support near the cutoff");
    return DensityMatrix(std::move(out), rho.normalized);
}

std::vector<double> apply_loss_to_distribution(const std::vector<double>& p, double eta) {
    const int d = static_cast<int>(p.size());
    std::vector<double> out(d, 0.0);
    for (int n = 0; n < d; ++n)
        for (int k = 0; n + k < d; ++k)
            out[n] += p[n + k] * loss_weight(n, n, k, eta);
    return out;
}

BernoulliMap bernoulli_map(int diagonal_index, double eta, int n_max) {
    if (diagonal_index < 0 || diagonal_index >= n_max)
        throw InvalidSpec("bernoulli_map: need 0 <= diagonal_index < n_max");
    if (eta <= 0.0) throw InvalidSpec("bernoulli_map: eta must be positive");
    const int i = diagonal_index;
    const int size = n_max - i;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
    for (int j = 0; j < size; ++j) {
        for (int k = j; k < size; ++k) {
            double lmag = 0.5 * (lchoose(k, k - j) + lchoose(i + k, k - j)) +
                          0.5 * i * std::log(eta) + j * std::log(eta);
            double off = k - j;
            double sign = 1.0;
            if (off > 0) {
                lmag += off * std::log(std::abs(1.0 - eta));
                sign = (1.0 - eta < 0.0 && static_cast<int>(off) % 2 == 1) ? -1.0 : 1.0;
            }
            m(j, k) = sign * std::exp(lmag);
        }
    }
    return BernoulliMap{i, eta, std::move(m)};
}

LossInversionResult analytic_loss_invert(const DensityMatrix& rho_prime, const LossModel& loss) {
    if (loss.eta <= 0.0) throw InvalidSpec("analytic_loss_invert: eta must be positive");
    const int d = rho_prime.dim();
    const int n_max = loss.n_max > 0 ? std::min(loss.n_max, d) : d;
    Eigen::MatrixXcd out = rho_prime.mat;
    for (int i = 0; i < n_max; ++i) {
        BernoulliMap inv = bernoulli_map(i, 1.0 / loss.eta, n_max);
        Eigen::VectorXcd diag(n_max - i);
        for (int j = 0; j < n_max - i; ++j) diag[j] = rho_prime.mat(j, j + i);
        Eigen::VectorXcd mapped = inv.matrix * diag;
        for (int j = 0; j < n_max - i; ++j) {
            out(j, j + i) = mapped[j];
            out(j + i, j) = std::conj(mapped[j]);
        }
    }
    LossInversionResult res;
    res.state = DensityMatrix(std::move(out), false);
    res.min_eigenvalue = res.state.min_eigenvalue();
    res.physical = res.min_eigenvalue >= -1e-9;
    return res;
}

int poisson_headroom(double lambda) {
    return static_cast<int>(std::ceil(lambda + 10.0 * std::sqrt(lambda))) + 10;
}

std::vector<double> mode_mismatch_convolve(const std::vector<double>& p_parallel,
                                           const ModeMatch& mm) {
    const double lambda = mm.alpha_perp_intensity;
    if (lambda < 0.0) throw InvalidSpec("mode mismatch intensity must be nonnegative");
    if (lambda == 0.0) return p_parallel;
    const int klen = poisson_headroom(lambda);
    const int n_in = static_cast<int>(p_parallel.size());
    std::vector<double> kernel = poisson_kernel(lambda, klen);
    std::vector<double> out(n_in + klen - 1, 0.0);
    for (int l = 0; l < n_in; ++l)
        for (int k = 0; k < klen; ++k) out[l + k] += p_parallel[l] * kernel[k];
    double total = 0.0;
    for (double v : out) total += v;
    if (total > 0.0)
        for (double& v : out) v /= total;
    return out;
}

DeconvolutionResult mode_mismatch_deconvolve(const std::vector<double>& p_measured,
                                             const ModeMatch& mm, Warnings* warnings) {
    DeconvolutionResult res;
    const double lambda = mm.alpha_perp_intensity;
    if (lambda == 0.0) {
        res.cleaned = p_measured;
        res.raw = p_measured;
        return res;
    }
    const int n = static_cast<int>(p_measured.size());
    std::vector<double> kernel = poisson_kernel(lambda, n);
    res.raw.resize(n);
    for (int i = 0; i < n; ++i) {
        double acc = p_measured[i];
        for (int l = 0; l < i; ++l) acc -= res.raw[l] * kernel[i - l];
        res.raw[i] = acc / kernel[0];
    }
    res.cleaned = res.raw;
    double total = 0.0;
    for (double& v : res.cleaned) {
        if (v < -1e-6) res.had_negative = true;
        if (v < 0.0) v = 0.0;
        total += v;
    }
    if (res.had_negative && warnings)
        warnings->push_back("mode_mismatch_deconvolve: negative probabilities clipped");
    if (total > 0.0)
        for (double& v : res.cleaned) v /= total;
    return res;
}

}  // namespace qtomo
