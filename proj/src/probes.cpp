#include "qtomo/probes.hpp"

#include <cmath>

namespace qtomo {

ProbeSet probe_grid(const std::vector<double>& amplitudes, const std::vector<double>& phases,
                    int dim, const BeamsplitterSpec& bs, const ModeMatch& mm) {
    if (amplitudes.empty() || phases.empty())
        throw InvalidSpec("probe_grid: amplitude and phase lists must be nonempty");
    if (dim < 1) throw InvalidSpec("probe_grid: dim must be positive");

    ProbeSet set;
    set.bs = bs;
    set.mode_match = mm;
    set.dim = dim;
    bool have_zero = false;
    for (double a : amplitudes) {
        if (a < 0.0) throw InvalidSpec("probe_grid: amplitudes must be nonnegative");
        for (double phi : phases) {
            if (a == 0.0) {
                if (have_zero) continue;  // all zero-amplitude points are one probe
                have_zero = true;
                set.probes.emplace_back(0.0, 0.0);
                continue;
            }
            set.probes.emplace_back(a * std::cos(phi), a * std::sin(phi));
        }
    }
    for (std::size_t i = 0; i < set.probes.size(); ++i)
        for (std::size_t j = i + 1; j < set.probes.size(); ++j)
            if (std::abs(set.probes[i] - set.probes[j]) < 1e-12)
                throw DuplicateProbe("probe_grid: probes " + std::to_string(i) + " and " +
                                     std::to_string(j) + " coincide");
    std::size_t needed = static_cast<std::size_t>(dim) * dim;
    if (set.probes.size() < needed)
        set.warnings.push_back("probe count " + std::to_string(set.probes.size()) +
                               " below dim^2 = " + std::to_string(needed) +
                               "; system is underdetermined");
    return set;
}

ProbeSet probe_grid_linear(int n_amplitudes, double amp_max, int n_phases, int dim,
                           const BeamsplitterSpec& bs, const ModeMatch& mm) {
    if (n_amplitudes < 1 || n_phases < 1)
        throw InvalidSpec("probe_grid_linear: counts must be positive");
    std::vector<double> amps(n_amplitudes);
    for (int i = 0; i < n_amplitudes; ++i)
        amps[i] = n_amplitudes == 1 ? amp_max : amp_max * i / (n_amplitudes - 1.0);
    std::vector<double> phases(n_phases);
    for (int i = 0; i < n_phases; ++i) phases[i] = 2.0 * M_PI * i / n_phases;
    return probe_grid(amps, phases, dim, bs, mm);
}

CoefficientMatrix build_coefficient_matrix(const ProbeSet& probes) {
    const int d = probes.dim;
    CoefficientMatrix c;
    c.dim = d;
    c.entries.resize(static_cast<Eigen::Index>(probes.probes.size()),
                     static_cast<Eigen::Index>(d) * d);
    for (std::size_t j = 0; j < probes.probes.size(); ++j) {
        cplx matched = std::sqrt(probes.mode_match.m) * probes.probes[j];
        Eigen::VectorXcd coeff = coherent_coefficients(matched, d);
        for (int n = 0; n < d; ++n)
            for (int m = 0; m < d; ++m)
                c.entries(static_cast<Eigen::Index>(j), vec_index(n, m, d)) =
                    std::conj(coeff[n]) * coeff[m];
    }
    return c;
}

double predicted_overlap(const CoefficientMatrix& c, int row, const DensityMatrix& rho) {
    if (rho.dim() != c.dim) throw DimensionMismatch("predicted_overlap: dimension mismatch");
    cplx acc{0.0, 0.0};
    for (int n = 0; n < c.dim; ++n)
        for (int m = 0; m < c.dim; ++m)
            acc += c.entries(row, vec_index(n, m, c.dim)) * rho.mat(n, m);
    return acc.real();
}

GeneralOverlapOperator general_overlap_operator(cplx alpha, const BeamsplitterSpec& bs, int dim) {
    const double tau = bs.tau;
    if (std::abs(tau * tau - 1.0) < 1e-6)
        throw NumericalInstability(
            "general_overlap_operator: beamsplitter too close to balanced; "
            "use the coefficient-matrix path");

    GeneralOverlapOperator op;
    op.tau = tau;
    op.beta = bs.sigma * alpha;
    const double x = (1.0 - tau * tau) / (1.0 + tau * tau);
    const double b2 = std::norm(op.beta);
    const double envelope = std::exp(-(1.0 - x) * b2);
    const double y0 = -(1.0 - x) * (1.0 - x) * b2;  // scaled Laguerre argument: G_n = x^n L_n(y0/x)

    op.matrix.resize(dim, dim);
    for (int n = 0; n < dim; ++n) {
        // G_k = x^k L_k^{m-n}(y0 / x) via the recurrence scaled by x^k; this
        // stays finite for small x where the bare Laguerre argument diverges.
        for (int m = n; m < dim; ++m) {
            const int a = m - n;
            double g_prev = 1.0;
            double g = (1.0 + a) * x - y0;
            double gk = (n == 0) ? 1.0 : (n == 1 ? g : 0.0);
            for (int k = 1; k < n; ++k) {
                double g_next =
                    (((2.0 * k + 1.0 + a) * x - y0) * g - (k + a) * x * x * g_prev) / (k + 1.0);
                g_prev = g;
                g = g_next;
            }
            if (n >= 1) gk = g;
            double scale = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
            cplx bpow{1.0, 0.0};
            for (int k = 0; k < a; ++k) bpow *= std::conj(op.beta) * (1.0 - x);
            cplx val = envelope * scale * bpow * gk;
            op.matrix(n, m) = val;
            op.matrix(m, n) = std::conj(val);
        }
    }
    return op;
}

ConditionReport condition_report(const CoefficientMatrix& c) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(c.entries);
    ConditionReport rep;
    rep.singular_values = svd.singularValues();
    const double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
    const double smin = rep.singular_values.size()
                            ? rep.singular_values[rep.singular_values.size() - 1]
                            : 0.0;
    rep.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    rep.rank = 0;
    for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values[i] > 1e-10 * smax) ++rep.rank;
    return rep;
}

}  // namespace qtomo
