#include "qtomo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace qtomo {

namespace {

// Real parametrization of Hermitian matrices: [diagonal | sqrt(2) Re upper |
// sqrt(2) Im upper], an isometry for the Frobenius norm.
struct RealLayout {
    int d;

    explicit RealLayout(int dim) : d(dim) {}
    int size() const { return d * d; }
    int pair_offset(int n, int m) const {  // n < m, row-major upper triangle
        return n * d - n * (n + 1) / 2 + (m - n - 1);
    }
    int re(int n, int m) const { return d + 2 * pair_offset(n, m); }
    int im(int n, int m) const { return d + 2 * pair_offset(n, m) + 1; }

    Eigen::VectorXd to_vec(const Eigen::MatrixXcd& h) const {
        Eigen::VectorXd v(size());
        const double s2 = std::sqrt(2.0);
        for (int n = 0; n < d; ++n) v[n] = h(n, n).real();
        for (int n = 0; n < d; ++n)
            for (int m = n + 1; m < d; ++m) {
                v[re(n, m)] = s2 * h(n, m).real();
                v[im(n, m)] = s2 * h(n, m).imag();
            }
        return v;
    }

    Eigen::MatrixXcd to_herm(const Eigen::VectorXd& v) const {
        Eigen::MatrixXcd h(d, d);
        const double is2 = 1.0 / std::sqrt(2.0);
        for (int n = 0; n < d; ++n) h(n, n) = v[n];
        for (int n = 0; n < d; ++n)
            for (int m = n + 1; m < d; ++m) {
                cplx z(v[re(n, m)] * is2, v[im(n, m)] * is2);
                h(n, m) = z;
                h(m, n) = std::conj(z);
            }
        return h;
    }
};

// O_j = sum_nm C_{j,nm} rho_nm realified against the layout above.
Eigen::MatrixXd realify_overlap_matrix(const CoefficientMatrix& c, const RealLayout& lay) {
    const int d = c.dim;
    Eigen::MatrixXd a(c.rows(), lay.size());
    const double s2 = std::sqrt(2.0);
    for (int j = 0; j < c.rows(); ++j) {
        for (int n = 0; n < d; ++n) a(j, n) = c.entries(j, vec_index(n, n, d)).real();
        for (int n = 0; n < d; ++n)
            for (int m = n + 1; m < d; ++m) {
                cplx e = c.entries(j, vec_index(n, m, d));
                a(j, lay.re(n, m)) = s2 * e.real();
                a(j, lay.im(n, m)) = -s2 * e.imag();
            }
    }
    return a;
}

struct AdmmProblem {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> project;
    RealLayout lay;
    Eigen::VectorXd z0;
};

SolverReport run_admm(const AdmmProblem& prob, const SolverConfig& cfg, double gamma,
                      Eigen::VectorXd* z_out) {
    const int n = static_cast<int>(prob.a.cols());
    Eigen::MatrixXd ata = prob.a.transpose() * prob.a;
    Eigen::VectorXd atb = prob.a.transpose() * prob.b;

    double rho = cfg.rho_penalty;
    Eigen::LDLT<Eigen::MatrixXd> factor(
        ata + (gamma + rho) * Eigen::MatrixXd::Identity(n, n));

    Eigen::VectorXd z = prob.z0;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
    SolverReport rep;

    const double relax = 1.6;
    double r_norm = 0.0, s_norm = 0.0;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        Eigen::VectorXd x = factor.solve(atb + rho * (z - u));
        Eigen::VectorXd xr = relax * x + (1.0 - relax) * z;
        Eigen::VectorXd z_new = prob.project(xr + u);
        u += xr - z_new;
        r_norm = (x - z_new).norm();
        s_norm = rho * (z_new - z).norm();
        z = z_new;
        if (cfg.record_history) {
            double obj = 0.5 * (prob.a * z - prob.b).squaredNorm() + 0.5 * gamma * z.squaredNorm();
            rep.history.push_back({static_cast<double>(it), r_norm, s_norm, obj});
        }
        if (r_norm <= cfg.primal_tolerance && s_norm <= cfg.dual_tolerance) {
            ++it;
            rep.converged = true;
            break;
        }
        if (cfg.step_rule == SolverConfig::StepRule::Adaptive && it % 25 == 24) {
            if (r_norm > 10.0 * s_norm) {
                rho *= 2.0;
                u /= 2.0;
                factor.compute(ata + (gamma + rho) * Eigen::MatrixXd::Identity(n, n));
            } else if (s_norm > 10.0 * r_norm) {
                rho /= 2.0;
                u *= 2.0;
                factor.compute(ata + (gamma + rho) * Eigen::MatrixXd::Identity(n, n));
            }
        }
    }
    rep.iterations = it;
    rep.primal_residual = r_norm;
    rep.dual_residual = s_norm;
    rep.objective = 0.5 * (prob.a * z - prob.b).squaredNorm() + 0.5 * gamma * z.squaredNorm();
    *z_out = z;
    return rep;
}

Eigen::MatrixXcd symmetrized(const Eigen::MatrixXcd& m) { return (m + m.adjoint()) / 2.0; }

}  // namespace

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int k = 0;
    for (int i = 0; i < n; ++i) {
        cum += u[i];
        double t = (cum - 1.0) / (i + 1);
        if (u[i] - t > 0.0) {
            k = i + 1;
            theta = t;
        }
    }
    (void)k;
    return (v.array() - theta).cwiseMax(0.0);
}

DensityMatrix project_psd_trace_one(const Eigen::MatrixXcd& hermitian) {
    Eigen::MatrixXcd h = symmetrized(hermitian);
    if ((h - hermitian).cwiseAbs().maxCoeff() > 1e-6)
        throw NonPhysicalInput("project_psd_trace_one: input is far from Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXd lam = project_simplex(es.eigenvalues());
    Eigen::MatrixXcd out =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
    return DensityMatrix(symmetrized(out));
}

double select_gamma(const Eigen::VectorXd& overlaps, long shots) {
    if (shots <= 0) return 0.0;
    return 0.1 * std::sqrt(1.0 / static_cast<double>(shots)) * overlaps.norm();
}

double reconstruction_objective(const Eigen::VectorXd& overlaps, const CoefficientMatrix& c,
                                const DensityMatrix& rho, double gamma) {
    double fit = 0.0;
    for (int j = 0; j < c.rows(); ++j) {
        double r = predicted_overlap(c, j, rho) - overlaps[j];
        fit += r * r;
    }
    return 0.5 * fit + 0.5 * gamma * rho.mat.squaredNorm();
}

double loss_fit_objective(const DensityMatrix& rho_prime, const LossModel& loss,
                          const DensityMatrix& rho) {
    const int d = rho.dim();
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
        BernoulliMap map = bernoulli_map(i, loss.eta, d);
        Eigen::VectorXcd diag(d - i), diag_prime(d - i);
        for (int j = 0; j < d - i; ++j) {
            diag[j] = rho.mat(j, j + i);
            diag_prime[j] = rho_prime.mat(j, j + i);
        }
        acc += (map.matrix * diag - diag_prime).squaredNorm();
    }
    return 0.5 * acc;
}

std::pair<DensityMatrix, SolverReport> reconstruct_state(const Eigen::VectorXd& overlaps,
                                                         const CoefficientMatrix& c,
                                                         const SolverConfig& cfg) {
    if (overlaps.size() != c.rows())
        throw DimensionMismatch("reconstruct_state: overlap count differs from matrix rows");
    if (!overlaps.allFinite()) throw InvalidSpec("reconstruct_state: overlaps must be finite");
    const int d = c.dim;

    AdmmProblem prob{Eigen::MatrixXd(), overlaps, nullptr, RealLayout(d), Eigen::VectorXd()};
    prob.a = realify_overlap_matrix(c, prob.lay);
    prob.project = [&prob](const Eigen::VectorXd& v) {
        return prob.lay.to_vec(project_psd_trace_one(prob.lay.to_herm(v)).mat);
    };
    prob.z0 = prob.lay.to_vec(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));

    // Underdetermined data at gamma = 0: a vanishing-damping pre-solve pins the
    // minimum-norm optimum before the final polish, keeping the output a
    // deterministic function of the data alone.
    Eigen::VectorXd z;
    SolverReport rep;
    if (cfg.gamma == 0.0 && c.rows() < d * d) {
        SolverConfig pre = cfg;
        pre.max_iterations = std::min(cfg.max_iterations, 2000);
        pre.record_history = false;
        Eigen::VectorXd z_pre;
        run_admm(prob, pre, 1e-8, &z_pre);
        prob.z0 = z_pre;
    }
    rep = run_admm(prob, cfg, cfg.gamma, &z);

    DensityMatrix out(prob.lay.to_herm(z));
    rep.min_eigenvalue = out.min_eigenvalue();
    rep.trace_error = out.trace_error();
    rep.objective = reconstruction_objective(overlaps, c, out, cfg.gamma);
    return {std::move(out), std::move(rep)};
}

std::pair<DensityMatrix, SolverReport> compensate_loss(const DensityMatrix& rho_prime,
                                                       const LossModel& loss,
                                                       const SolverConfig& cfg,
                                                       Warnings* warnings) {
    if (loss.eta <= 0.0 || loss.eta > 1.0)
        throw InvalidSpec("compensate_loss: eta must be in (0, 1]");
    if (rho_prime.hermiticity_error() > 1e-6)
        throw NonPhysicalInput("compensate_loss: input is far from Hermitian");

    DensityMatrix input(symmetrized(rho_prime.mat));
    double tr = input.mat.trace().real();
    if (std::abs(tr - 1.0) > 1e-2)
        throw NonPhysicalInput("compensate_loss: input trace far from 1");
    if (std::abs(tr - 1.0) > 1e-6) {
        input.mat /= tr;
        if (warnings)
            warnings->push_back("compensate_loss: input renormalized (trace " +
                                std::to_string(tr) + ")");
    }
    const int d = input.dim();

    if (loss.eta == 1.0) {
        DensityMatrix out = project_psd_trace_one(input.mat);
        SolverReport rep;
        rep.converged = true;
        rep.min_eigenvalue = out.min_eigenvalue();
        rep.trace_error = out.trace_error();
        rep.objective = loss_fit_objective(input, loss, out);
        return {std::move(out), std::move(rep)};
    }

    // Diagonal caps rho_nn <= eta^{-n} rho'_nn (clamped at zero for noisy
    // inputs; the feasible set stays nonempty because the caps sum to >= 1).
    Eigen::VectorXd caps(d);
    for (int n = 0; n < d; ++n)
        caps[n] = std::max(0.0, std::pow(loss.eta, -n) * input.mat(n, n).real());

    AdmmProblem prob{Eigen::MatrixXd(), Eigen::VectorXd(), nullptr, RealLayout(d),
                     Eigen::VectorXd()};

    // Realified block map: columns are images of basis vectors under
    // "apply M^(i) along every diagonal".
    std::vector<BernoulliMap> maps;
    maps.reserve(d);
    for (int i = 0; i < d; ++i) maps.push_back(bernoulli_map(i, loss.eta, d));
    auto stack_diagonals = [&](const Eigen::MatrixXcd& h) {
        Eigen::VectorXd out(d * d);
        int row = 0;
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXcd diag(d - i);
            for (int j = 0; j < d - i; ++j) diag[j] = h(j, j + i);
            Eigen::VectorXcd mapped = maps[i].matrix * diag;
            for (int j = 0; j < d - i; ++j) out[row++] = mapped[j].real();
            if (i > 0)
                for (int j = 0; j < d - i; ++j) out[row++] = mapped[j].imag();
        }
        return out;
    };
    prob.a.resize(d * d, prob.lay.size());
    for (int k = 0; k < prob.lay.size(); ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(prob.lay.size());
        e[k] = 1.0;
        prob.a.col(k) = stack_diagonals(prob.lay.to_herm(e));
    }
    {
        int row = 0;
        prob.b.resize(d * d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d - i; ++j) prob.b[row++] = input.mat(j, j + i).real();
            if (i > 0)
                for (int j = 0; j < d - i; ++j) prob.b[row++] = input.mat(j, j + i).imag();
        }
    }

    // Dykstra alternation between {PSD, trace 1} and the diagonal box.
    prob.project = [&prob, &caps](const Eigen::VectorXd& v) {
        Eigen::MatrixXcd y = prob.lay.to_herm(v);
        Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(y.rows(), y.cols());
        Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(y.rows(), y.cols());
        Eigen::MatrixXcd y1, y2 = y;
        for (int it = 0; it < 100; ++it) {
            y1 = project_psd_trace_one(y + p).mat;
            p = y + p - y1;
            y2 = y1 + q;
            for (int n = 0; n < y2.rows(); ++n)
                y2(n, n) = std::min(y2(n, n).real(), caps[n]);
            q = y1 + q - y2;
            double gap = (y1 - y2).cwiseAbs().maxCoeff();
            y = y2;
            if (gap < 1e-12) break;
        }
        return prob.lay.to_vec(y2);
    };

    Eigen::VectorXd diag0 = project_simplex(caps.cwiseMin(1.0));
    Eigen::MatrixXcd init = Eigen::MatrixXcd::Zero(d, d);
    for (int n = 0; n < d; ++n) init(n, n) = diag0[n];
    prob.z0 = prob.lay.to_vec(init);

    Eigen::VectorXd z;
    SolverReport rep = run_admm(prob, cfg, 0.0, &z);
    DensityMatrix out(prob.lay.to_herm(z));
    rep.min_eigenvalue = out.min_eigenvalue();
    rep.trace_error = out.trace_error();
    rep.objective = loss_fit_objective(input, loss, out);
    return {std::move(out), std::move(rep)};
}

}  // namespace qtomo
