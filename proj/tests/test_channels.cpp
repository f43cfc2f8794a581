#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "oracles.hpp"
#include "qtomo/channels.hpp"

using namespace qtomo;

TEST_CASE("loss on a single photon") {
    DensityMatrix f1 = fock_state(1, 4);
    DensityMatrix out = apply_loss(f1, LossModel{0.5});
    CHECK(out.mat(0, 0).real() == doctest::Approx(0.5));
    CHECK(out.mat(1, 1).real() == doctest::Approx(0.5));
    CHECK(out.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unit transmission is the identity channel") {
    std::mt19937_64 gen(3);
    DensityMatrix rho = oracles::random_state(6, gen);
    DensityMatrix out = apply_loss(rho, LossModel{1.0});
    CHECK((out.mat - rho.mat).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("coherent states stay coherent under loss") {
    cplx alpha(0.7, -0.4);
    double eta = 0.6;
    DensityMatrix in = build_state(StateSpec::coherent(alpha, 18));
    DensityMatrix out = apply_loss(in, LossModel{eta});
    DensityMatrix expect = build_state(StateSpec::coherent(std::sqrt(eta) * alpha, 18));
    CHECK((out.mat - expect.mat).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("loss preserves trace and positivity on random states") {
    std::mt19937_64 gen(17);
    for (int rep = 0; rep < 8; ++rep) {
        int dim = 3 + static_cast<int>(gen() % 10);
        DensityMatrix rho = oracles::random_state(dim, gen);
        DensityMatrix out = apply_loss(rho, LossModel{0.35 + 0.1 * (rep % 6)});
        CHECK(std::abs(out.trace().real() - 1.0) < 1e-10);
        CHECK(out.min_eigenvalue() >= -1e-10);
    }
}

TEST_CASE("loss composition law") {
    std::mt19937_64 gen(29);
    DensityMatrix rho = oracles::random_state(8, gen);
    DensityMatrix a = apply_loss(apply_loss(rho, LossModel{0.8}), LossModel{0.6});
    DensityMatrix b = apply_loss(rho, LossModel{0.48});
    CHECK((a.mat - b.mat).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("bernoulli map entries") {
    BernoulliMap identity = bernoulli_map(0, 1.0, 4);
    CHECK((identity.matrix - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-14);

    BernoulliMap half = bernoulli_map(0, 0.5, 2);
    CHECK(half.matrix(0, 0) == doctest::Approx(1.0));
    CHECK(half.matrix(0, 1) == doctest::Approx(0.5));
    CHECK(half.matrix(1, 0) == doctest::Approx(0.0));
    CHECK(half.matrix(1, 1) == doctest::Approx(0.5));

    // diagonal entries eta^(i/2 + j)
    BernoulliMap m2 = bernoulli_map(2, 0.7, 6);
    for (int j = 0; j < 4; ++j)
        CHECK(m2.matrix(j, j) == doctest::Approx(std::pow(0.7, 1.0 + j)).epsilon(1e-12));
}

TEST_CASE("main-diagonal map reproduces apply_loss") {
    DensityMatrix f1 = fock_state(1, 4);
    BernoulliMap m0 = bernoulli_map(0, 0.5, 4);
    Eigen::VectorXd diag(4);
    for (int n = 0; n < 4; ++n) diag[n] = f1.mat(n, n).real();
    Eigen::VectorXd mapped = m0.matrix * diag;
    DensityMatrix lossy = apply_loss(f1, LossModel{0.5});
    for (int n = 0; n < 4; ++n)
        CHECK(mapped[n] == doctest::Approx(lossy.mat(n, n).real()).epsilon(1e-12));
}

namespace {

using bigfloat = boost::multiprecision::cpp_bin_float_50;

// Replica of the map entries in 50-digit arithmetic. The product
// M(eta) M(1/eta) cancels terms of order 1e11 at eta = 0.3, n_max = 20, which
// is beyond double precision, so the inversion identity at the corner
// parameters is certified here and the double-precision entries are checked
// against this reference.
bigfloat bernoulli_entry_mp(int i, int j, int k, bigfloat eta) {
    if (j > k) return 0;
    bigfloat binom = 1;
    for (int s = 0; s < k - j; ++s)
        binom *= bigfloat(k - s) * bigfloat(i + k - s) / ((s + 1) * bigfloat(s + 1));
    return sqrt(binom) * pow(1 - eta, k - j) * pow(eta, bigfloat(i) / 2 + j);
}

}  // namespace

TEST_CASE("bernoulli map inverts at reciprocal transmission") {
    // double precision, where the product is well conditioned
    for (double eta : {0.75, 0.9, 1.0})
        for (int i : {0, 1, 3}) {
            BernoulliMap fwd = bernoulli_map(i, eta, 20);
            BernoulliMap bwd = bernoulli_map(i, 1.0 / eta, 20);
            Eigen::MatrixXd prod = fwd.matrix * bwd.matrix;
            CHECK((prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols()))
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
        }
    for (double eta : {0.3, 0.5})
        for (int i : {0, 2}) {
            BernoulliMap fwd = bernoulli_map(i, eta, 10);
            BernoulliMap bwd = bernoulli_map(i, 1.0 / eta, 10);
            Eigen::MatrixXd prod = fwd.matrix * bwd.matrix;
            CHECK((prod - Eigen::MatrixXd::Identity(prod.rows(), prod.cols()))
                      .cwiseAbs()
                      .maxCoeff() < 1e-9);
        }

    // extended precision at the strong-loss corner
    for (double eta_d : {0.3, 0.5})
        for (int i : {0, 1}) {
            const int n = 20 - i;
            bigfloat eta = eta_d;
            std::vector<bigfloat> fwd(n * n), bwd(n * n);
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    fwd[j * n + k] = bernoulli_entry_mp(i, j, k, eta);
                    bwd[j * n + k] = bernoulli_entry_mp(i, j, k, 1 / eta);
                }
            bigfloat worst = 0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    bigfloat acc = 0;
                    for (int l = 0; l < n; ++l) acc += fwd[j * n + l] * bwd[l * n + k];
                    bigfloat target = (j == k) ? 1 : 0;
                    worst = std::max(worst, static_cast<bigfloat>(abs(acc - target)));
                }
            CHECK(static_cast<double>(worst) < 1e-30);

            // shipped double entries match the reference to relative 1e-12
            BernoulliMap m = bernoulli_map(i, eta_d, 20);
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double ref = static_cast<double>(fwd[j * n + k]);
                    CHECK(m.matrix(j, k) ==
                          doctest::Approx(ref).epsilon(1e-12).scale(std::abs(ref) + 1e-30));
                }
        }
}

TEST_CASE("analytic inversion: two-level anchor") {
    Eigen::MatrixXcd half = Eigen::MatrixXcd::Zero(2, 2);
    half(0, 0) = 0.5;
    half(1, 1) = 0.5;
    LossInversionResult res = analytic_loss_invert(DensityMatrix(half), LossModel{0.5});
    CHECK(std::abs(res.state.mat(0, 0)) < 1e-12);
    CHECK(res.state.mat(1, 1).real() == doctest::Approx(1.0));
    CHECK(res.physical);
}

TEST_CASE("analytic inversion: noiseless round trip on a cat state") {
    DensityMatrix cat = build_state(StateSpec::cat(cplx(std::sqrt(3.0), 0), 20));
    DensityMatrix lossy = apply_loss(cat, LossModel{0.7});
    LossInversionResult res = analytic_loss_invert(lossy, LossModel{0.7});
    CHECK(trace_distance(DensityMatrix(res.state.mat), cat) < 1e-8);
}

TEST_CASE("analytic inversion magnifies small perturbations into unphysical output") {
    DensityMatrix cat = build_state(StateSpec::cat(cplx(std::sqrt(3.0), 0), 20));
    DensityMatrix lossy = apply_loss(cat, LossModel{0.7});
    std::mt19937_64 gen(20200521);
    std::normal_distribution<double> noise(0.0, 1e-3);
    Eigen::MatrixXcd noisy = lossy.mat;
    for (int n = 0; n < 20; ++n)
        for (int m = 0; m < 20; ++m) noisy(n, m) += cplx(noise(gen), noise(gen));
    noisy = ((noisy + noisy.adjoint()) / 2.0).eval();
    LossInversionResult res = analytic_loss_invert(DensityMatrix(noisy, false), LossModel{0.7});
    CHECK(res.min_eigenvalue < -0.01);
    CHECK_FALSE(res.physical);
}

TEST_CASE("mode mismatch convolution") {
    std::vector<double> p = {0.25, 0.5, 0.25};

    SUBCASE("perfect overlap is the identity") {
        std::vector<double> out = mode_mismatch_convolve(p, ModeMatch{1.0, 0.0});
        CHECK(out == p);
    }

    SUBCASE("vacuum input gives the Poisson background") {
        std::vector<double> delta0 = {1.0};
        double lambda = 0.3;
        std::vector<double> out = mode_mismatch_convolve(delta0, ModeMatch{0.5, lambda});
        for (int n = 0; n < 5; ++n) {
            double expect = std::exp(-lambda) * std::pow(lambda, n) / std::tgamma(n + 1.0);
            CHECK(out[n] == doctest::Approx(expect).epsilon(1e-9));
        }
    }

    SUBCASE("paper-scale background intensity") {
        ModeMatch mm = ModeMatch::for_probe(0.83, cplx(0.339, 0));
        CHECK(mm.alpha_perp_intensity == doctest::Approx((1 - 0.83) * 0.339 * 0.339));
        CHECK(mm.alpha_perp_intensity == doctest::Approx(0.0195).epsilon(2e-3));
    }

    SUBCASE("total probability is conserved within 1e-9") {
        std::mt19937_64 gen(41);
        for (double lambda : {0.05, 0.4, 1.0}) {
            std::vector<double> q(12);
            double s = 0;
            for (auto& v : q) s += (v = oracles::random_amplitude(1.0, gen).real() + 1.001);
            for (auto& v : q) v /= s;
            std::vector<double> out = mode_mismatch_convolve(q, ModeMatch{0.5, lambda});
            double total = 0;
            for (double v : out) total += v;
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        }
    }

    SUBCASE("parity is multiplied by exp(-2 lambda)") {
        double lambda = 0.17;
        std::vector<double> out = mode_mismatch_convolve(p, ModeMatch{0.8, lambda});
        double parity_in = p[0] - p[1] + p[2];
        double parity_out = 0;
        for (std::size_t n = 0; n < out.size(); ++n)
            parity_out += (n % 2 == 0 ? 1.0 : -1.0) * out[n];
        CHECK(parity_out == doctest::Approx(parity_in * std::exp(-2 * lambda)).epsilon(1e-9));
    }
}

TEST_CASE("mode mismatch deconvolution") {
    SUBCASE("round trip is the identity") {
        std::mt19937_64 gen(43);
        for (int rep = 0; rep < 6; ++rep) {
            std::vector<double> q(10);
            double s = 0;
            for (auto& v : q) s += (v = oracles::random_amplitude(1.0, gen).real() + 1.001);
            for (auto& v : q) v /= s;
            ModeMatch mm{0.83, 0.25};
            DeconvolutionResult res = mode_mismatch_deconvolve(mode_mismatch_convolve(q, mm), mm);
            for (std::size_t i = 0; i < q.size(); ++i)
                CHECK(res.cleaned[i] == doctest::Approx(q[i]).epsilon(1e-9).scale(1.0));
        }
    }

    SUBCASE("poisson input collapses to vacuum") {
        double lambda = 0.4;
        std::vector<double> pois(18);
        pois[0] = std::exp(-lambda);
        for (int n = 1; n < 18; ++n) pois[n] = pois[n - 1] * lambda / n;
        DeconvolutionResult res = mode_mismatch_deconvolve(pois, ModeMatch{0.5, lambda});
        CHECK(res.cleaned[0] == doctest::Approx(1.0).epsilon(1e-9));
        for (int n = 1; n < 18; ++n) CHECK(std::abs(res.cleaned[n]) < 1e-9);
    }

    SUBCASE("negative artifacts: clipped output, raw kept, warning emitted") {
        std::vector<double> measured = {0.9, 0.002, 0.098};  // inconsistent with the kernel
        Warnings w;
        DeconvolutionResult res = mode_mismatch_deconvolve(measured, ModeMatch{0.5, 0.3}, &w);
        CHECK(res.had_negative);
        CHECK(w.size() == 1);
        double total = 0;
        for (double v : res.cleaned) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        bool raw_negative = false;
        for (double v : res.raw) raw_negative |= (v < -1e-6);
        CHECK(raw_negative);
    }
}
