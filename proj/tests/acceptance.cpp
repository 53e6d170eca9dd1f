// Acceptance gate: end-to-end statistical checks at desk scale. Each
// criterion prints exactly one PASS/FAIL line; the exit status is the
// number of failed criteria.

#include <cmath>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "eivcheck/calibrate.hpp"
#include "eivcheck/dgp.hpp"
#include "eivcheck/estimators.hpp"
#include "eivcheck/kernels.hpp"
#include "eivcheck/mc.hpp"
#include "eivcheck/rng.hpp"
#include "eivcheck/sdr.hpp"
#include "eivcheck/teststat.hpp"

using namespace eivcheck;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", idx, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::size_t worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 4 : hw;
}

McConfig base_config(ModelId model, Eigen::Index p, std::size_t n, std::size_t N,
                     std::size_t reps) {
    McConfig config;
    config.spec.model_id = model;
    config.spec.p = p;
    config.n = n;
    config.N = N;
    config.reps = reps;
    config.workers = worker_count();
    config.convention = CriticalConvention::literal_1_65;
    config.seed = 20260826;
    return config;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return buf;
}

// ---- criterion 7 helpers: independently coded double-loop oracles ----

double quartic(double u) {
    if (std::abs(u) > 1.0) return 0.0;
    const double t = 1.0 - u * u;
    return 15.0 / 16.0 * t * t;
}

double kern(const Matrix& za, int i, const Matrix& zb, int j, double h, bool squared) {
    double prod = 1.0;
    for (int k = 0; k < za.cols(); ++k) {
        const double kv = quartic((za(i, k) - zb(j, k)) / h);
        prod *= squared ? kv * kv : kv;
    }
    return prod / std::pow(h, static_cast<double>(za.cols()));
}

void criterion_size_p2() {
    McConfig config = base_config(ModelId::H11, 2, 100, 400, 500);
    config.a_grid = {0.0};
    const McRow row = run_mc(config).rows.front();
    const bool pass = row.valid() && std::abs(row.reject_rate - 0.0455) <= 0.030;
    report(1, pass, "H11 p=2 n=100 size " + fmt(row.reject_rate) + " (target 0.0455 +- 0.030)");
}

void criterion_power() {
    McConfig config = base_config(ModelId::H11, 2, 200, 800, 500);
    config.a_grid = {0.5};
    const McRow row = run_mc(config).rows.front();
    const bool pass = row.valid() && row.reject_rate >= 0.90;
    report(2, pass, "H11 p=2 n=200 a=0.5 power " + fmt(row.reject_rate) + " (>= 0.90)");
}

void criterion_dimension_robustness() {
    McConfig config8 = base_config(ModelId::H11, 8, 100, 400, 500);
    config8.a_grid = {0.0};
    const McRow size8 = run_mc(config8).rows.front();
    bool pass = size8.valid() && std::abs(size8.reject_rate - 0.042) <= 0.030;

    McConfig sweep2 = base_config(ModelId::H11, 2, 100, 400, 300);
    sweep2.a_grid = {0.0};
    sweep2.c_grid = {1.0, 1.6, 2.0};
    McConfig sweep8 = sweep2;
    sweep8.spec.p = 8;
    const McResult curve2 = bandwidth_sweep(sweep2);
    const McResult curve8 = bandwidth_sweep(sweep8);
    double sup_gap = 0.0;
    for (std::size_t i = 0; i < curve2.rows.size(); ++i)
        sup_gap = std::max(sup_gap,
                           std::abs(curve2.rows[i].reject_rate - curve8.rows[i].reject_rate));
    pass = pass && sup_gap <= 0.05;
    report(3, pass, "p=8 size " + fmt(size8.reject_rate) + " (0.042 +- 0.030), p2-vs-p8 sup gap " +
                        fmt(sup_gap) + " (<= 0.05)");
}

void criterion_zheng_gap() {
    McConfig config = base_config(ModelId::H11, 8, 100, 400, 300);
    config.a_grid = {0.3};
    config.tests = {RegimeRequest::split, RegimeRequest::zheng};
    const McResult result = run_mc(config);
    const double gap = result.rows[0].reject_rate - result.rows[1].reject_rate;
    report(4, gap >= 0.05, "H11 p=8 a=0.3 power(Tn)-power(TnZh) = " + fmt(gap) + " (>= 0.05)");
}

void criterion_directionality() {
    McConfig config = base_config(ModelId::H15, 4, 200, 800, 300);
    config.a_grid = {0.0, 0.5};
    const McResult result = run_mc(config);
    const double size = result.rows[0].reject_rate;
    const double power = result.rows[1].reject_rate;
    const bool pass = power >= 0.20 && std::abs(size - 0.05) <= 0.03;
    report(5, pass, "H15 p=4 power " + fmt(power) + " (>= 0.20), size " + fmt(size) +
                        " (0.05 +- 0.03)");
}

void criterion_regimes() {
    McConfig config = base_config(ModelId::H11, 2, 100, 400, 500);
    config.a_grid = {0.0};
    config.tests = {RegimeRequest::split, RegimeRequest::infinite_lambda};
    const McResult result = run_mc(config);
    const double tn = result.rows[0].reject_rate;
    const double tn2 = result.rows[1].reject_rate;
    const bool pass = std::abs(tn - 0.0525) <= 0.03 && std::abs(tn2 - 0.0610) <= 0.03;
    report(6, pass, "lambda=4 sizes Tn " + fmt(tn) + " (0.0525 +- 0.03), Tn2 " + fmt(tn2) +
                        " (0.0610 +- 0.03)");
}

void criterion_oracles() {
    SplitRng rng(4242);
    double worst = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
        const int q = 1 + static_cast<int>(rng.next_u64() % 2);
        const int n = 5 + static_cast<int>(rng.next_u64() % 46);
        const int half = 3 + static_cast<int>(rng.next_u64() % 23);
        const int N = 2 * half;
        Vector e(n), e1(n), e2(n), eta(N);
        Matrix z(n, q), zt(N, q);
        for (int i = 0; i < n; ++i) {
            e(i) = rng.next_normal();
            e1(i) = rng.next_normal();
            e2(i) = rng.next_normal();
            for (int k = 0; k < q; ++k) z(i, k) = rng.next_normal();
        }
        for (int s = 0; s < N; ++s) {
            eta(s) = rng.next_normal();
            for (int k = 0; k < q; ++k) zt(s, k) = rng.next_normal();
        }
        const double h = 0.4 + rng.next_uniform();
        const Vector eta1 = eta.head(half), eta2 = eta.tail(half);

        double ovt = 0.0, ovs = 0.0;
        TildePlugins op;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                ovt += e(i) * kern(z, i, z, j, h, false) * e(j);
                ovs += e1(i) * kern(z, i, z, j, h, false) * e2(j);
                op.tau1 += kern(z, i, z, j, h, true) * e(i) * e(i) * e(j) * e(j);
            }
        ovt /= static_cast<double>(n) * (n - 1);
        ovs /= static_cast<double>(n) * (n - 1);
        op.tau1 *= 2.0 / (static_cast<double>(n) * (n - 1));
        for (int i = 0; i < n; ++i)
            for (int s = 0; s < N; ++s)
                op.tau2 += kern(z, i, zt, s, h, true) * e(i) * e(i) * eta(s) * eta(s);
        op.tau2 /= static_cast<double>(n) * N;
        for (int s = 0; s < N; ++s)
            for (int t = 0; t < N; ++t)
                if (t != s)
                    op.tau3 += kern(zt, s, zt, t, h, true) * eta(s) * eta(s) * eta(t) * eta(t);
        op.tau3 *= 2.0 / (static_cast<double>(N) * (N - 1));
        op.mu = std::pow(quartic(0.0), q) * eta.squaredNorm() /
                (static_cast<double>(N) * N * h);

        const TildePlugins got = variance_plugins_tilde(e, eta, z, zt, h, q);
        worst = std::max({worst, std::abs(v_tilde(e, z, h) - ovt),
                          std::abs(v_split(e1, e2, z, h) - ovs),
                          std::abs(got.tau1 - op.tau1), std::abs(got.tau2 - op.tau2),
                          std::abs(got.tau3 - op.tau3), std::abs(got.mu - op.mu)});
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", worst);
    report(7, worst < 1e-10, std::string("statistic-vs-oracle sup error ") + buf + " (< 1e-10)");
}

void criterion_sdr() {
    ModelSpec null_spec;
    null_spec.model_id = ModelId::H11;
    null_spec.p = 2;
    const Vector beta = null_spec.beta();
    int q1 = 0;
    double cos_sum = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const GeneratedData data = generate(null_spec, 200, 800, 900 + rep);
        const SdrEstimate sdr = estimate_B(data.primary, data.validation);
        if (sdr.q_hat == 1) ++q1;
        cos_sum += std::abs(sdr.B_hat.col(0).dot(beta)) / (sdr.B_hat.col(0).norm() * beta.norm());
    }
    const double q1_freq = q1 / 200.0;
    const double mean_cos = cos_sum / 200.0;

    ModelSpec alt_spec;
    alt_spec.model_id = ModelId::H14;
    alt_spec.p = 4;
    alt_spec.a = 1.0;
    int q2 = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const GeneratedData data = generate(alt_spec, 400, 1600, 1700 + rep);
        if (estimate_B(data.primary, data.validation).q_hat == 2) ++q2;
    }
    const double q2_freq = q2 / 200.0;
    const bool pass = q1_freq >= 0.90 && mean_cos >= 0.95 && q2_freq >= 0.60;
    report(8, pass, "null q=1 freq " + fmt(q1_freq) + " (>= 0.90), mean|cos| " + fmt(mean_cos) +
                        " (>= 0.95), H14 q=2 freq " + fmt(q2_freq) + " (>= 0.60)");
}

void criterion_beta_rate() {
    ModelSpec spec;
    spec.model_id = ModelId::H11;
    spec.p = 2;
    const Vector beta = spec.beta();
    const std::vector<std::size_t> sizes = {100, 200, 400};
    std::vector<double> log_n, log_rmse;
    for (std::size_t n : sizes) {
        double mse = 0.0;
        const int reps = 200;
        for (int rep = 0; rep < reps; ++rep) {
            const GeneratedData data = generate(spec, n, 4 * n, 50 + rep);
            const BetaEstimate est =
                estimate_beta(data.primary, data.validation, spec.link_for_null());
            mse += (est.beta_hat - beta).squaredNorm();
        }
        log_n.push_back(std::log(static_cast<double>(n)));
        log_rmse.push_back(0.5 * std::log(mse / reps));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        mx += log_n[i];
        my += log_rmse[i];
    }
    mx /= log_n.size();
    my /= log_n.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        num += (log_n[i] - mx) * (log_rmse[i] - my);
        den += (log_n[i] - mx) * (log_n[i] - mx);
    }
    const double slope = num / den;
    report(9, slope > -0.7 && slope < -0.3,
           "log-RMSE slope of beta-hat " + fmt(slope) + " (in (-0.7, -0.3))");
}

void criterion_invariants() {
    int failures = 0;
    auto expect = [&](bool ok) { failures += ok ? 0 : 1; };

    // Kernel identities by Simpson quadrature.
    const KernelSpec spec{};
    const int m = 20000;
    double mass = 0.0, square = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double u = -1.0 + 2.0 * i / m;
        const double wgt = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        mass += wgt * kernel_eval(spec, u);
        const double k = kernel_eval(spec, u);
        square += wgt * k * k;
    }
    mass *= 2.0 / (3.0 * m);
    square *= 2.0 / (3.0 * m);
    expect(std::abs(mass - 1.0) < 1e-10);
    expect(std::abs(square - kernel_square_integral(spec)) < 1e-10);
    expect(kernel_eval(spec, 0.3) == kernel_eval(spec, -0.3));

    // Permutation invariance and homogeneity of the quadratic forms.
    SplitRng rng(77);
    const int n = 20;
    Vector e(n);
    Matrix z(n, 1);
    for (int i = 0; i < n; ++i) {
        e(i) = rng.next_normal();
        z(i, 0) = rng.next_normal();
    }
    Vector pe(n);
    Matrix pz(n, 1);
    for (int i = 0; i < n; ++i) {
        pe(i) = e(n - 1 - i);
        pz(i, 0) = z(n - 1 - i, 0);
    }
    expect(std::abs(v_tilde(e, z, 0.9) - v_tilde(pe, pz, 0.9)) < 1e-12);
    expect(std::abs(v_tilde(2.0 * e, z, 0.9) - 4.0 * v_tilde(e, z, 0.9)) < 1e-12);

    // Determinism of the generator and of the harness across worker counts.
    ModelSpec model;
    model.model_id = ModelId::H12;
    model.p = 2;
    const GeneratedData d1 = generate(model, 30, 60, 4);
    const GeneratedData d2 = generate(model, 30, 60, 4);
    expect(d1.primary.y == d2.primary.y && d1.validation.w_tilde == d2.validation.w_tilde);

    McConfig config = base_config(ModelId::H11, 2, 40, 160, 8);
    config.a_grid = {0.0};
    config.workers = 1;
    const McResult serial = run_mc(config);
    config.workers = 3;
    const McResult parallel = run_mc(config);
    expect(serial.rows[0].reject_rate == parallel.rows[0].reject_rate &&
           serial.rows[0].mean_stat == parallel.rows[0].mean_stat);

    report(10, failures == 0,
           "invariant suite failures: " + std::to_string(failures) + " (== 0)");
}

}  // namespace

int main() {
    criterion_size_p2();
    criterion_power();
    criterion_dimension_robustness();
    criterion_zheng_gap();
    criterion_directionality();
    criterion_regimes();
    criterion_oracles();
    criterion_sdr();
    criterion_beta_rate();
    criterion_invariants();
    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures;
}
