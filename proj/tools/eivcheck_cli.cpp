// eivcheck: lack-of-fit tests for single-index errors-in-variables
// regression with validation data, plus a Monte Carlo study runner.
//
// Exit codes: 0 success, 2 input/data error, 3 internal numerical error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eivcheck/dgp.hpp"
#include "eivcheck/errors.hpp"
#include "eivcheck/io.hpp"
#include "eivcheck/mc.hpp"
#include "eivcheck/teststat.hpp"

namespace {

using namespace eivcheck;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) values.push_back(std::stod(item));
    if (values.empty()) throw InvalidConfig("empty list: " + text);
    return values;
}

// start:end:step inclusive grid, or a plain comma list.
std::vector<double> parse_grid(const std::string& text) {
    if (text.find(':') == std::string::npos) return parse_list(text);
    std::stringstream stream(text);
    std::string part;
    std::vector<double> parts;
    while (std::getline(stream, part, ':')) parts.push_back(std::stod(part));
    if (parts.size() != 3 || parts[2] <= 0.0)
        throw InvalidConfig("grid must be start:end:step with step > 0");
    std::vector<double> values;
    for (double v = parts[0]; v <= parts[1] + 1e-12; v += parts[2]) values.push_back(v);
    return values;
}

std::vector<RegimeRequest> parse_tests(const std::string& text) {
    std::vector<RegimeRequest> tests;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) tests.push_back(regime_request_from_name(item));
    if (tests.empty()) throw InvalidConfig("empty test list");
    return tests;
}

struct SimFlags {
    std::string model = "H11";
    std::size_t p = 2;
    std::size_t n = 100;
    std::int64_t N = -1;
    double ratio = -1.0;
    std::string a = "0";
    std::string c = "1.6";
    std::size_t reps = 500;
    std::uint64_t seed = 1;
    std::string sigma = "identity";
    double sigma_u = 0.5;
    std::string tests = "split";
    std::string out = "mc_result.csv";
    std::string plots;
    std::size_t workers = 1;
    double alpha = 0.05;
    std::string critical = "literal-1.65";
};

void add_sim_flags(CLI::App* cmd, SimFlags& flags) {
    cmd->add_option("--model", flags.model, "Model id: H11..H19 or local-alt");
    cmd->add_option("--p", flags.p, "Covariate dimension (>= 1)");
    cmd->add_option("--n", flags.n, "Primary sample size");
    cmd->add_option("--N", flags.N, "Validation sample size (conflicts with --ratio)");
    cmd->add_option("--ratio", flags.ratio, "Validation/primary size ratio N = ratio*n");
    cmd->add_option("--a", flags.a, "Alternative strengths, comma list (e.g. 0,0.5)");
    cmd->add_option("--c", flags.c, "Bandwidth constants, comma list or start:end:step");
    cmd->add_option("--reps", flags.reps, "Replications per cell (>= 1)");
    cmd->add_option("--seed", flags.seed, "Master seed");
    cmd->add_option("--sigma", flags.sigma, "Covariate covariance: identity or ar03");
    cmd->add_option("--sigma-u", flags.sigma_u, "Measurement-error variance per coordinate");
    cmd->add_option("--tests", flags.tests,
                    "Comma list of regimes: auto,tilde,split,small-lambda,infinite-lambda,zheng");
    cmd->add_option("--out", flags.out, "Output CSV path");
    cmd->add_option("--plots", flags.plots, "Directory for gnuplot scripts (optional)");
    cmd->add_option("--workers", flags.workers, "Replication worker threads");
    cmd->add_option("--alpha", flags.alpha, "Significance level in (0, 0.5]");
    cmd->add_option("--critical", flags.critical,
                    "Critical value convention: normal-quantile or literal-1.65");
}

McConfig config_from_flags(const SimFlags& flags) {
    if (flags.N >= 0 && flags.ratio > 0.0)
        throw InvalidConfig("--N and --ratio are mutually exclusive");
    McConfig config;
    config.spec.model_id = model_from_name(flags.model);
    config.spec.p = static_cast<Eigen::Index>(flags.p);
    config.spec.sigma_choice =
        flags.sigma == "ar03" ? SigmaChoice::ar03 : SigmaChoice::identity;
    if (flags.sigma != "ar03" && flags.sigma != "identity")
        throw InvalidConfig("--sigma must be identity or ar03");
    config.spec.sigma_u_var = flags.sigma_u;
    config.n = flags.n;
    if (flags.N >= 0)
        config.N = static_cast<std::size_t>(flags.N);
    else if (flags.ratio > 0.0)
        config.N = static_cast<std::size_t>(flags.ratio * static_cast<double>(flags.n));
    else
        config.N = 4 * flags.n;
    config.reps = flags.reps;
    config.a_grid = parse_list(flags.a);
    config.c_grid = parse_grid(flags.c);
    config.tests = parse_tests(flags.tests);
    config.alpha = flags.alpha;
    config.seed = flags.seed;
    config.workers = flags.workers;
    if (flags.critical == "normal-quantile")
        config.convention = CriticalConvention::normal_quantile;
    else if (flags.critical == "literal-1.65")
        config.convention = CriticalConvention::literal_1_65;
    else
        throw InvalidConfig("--critical must be normal-quantile or literal-1.65");
    return config;
}

void print_summary(const McResult& result) {
    std::cout << "test      model  p  n     N     a      c      reject  failures\n";
    for (const McRow& row : result.rows) {
        std::printf("%-9s %-6s %-2zu %-5zu %-5zu %-6.3g %-6.3g %-7.4f %zu%s\n",
                    row.test.c_str(), row.model.c_str(), row.p, row.n, row.N, row.a, row.c,
                    row.reject_rate, row.failures, row.valid() ? "" : " (INVALID)");
    }
}

int run_sim_command(const SimFlags& flags, const std::string& kind) {
    McConfig config = config_from_flags(flags);
    McResult result;
    std::string x_column = "a";
    if (kind == "sweep") {
        result = bandwidth_sweep(config);
        x_column = "c";
    } else if (kind == "powercurve") {
        result = power_curve(config);
    } else {
        result = run_mc(config);
    }
    write_csv(result, flags.out);
    if (!flags.plots.empty())
        write_plot_script(result, flags.out, x_column, flags.plots + "/" + kind + ".gp");
    print_summary(result);
    std::cout << "wrote " << flags.out << "\n";
    return 0;
}

int run_test_command(const std::string& primary_path, const std::string& validation_path,
                     const std::string& link_name, double alpha, const std::string& regime,
                     double c1, double c2, const std::string& report_path) {
    const PrimarySample primary = load_primary(primary_path);
    const ValidationSample validation = load_validation(validation_path, primary.p());
    const LinkFunction link = LinkFunction::from_name(link_name);
    BandwidthPlan plan;
    plan.c1 = c1;
    plan.c2 = c2;
    const TestOutcome outcome = run_test(primary, validation, link, plan, alpha,
                                         regime_request_from_name(regime));

    std::cout.precision(10);
    std::cout << "regime:        " << regime_name(outcome.regime) << "\n"
              << "n, N, lambda:  " << primary.n() << ", " << validation.N() << ", "
              << outcome.lambda_hat << "\n"
              << "q_hat:         " << outcome.q_hat << "\n"
              << "beta_hat:      " << outcome.beta_hat.transpose() << "\n"
              << "h, v_N:        " << outcome.h << ", " << outcome.v_N << "\n"
              << "statistic:     " << outcome.raw_statistic << "\n"
              << "bias:          " << outcome.bias_hat << "\n"
              << "variance:      " << outcome.variance_hat << "\n"
              << "standardized:  " << outcome.standardized << "\n"
              << "critical:      " << outcome.critical_value << "\n"
              << "decision:      " << (outcome.reject ? "reject" : "fail to reject") << "\n";

    if (!report_path.empty()) {
        std::ofstream report(report_path);
        report.precision(17);
        report << "{\"regime\":\"" << regime_name(outcome.regime) << "\",\"n\":" << primary.n()
               << ",\"N\":" << validation.N() << ",\"lambda_hat\":" << outcome.lambda_hat
               << ",\"q_hat\":" << outcome.q_hat << ",\"h\":" << outcome.h
               << ",\"v_N\":" << outcome.v_N << ",\"statistic\":" << outcome.raw_statistic
               << ",\"bias\":" << outcome.bias_hat << ",\"variance\":" << outcome.variance_hat
               << ",\"standardized\":" << outcome.standardized
               << ",\"critical\":" << outcome.critical_value
               << ",\"reject\":" << (outcome.reject ? "true" : "false") << "}\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lack-of-fit tests for single-index errors-in-variables regression"};
    app.require_subcommand(1);

    // test
    auto* test_cmd = app.add_subcommand("test", "Run the test on user-supplied CSV data");
    std::string primary_path, validation_path, report_path;
    std::string link_name = "linear", regime = "auto";
    double alpha = 0.05, c1 = 1.6, c2 = 1.6;
    test_cmd->add_option("--primary", primary_path, "Primary sample CSV (y,w1..wp)")->required();
    test_cmd->add_option("--validation", validation_path, "Validation CSV (w1..wp,x1..xp)")
        ->required();
    test_cmd->add_option("--link", link_name, "Null link: linear or cubic");
    test_cmd->add_option("--alpha", alpha, "Significance level in (0, 0.5]");
    test_cmd->add_option("--regime", regime,
                         "auto, tilde, split, small-lambda, infinite-lambda, or zheng");
    test_cmd->add_option("--c1", c1, "Bandwidth constant for h (> 0)");
    test_cmd->add_option("--c2", c2, "Bandwidth constant for v_N (> 0)");
    test_cmd->add_option("--report", report_path, "Optional JSON-lines report path");

    // simulate / sweep / powercurve
    SimFlags sim_flags, sweep_flags, power_flags;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo size/power cells");
    add_sim_flags(sim_cmd, sim_flags);
    auto* sweep_cmd = app.add_subcommand("sweep", "Empirical size across a bandwidth grid");
    add_sim_flags(sweep_cmd, sweep_flags);
    auto* power_cmd = app.add_subcommand("powercurve", "Power across the a grid");
    add_sim_flags(power_cmd, power_flags);

    // generate
    SimFlags gen_flags;
    std::string out_primary = "primary.csv", out_validation = "validation.csv";
    double gen_a = 0.0;
    auto* gen_cmd = app.add_subcommand("generate", "Write one synthetic dataset to CSV");
    add_sim_flags(gen_cmd, gen_flags);
    gen_cmd->add_option("--a-value", gen_a, "Alternative strength for the dataset");
    gen_cmd->add_option("--out-primary", out_primary, "Primary CSV output path");
    gen_cmd->add_option("--out-validation", out_validation, "Validation CSV output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (test_cmd->parsed())
            return run_test_command(primary_path, validation_path, link_name, alpha, regime, c1,
                                    c2, report_path);
        if (sim_cmd->parsed()) return run_sim_command(sim_flags, "simulate");
        if (sweep_cmd->parsed()) return run_sim_command(sweep_flags, "sweep");
        if (power_cmd->parsed()) return run_sim_command(power_flags, "powercurve");
        if (gen_cmd->parsed()) {
            McConfig config = config_from_flags(gen_flags);
            config.spec.a = gen_a;
            const GeneratedData data =
                generate(config.spec, config.n, config.N, gen_flags.seed);
            save_primary(data.primary, out_primary);
            save_validation(data.validation, out_validation);
            std::cout << "wrote " << out_primary << " and " << out_validation << "\n";
            return 0;
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NonFiniteValue& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const UnknownModel& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
