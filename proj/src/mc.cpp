#include "eivcheck/mc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <thread>

#include "eivcheck/errors.hpp"

namespace eivcheck {

namespace {

struct RepOutcome {
    bool ok = false;
    bool reject = false;
    double stat = 0.0;
};

RepOutcome one_replication(const McConfig& config, double a, double c,
                           RegimeRequest request, std::uint64_t rep_seed) {
    RepOutcome out;
    try {
        ModelSpec spec = config.spec;
        spec.a = a;
        const GeneratedData data = generate(spec, config.n, config.N, rep_seed);
        BandwidthPlan plan;
        plan.c1 = c;
        plan.c2 = c;
        const TestOutcome result =
            run_test(data.primary, data.validation, spec.link_for_null(), plan, config.alpha,
                     request, config.convention);
        out.ok = true;
        out.reject = result.reject;
        out.stat = result.standardized;
    } catch (const std::exception&) {
        out.ok = false;
    }
    return out;
}

}  // namespace

std::string regime_request_name(RegimeRequest request) {
    switch (request) {
        case RegimeRequest::auto_select: return "auto";
        case RegimeRequest::tilde: return "tilde";
        case RegimeRequest::split: return "Tn";
        case RegimeRequest::small_lambda: return "Tn1";
        case RegimeRequest::infinite_lambda: return "Tn2";
        case RegimeRequest::zheng: return "TnZh";
    }
    return "?";
}

McResult run_mc(const McConfig& config) {
    if (config.reps < 1 || config.a_grid.empty() || config.c_grid.empty() ||
        config.tests.empty())
        throw InvalidConfig("run_mc: reps >= 1 and nonempty grids required");

    McResult result;
    for (std::size_t a_idx = 0; a_idx < config.a_grid.size(); ++a_idx) {
        for (std::size_t c_idx = 0; c_idx < config.c_grid.size(); ++c_idx) {
            for (RegimeRequest request : config.tests) {
                std::vector<RepOutcome> outcomes(config.reps);
                auto worker = [&](std::size_t begin, std::size_t end) {
                    for (std::size_t r = begin; r < end; ++r) {
                        const std::uint64_t rep_seed = SplitRng::derive(
                            config.seed,
                            {static_cast<std::uint64_t>(config.spec.model_id), a_idx, c_idx, r});
                        outcomes[r] = one_replication(config, config.a_grid[a_idx],
                                                      config.c_grid[c_idx], request, rep_seed);
                    }
                };
                const std::size_t workers = std::max<std::size_t>(1, config.workers);
                if (workers == 1) {
                    worker(0, config.reps);
                } else {
                    std::vector<std::thread> pool;
                    const std::size_t chunk = (config.reps + workers - 1) / workers;
                    for (std::size_t w = 0; w < workers; ++w) {
                        const std::size_t begin = w * chunk;
                        const std::size_t end = std::min(config.reps, begin + chunk);
                        if (begin < end) pool.emplace_back(worker, begin, end);
                    }
                    for (auto& t : pool) t.join();
                }

                McRow row;
                row.test = regime_request_name(request);
                row.model = model_name(config.spec.model_id);
                row.p = static_cast<std::size_t>(config.spec.p);
                row.n = config.n;
                row.N = config.N;
                row.a = config.a_grid[a_idx];
                row.c = config.c_grid[c_idx];
                row.reps = config.reps;
                std::size_t rejects = 0, ok = 0;
                double sum = 0.0, sum_sq = 0.0;
                for (const RepOutcome& o : outcomes) {
                    if (!o.ok) {
                        ++row.failures;
                        continue;
                    }
                    ++ok;
                    rejects += o.reject ? 1 : 0;
                    sum += o.stat;
                    sum_sq += o.stat * o.stat;
                }
                if (ok > 0) {
                    row.reject_rate = static_cast<double>(rejects) / static_cast<double>(ok);
                    row.mean_stat = sum / static_cast<double>(ok);
                    const double var =
                        ok > 1 ? (sum_sq - sum * sum / static_cast<double>(ok)) /
                                     static_cast<double>(ok - 1)
                               : 0.0;
                    row.sd_stat = std::sqrt(std::max(0.0, var));
                }
                result.rows.push_back(std::move(row));
            }
        }
    }
    return result;
}

McResult bandwidth_sweep(const McConfig& config) {
    for (double a : config.a_grid)
        if (a != 0.0) throw InvalidConfig("bandwidth_sweep: size curves require a = 0");
    return run_mc(config);
}

McResult power_curve(const McConfig& config) { return run_mc(config); }

void write_csv(const McResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write file: " + path, 0, 0);
    out << "test,model,p,n,N,a,c,reps,reject_rate,mean_stat,sd_stat,failures\n";
    out.precision(17);
    for (const McRow& row : result.rows) {
        out << row.test << ',' << row.model << ',' << row.p << ',' << row.n << ',' << row.N
            << ',' << row.a << ',' << row.c << ',' << row.reps << ',' << row.reject_rate << ','
            << row.mean_stat << ',' << row.sd_stat << ',' << row.failures << '\n';
    }
}

void write_plot_script(const McResult& result, const std::string& csv_path,
                       const std::string& x_column, const std::string& script_path) {
    if (x_column != "a" && x_column != "c")
        throw InvalidConfig("write_plot_script: x column must be 'a' or 'c'");
    const int x_index = x_column == "a" ? 6 : 7;  // 1-based gnuplot columns
    std::set<std::pair<std::string, std::string>> curves;
    for (const McRow& row : result.rows) curves.insert({row.test, row.model});

    std::ofstream out(script_path);
    if (!out) throw ParseError("cannot write file: " + script_path, 0, 0);
    out << "set datafile separator ','\n";
    out << "set xlabel '" << x_column << "'\n";
    out << "set ylabel 'rejection rate'\n";
    out << "set key outside\n";
    out << "plot \\\n";
    bool first = true;
    for (const auto& [test, model] : curves) {
        if (!first) out << ", \\\n";
        first = false;
        out << "  '" << csv_path << "' using " << x_index
            << ":(strcol(1) eq '" << test << "' && strcol(2) eq '" << model
            << "' ? $9 : NaN) with linespoints title '" << test << " " << model << "'";
    }
    out << "\n";
}

}  // namespace eivcheck
