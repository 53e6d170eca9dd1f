#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eivcheck/dgp.hpp"
#include "eivcheck/teststat.hpp"

namespace eivcheck {

/// One Monte Carlo cell grid: a model, sample sizes, grids over the
/// alternative strength a and the bandwidth constant c, and the set of
/// test regimes to run on the same generated data.
struct McConfig {
    ModelSpec spec;
    std::size_t n = 100;
    std::size_t N = 400;
    std::size_t reps = 500;
    std::vector<double> a_grid = {0.0};
    std::vector<double> c_grid = {1.6};
    std::vector<RegimeRequest> tests = {RegimeRequest::split};
    double alpha = 0.05;
    std::uint64_t seed = 1;
    CriticalConvention convention = CriticalConvention::literal_1_65;
    std::size_t workers = 1;
};

struct McRow {
    std::string test;
    std::string model;
    std::size_t p = 0;
    std::size_t n = 0;
    std::size_t N = 0;
    double a = 0.0;
    double c = 0.0;
    std::size_t reps = 0;
    double reject_rate = 0.0;
    double mean_stat = 0.0;
    double sd_stat = 0.0;
    std::size_t failures = 0;

    /// A cell with more than 1% failed replications is not trustworthy.
    bool valid() const { return failures * 100 <= reps; }
};

struct McResult {
    std::vector<McRow> rows;
};

/// Runs reps seeded replications per (a, c, test) cell. Replication r of
/// cell (a-index, c-index) draws data from the stream derived from
/// (seed, model, a-index, c-index, r), so cells are independently
/// reproducible and identical across worker counts.
McResult run_mc(const McConfig& config);

/// Size curve over the c grid; requires a = 0.
McResult bandwidth_sweep(const McConfig& config);

/// Power curve over the a grid.
McResult power_curve(const McConfig& config);

std::string regime_request_name(RegimeRequest request);

void write_csv(const McResult& result, const std::string& path);

/// Emits a gnuplot script plotting reject_rate against `x_column`
/// ("a" or "c") with one curve per (test, model).
void write_plot_script(const McResult& result, const std::string& csv_path,
                       const std::string& x_column, const std::string& script_path);

}  // namespace eivcheck
