#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "auctionlab/dist.hpp"

namespace auctionlab {

inline constexpr int kSchemaVersion = 1;

/// Library version stamped into every report.
std::string_view version();

/// Parsed experiment configuration. Every object level rejects keys it does
/// not know, and errors name the offending field path.
///
///   {"schema_version": 1, "scenario": "...", "params": {...},
///    "n_draws": N, "T": T, "seeds": {"master": S, "replications": R},
///    "workers": W, "output": {"report": "...", "series": "..."}}
struct ExperimentConfig {
    std::string scenario;
    json params = json::object();
    std::size_t n_draws = 0;
    std::size_t T = 0;
    std::uint64_t master_seed = 0;
    std::size_t replications = 1;
    unsigned workers = 1;
    std::string report_path;
    std::string series_path;
    /// The configuration as given, with any seed override applied.
    json echo;

    static ExperimentConfig from_json(const json& j);
    void override_seed(std::uint64_t seed);
};

/// CLI group a scenario belongs to (dist, simulate, equilibrium, learn,
/// online, bid, shade, exploit).
std::string_view scenario_command(std::string_view scenario);
std::vector<std::string> scenario_names();

struct Replication {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> metrics;
    std::map<std::string, std::vector<double>> series;
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;
    double p05 = 0.0;
    double p95 = 0.0;
};

struct RunReport {
    json config;
    std::uint64_t master_seed = 0;
    std::string version;
    int schema_version = kSchemaVersion;
    std::vector<Replication> replications;
    std::map<std::string, MetricSummary> aggregate;
    /// Element-wise mean of each series over replications.
    std::map<std::string, std::vector<double>> series;
    double wall_clock_seconds = 0.0;

    json to_json() const;
    static RunReport from_json(const json& j);
    /// Replications and aggregates only, serialized; equal across re-runs.
    std::string metrics_dump() const;
};

/// Replication k runs on derive_seed(master, k, "harness.replication");
/// replications are spread over `workers` threads and each runs single-threaded.
RunReport run_experiment(const ExperimentConfig& config);

/// JSON text with every real printed to 17 significant digits.
std::string dump_json(const json& j, int indent = 2);

/// Column-labelled table for plotting.
struct PlotTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    /// Header row, comma separated, LF line endings.
    std::string to_csv() const;
};

/// Kinds: "bk-curve" (n, vickrey_revenue, myerson_revenue), "profit-curve"
/// (family, r, Pi_r), "sample-complexity" (T, mean_ratio, p05_ratio).
/// MissingSeries when the report lacks what the kind needs.
PlotTable emit_plot_data(const RunReport& report, std::string_view kind);

/// Builds the table first, so nothing is written on error.
void write_plot_data(const RunReport& report, std::string_view kind, const std::string& path);

}  // namespace auctionlab
