// Command-line front end: stream a dataset into a sketch, query and compress
// it, export anomaly/drift series, and validate against a batch baseline.

#include "streamgmm/anomaly.hpp"
#include "streamgmm/compress.hpp"
#include "streamgmm/exports.hpp"
#include "streamgmm/gaussian.hpp"
#include "streamgmm/harness.hpp"
#include "streamgmm/pipeline.hpp"
#include "streamgmm/sketch.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDataError = 2;
constexpr int kExitDegenerate = 3;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw streamgmm::StateError("cannot open output file " + path);
    }
    return out;
}

// Pretty-printed config with resolved defaults.
void print_config(const streamgmm::RunConfig& cfg) {
    std::cout << nlohmann::json::parse(streamgmm::run_config_to_json(cfg)).dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streamgmm: single-pass Gaussian stream clustering with anomaly tracking"};
    app.require_subcommand(0, 1);

    bool show_config = false;
    app.add_flag("--print-config", show_config,
                 "print the resolved configuration (defaults, or --config merged) and exit");
    std::string global_config_path;
    app.add_option("--config", global_config_path, "JSON configuration file");

    // run
    auto* cmd_run = app.add_subcommand("run", "stream a dataset into a sketch file");
    std::string run_data, run_config_path, run_sketch, run_audit;
    cmd_run->add_option("--data", run_data, "dataset file (numeric rows)")->required();
    cmd_run->add_option("--config", run_config_path, "JSON configuration file");
    cmd_run->add_option("--sketch", run_sketch, "output sketch file")->required();
    cmd_run->add_option("--audit-out", run_audit, "write the merge-decision audit log CSV");

    // query-clusters
    auto* cmd_query = app.add_subcommand("query-clusters", "list clusters, optionally compressed");
    std::string query_sketch, query_out, query_ellipses, query_trace;
    int query_k = 0;
    cmd_query->add_option("--sketch", query_sketch, "sketch file")->required();
    cmd_query->add_option("--k", query_k, "compress (non-destructively) to this many clusters");
    cmd_query->add_option("--out", query_out, "write the cluster report here instead of stdout");
    cmd_query->add_option("--ellipses-out", query_ellipses,
                          "write Mahalanobis-3 boundary samples CSV (2-D sketches)");
    cmd_query->add_option("--trace-out", query_trace,
                          "write the compression merge trace CSV (with --k)");

    // anomalies
    auto* cmd_anom = app.add_subcommand("anomalies", "report stored anomalies");
    std::string anom_sketch, anom_out;
    double anom_min_score = 0.0;
    cmd_anom->add_option("--sketch", anom_sketch, "sketch file")->required();
    auto* anom_min_opt =
        cmd_anom->add_option("--min-score", anom_min_score,
                             "only report anomalies whose current score is at least this "
                             "(default: the sketch's flag threshold; pass 0 for everything)");
    cmd_anom->add_option("--out", anom_out, "write the long-format score series CSV");

    // drift
    auto* cmd_drift = app.add_subcommand("drift", "export per-cluster growth trajectories");
    std::string drift_sketch, drift_out;
    cmd_drift->add_option("--sketch", drift_sketch, "sketch file")->required();
    cmd_drift->add_option("--out", drift_out, "write the drift CSV here instead of stdout");

    // validate
    auto* cmd_validate =
        app.add_subcommand("validate", "compare streamed clustering against the batch baseline");
    std::string val_data, val_config_path, val_out;
    int val_seeds = 5;
    int val_baseline_k = 0;
    cmd_validate->add_option("--data", val_data, "dataset file")->required();
    cmd_validate->add_option("--config", val_config_path, "JSON configuration file");
    cmd_validate->add_option("--baseline-k", val_baseline_k, "batch GMM component count")
        ->required();
    cmd_validate->add_option("--seeds", val_seeds, "number of seeds (consecutive from the config seed)");
    cmd_validate->add_option("--out", val_out, "write the validation table CSV");

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "sample a labeled Gaussian mixture dataset");
    std::string synth_mixture, synth_out, synth_labels;
    std::int64_t synth_n = 1000;
    std::uint64_t synth_seed = 1;
    cmd_synth->add_option("--mixture", synth_mixture, "mixture spec JSON")->required();
    auto* synth_n_opt = cmd_synth->add_option("--n", synth_n, "number of points");
    auto* synth_seed_opt = cmd_synth->add_option("--seed", synth_seed, "generator seed");
    cmd_synth->add_option("--out", synth_out, "output dataset file")->required();
    cmd_synth->add_option("--labels-out", synth_labels, "write ground-truth labels here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (show_config) {
            streamgmm::RunConfig cfg;
            if (!global_config_path.empty()) cfg = streamgmm::load_run_config(global_config_path);
            print_config(cfg);
            return kExitOk;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kExitUsage;
        }

        if (cmd_run->parsed()) {
            streamgmm::RunConfig cfg;
            const std::string& cfg_path =
                !run_config_path.empty() ? run_config_path : global_config_path;
            if (!cfg_path.empty()) cfg = streamgmm::load_run_config(cfg_path);
            const streamgmm::Dataset ds = streamgmm::load_dataset(run_data);
            const streamgmm::StreamResult result = streamgmm::run_stream(ds, cfg);
            streamgmm::save(result.sketch, run_sketch);
            if (!run_audit.empty()) {
                auto out = open_out(run_audit);
                streamgmm::write_merge_decisions_csv(result.decisions, out);
            }
            std::cout << "dataset " << ds.name << ": " << result.summary.total_points
                      << " points in " << result.summary.chunks_processed << " chunks, "
                      << result.summary.final_base_count << " base clusters, "
                      << result.summary.anomaly_count << " anomalies ("
                      << result.summary.seconds << " s)\n"
                      << "sketch written to " << run_sketch << '\n';
        } else if (cmd_query->parsed()) {
            streamgmm::SketchState sketch = streamgmm::load(query_sketch);
            if (query_k > 0) {
                streamgmm::CompressionSchedule schedule = sketch.config_snapshot.compression;
                schedule.target_k = query_k;
                auto result = streamgmm::compress(sketch, schedule);
                if (result.noop_warning) {
                    std::cerr << "warning: target k " << query_k << " exceeds current "
                              << sketch.base_signatures.size() << " clusters; nothing to do\n";
                }
                if (!query_trace.empty()) {
                    auto out = open_out(query_trace);
                    streamgmm::write_compression_trace_csv(result.trace, out);
                }
                sketch = std::move(result.sketch);
            }
            if (!query_out.empty()) {
                auto out = open_out(query_out);
                streamgmm::write_cluster_report(sketch, out);
            } else {
                streamgmm::write_cluster_report(sketch, std::cout);
            }
            if (!query_ellipses.empty()) {
                auto out = open_out(query_ellipses);
                streamgmm::write_boundary_ellipses_csv(sketch, out);
            }
        } else if (cmd_anom->parsed()) {
            const streamgmm::SketchState sketch = streamgmm::load(anom_sketch);
            if (anom_min_opt->count() == 0) {
                anom_min_score = sketch.config_snapshot.anomaly.flag_threshold;
            }
            const auto rows = streamgmm::query_anomalies(sketch, anom_min_score);
            std::cout << "anomaly_id,first_seen_chunk,current_score,current_nearest";
            for (int j = 0; j < sketch.dimensionality; ++j) std::cout << ",x" << j;
            std::cout << '\n';
            for (const auto& row : rows) {
                std::cout << row.anomaly_index << ',' << row.first_seen_chunk << ','
                          << row.current_score << ',' << row.current_nearest_cluster_id;
                for (Eigen::Index j = 0; j < row.point.size(); ++j) {
                    std::cout << ',' << row.point(j);
                }
                std::cout << '\n';
            }
            if (!anom_out.empty()) {
                auto out = open_out(anom_out);
                streamgmm::write_anomaly_series_csv(sketch, out);
            }
        } else if (cmd_drift->parsed()) {
            const streamgmm::SketchState sketch = streamgmm::load(drift_sketch);
            if (!drift_out.empty()) {
                auto out = open_out(drift_out);
                streamgmm::write_drift_csv(sketch, out);
            } else {
                streamgmm::write_drift_csv(sketch, std::cout);
            }
        } else if (cmd_validate->parsed()) {
            streamgmm::RunConfig cfg;
            const std::string& cfg_path =
                !val_config_path.empty() ? val_config_path : global_config_path;
            if (!cfg_path.empty()) cfg = streamgmm::load_run_config(cfg_path);
            if (val_seeds < 1) throw streamgmm::ConfigError("--seeds must be >= 1");
            const streamgmm::Dataset ds = streamgmm::load_dataset(val_data);
            std::vector<std::uint64_t> seeds;
            for (int i = 0; i < val_seeds; ++i) seeds.push_back(cfg.stream.rng_seed + i);
            const auto rows =
                streamgmm::validate_against_baseline(ds, cfg, val_baseline_k, seeds);
            streamgmm::write_validation_csv(rows, std::cout);
            std::vector<double> values;
            for (const auto& row : rows) values.push_back(row.rand_index);
            std::cout << "median_rand_index " << streamgmm::median(values) << '\n';
            if (!val_out.empty()) {
                auto out = open_out(val_out);
                streamgmm::write_validation_csv(rows, out);
            }
        } else if (cmd_synth->parsed()) {
            const streamgmm::MixtureSpec spec = streamgmm::load_mixture_spec(synth_mixture);
            // Flags win; otherwise the mixture file's own n/seed apply.
            if (synth_n_opt->count() == 0 && spec.n) synth_n = *spec.n;
            if (synth_seed_opt->count() == 0 && spec.seed) synth_seed = *spec.seed;
            const auto labeled = streamgmm::generate_synthetic(spec, synth_n, synth_seed);
            auto out = open_out(synth_out);
            out.precision(17);
            for (Eigen::Index i = 0; i < labeled.data.points.rows(); ++i) {
                for (Eigen::Index j = 0; j < labeled.data.points.cols(); ++j) {
                    if (j) out << ' ';
                    out << labeled.data.points(i, j);
                }
                out << '\n';
            }
            if (!synth_labels.empty()) {
                auto lout = open_out(synth_labels);
                for (const int label : labeled.labels) lout << label << '\n';
            }
            std::cout << "wrote " << labeled.data.points.rows() << " points to " << synth_out
                      << '\n';
        }
        return kExitOk;
    } catch (const streamgmm::DegenerateCovariance& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}
