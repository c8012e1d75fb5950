// cadlog: command-line front end for the session-log pipeline.
// Subcommands: clean, encode, train, experiment, synth.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cadlog/cadlog.hpp"

namespace {

using namespace cadlog;
namespace fs = std::filesystem;

using ConfigList = std::vector<std::pair<std::string, std::string>>;

void echo_config(bool quiet, const std::string& what, const ConfigList& config) {
    if (quiet) return;
    std::cerr << "cadlog " << what << ":";
    for (const auto& [k, v] : config) std::cerr << " " << k << "=" << v;
    std::cerr << "\n";
}

CategoryMapping resolve_mapping(const std::string& path) {
    if (path.empty()) return default_mapping();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file_bytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("mapping file " + path + ": " + e.what());
    }
    return mapping_from_json(j);
}

// --- clean -----------------------------------------------------------------

struct CleanArgs {
    std::string in_dir, out_dir, report;
};

int run_clean(const CleanArgs& a, const CategoryMapping&, bool quiet) {
    ConfigList config{{"in", a.in_dir}, {"out", a.out_dir}, {"report", a.report}};
    echo_config(quiet, "clean", config);

    auto files = scan_directory(a.in_dir);
    fs::create_directories(a.out_dir);
    std::string csv;
    for (const auto& [k, v] : config) csv += "# " + k + "=" + v + "\n";
    csv += "file,outcome,n_diagnostics,first_diagnostic_kind,first_offset\n";

    std::size_t written = 0, repaired = 0, unrepairable = 0, skipped = 0;
    for (const auto& [path, size] : files) {
        std::string fname = path.filename().string();
        if (size == 0) {
            ++skipped;
            csv += fname + ",SkippedEmpty,0,,\n";
            continue;
        }
        std::string bytes = read_file_bytes(path);
        auto diags = diagnose(bytes);
        auto rep = repair(bytes, fname);
        csv += fname + "," + repair_outcome_name(rep.log.outcome) + "," +
               std::to_string(diags.size()) + ",";
        if (!diags.empty())
            csv += std::string(diagnostic_kind_name(diags.front().kind)) + "," +
                   std::to_string(diags.front().byte_offset);
        else
            csv += ",";
        csv += "\n";
        if (rep.log.outcome == RepairOutcome::Unrepairable) {
            ++unrepairable;
            continue;
        }
        if (rep.log.outcome == RepairOutcome::Repaired) ++repaired;
        write_file_bytes(fs::path(a.out_dir) / fname, rep.bytes);
        ++written;
    }
    write_file_bytes(a.report, csv);
    if (!quiet)
        std::cerr << "cadlog clean: " << files.size() << " files, " << written << " written ("
                  << repaired << " repaired), " << skipped << " empty, " << unrepairable
                  << " unrepairable\n";
    if (!files.empty() && written == 0)
        throw DataError("clean: no usable files in " + a.in_dir);
    return 0;
}

// --- encode ----------------------------------------------------------------

struct EncodeArgs {
    std::string clean_dir, kind = "tally", out;
    double prefix_fraction = 0.0;  // 0 = not set
};

int run_encode(const EncodeArgs& a, const CategoryMapping& mapping, bool quiet) {
    ConfigList config{{"in", a.clean_dir}, {"kind", a.kind}, {"out", a.out}};
    if (a.prefix_fraction > 0.0) config.emplace_back("prefix", fmt_g6(a.prefix_fraction));
    echo_config(quiet, "encode", config);

    auto [cohort, logs] = load_cohort(a.clean_dir, mapping);
    if (cohort.sessions.empty()) throw DataError("encode: no usable sessions in " + a.clean_dir);
    FeatureKind kind = a.kind == "tally" ? FeatureKind::Tally : FeatureKind::Sequence;
    std::optional<double> pf;
    if (a.prefix_fraction > 0.0) pf = a.prefix_fraction;
    auto table = encode_features(cohort, kind, pf);
    write_file_bytes(a.out, render_features_csv(table));
    if (!quiet)
        std::cerr << "cadlog encode: " << table.features.rows() << " rows x "
                  << table.features.cols << " features -> " << a.out << "\n";
    return 0;
}

// --- train -----------------------------------------------------------------

struct TrainArgs {
    std::string features, out, metrics, family = "logistic";
    double band = kDefaultBandKwh;
    std::uint64_t seed = 7;
    double test_fraction = 0.2;
    bool no_standardize = false;
    bool stratify = false;
    LogisticHyper hyper;
};

int run_train(const TrainArgs& a, bool quiet) {
    ConfigList config{{"features", a.features},
                      {"family", a.family},
                      {"band_kwh", fmt_g6(a.band)},
                      {"seed", std::to_string(a.seed)},
                      {"test_fraction", fmt_g6(a.test_fraction)},
                      {"standardize", a.no_standardize ? "0" : "1"},
                      {"stratify", a.stratify ? "1" : "0"}};
    echo_config(quiet, "train", config);

    auto table = parse_features_csv(read_file_bytes(a.features));
    Dataset d;
    d.features = table.features;
    d.features.data.clear();
    d.features.row_ids.clear();
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < table.features.rows(); ++i) {
        if (!table.energies[i]) {
            ++dropped;
            continue;
        }
        auto row = table.features.row(i);
        d.features.data.insert(d.features.data.end(), row.begin(), row.end());
        d.features.row_ids.push_back(table.features.row_ids[i]);
        double e = *table.energies[i];
        d.targets.push_back(a.family == "linear" ? e
                                                 : static_cast<double>(binarize(e, a.band)));
    }
    d.target_kind = a.family == "linear" ? TargetKind::Energy : TargetKind::SuccessLabel;
    if (dropped > 0 && !quiet)
        std::cerr << "cadlog train: dropped " << dropped << " rows without a final net energy\n";
    if (d.rows() == 0) throw DataError("train: no labeled rows in " + a.features);

    auto [train, test] = split(d, SplitSpec{a.test_fraction, a.seed, a.stratify});
    std::optional<std::vector<FeatureStats>> stats;
    if (!a.no_standardize) {
        stats = fit_standardizer(train.features);
        train.features = apply_standardizer(train.features, *stats);
        test.features = apply_standardizer(test.features, *stats);
    }

    std::string metrics;
    for (const auto& [k, v] : config) metrics += "# " + k + "=" + v + "\n";
    metrics += "metric,value\n";
    metrics += "n_train," + std::to_string(train.rows()) + "\n";
    metrics += "n_test," + std::to_string(test.rows()) + "\n";

    ModelWeights w;
    if (a.family == "linear") {
        w = fit_linear(train);
        auto rmse = [&](const Dataset& part) {
            auto pred = predict_linear(w, part.features);
            double ss = 0.0;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                double r = pred[i] - part.targets[i];
                ss += r * r;
            }
            return std::sqrt(ss / static_cast<double>(pred.size()));
        };
        metrics += "train_rmse_kwh," + fmt_g6(rmse(train)) + "\n";
        metrics += "test_rmse_kwh," + fmt_g6(rmse(test)) + "\n";
    } else {
        auto fit = fit_logistic(train, a.hyper);
        w = fit.weights;
        auto labels = [](const Dataset& part) {
            std::vector<int> v(part.targets.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = part.targets[i] > 0.5 ? 1 : 0;
            return v;
        };
        double train_acc = accuracy(predict_logistic(w, train.features), labels(train));
        double test_acc = accuracy(predict_logistic(w, test.features), labels(test));
        std::size_t pos = 0;
        for (double y : d.targets) pos += y > 0.5 ? 1 : 0;
        double p = static_cast<double>(pos) / static_cast<double>(d.rows());
        metrics += "train_accuracy," + fmt_g6(train_acc) + "\n";
        metrics += "test_accuracy," + fmt_g6(test_acc) + "\n";
        metrics += "majority_baseline," + fmt_g6(std::max(p, 1.0 - p)) + "\n";
        metrics += "final_loss," + fmt_g6(fit.final_loss) + "\n";
        metrics += "iterations," + std::to_string(fit.iterations) + "\n";
    }
    w.standardization = stats;

    write_file_bytes(a.out, model_to_json(w).dump(2) + "\n");
    write_file_bytes(a.metrics, metrics);
    if (!quiet) std::cerr << "cadlog train: model -> " << a.out << ", metrics -> " << a.metrics << "\n";
    return 0;
}

// --- experiment --------------------------------------------------------------

struct ExperimentArgs {
    std::string which, cohort_dir, out, svg, kind = "tally";
    double band = kDefaultBandKwh;
    double bin_width = 5000.0;
    std::vector<double> bands;
    std::size_t iters = 10;
    std::uint64_t seed = 7;
    bool no_standardize = false;
};

int run_experiment(const ExperimentArgs& a, const CategoryMapping& mapping, bool quiet) {
    ConfigList config{{"which", a.which},   {"cohort", a.cohort_dir},
                      {"band_kwh", fmt_g6(a.band)}, {"iters", std::to_string(a.iters)},
                      {"seed", std::to_string(a.seed)}, {"out", a.out}};
    echo_config(quiet, "experiment", config);

    auto [cohort, logs] = load_cohort(a.cohort_dir, mapping);
    if (cohort.sessions.empty())
        throw DataError("experiment: no usable sessions in " + a.cohort_dir);

    PipelineOptions opts;
    opts.band_kwh = a.band;
    opts.standardize = !a.no_standardize;

    ExperimentReport report;
    if (a.which == "hist") {
        report = histogram_final_energy(cohort, a.bin_width);
    } else if (a.which == "linear") {
        report = linear_pred_vs_actual(cohort, a.seed, opts);
    } else if (a.which == "band") {
        report = band_sweep(cohort, a.bands.empty() ? default_band_sweep_bands() : a.bands,
                            a.seed, opts);
    } else if (a.which == "stability") {
        FeatureKind kind = a.kind == "sequence" ? FeatureKind::Sequence : FeatureKind::Tally;
        report = stability_run(cohort, kind, a.iters, a.seed, opts);
    } else if (a.which == "prefix") {
        report = prefix_sweep(cohort, default_prefix_fractions(), a.iters, a.seed, opts);
    } else {
        throw DomainError("experiment: unknown experiment: " + a.which);
    }

    write_file_bytes(a.out, render_report(report, "csv"));
    if (!a.svg.empty()) write_file_bytes(a.svg, render_report(report, "svg"));
    if (!quiet)
        std::cerr << "cadlog experiment " << a.which << ": " << report.rows.size()
                  << " rows -> " << a.out << "\n";
    return 0;
}

// --- synth -------------------------------------------------------------------

struct SynthArgs {
    GenConfig config;
    std::string out_dir, manifest;
};

int run_synth(const SynthArgs& a, bool quiet) {
    const GenConfig& c = a.config;
    ConfigList config{{"n", std::to_string(c.n_students)},
                      {"success_rate", fmt_g6(c.success_rate)},
                      {"signal", fmt_g6(c.signal)},
                      {"early_signal", fmt_g6(c.early_signal)},
                      {"min_actions", std::to_string(c.min_actions)},
                      {"max_actions", std::to_string(c.max_actions)},
                      {"corrupt", fmt_g6(c.corruption_rate)},
                      {"seed", std::to_string(c.seed)},
                      {"out", a.out_dir}};
    echo_config(quiet, "synth", config);
    auto manifest = generate(c, a.out_dir);
    if (!a.manifest.empty())
        write_file_bytes(a.manifest, render_manifest_csv(manifest, config));
    if (!quiet)
        std::cerr << "cadlog synth: wrote " << manifest.size() << " session files to "
                  << a.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cadlog: design-session log cleaning, encoding, and success prediction"};
    app.require_subcommand(1);

    bool quiet = false;
    std::string mapping_path;
    app.add_flag("--quiet", quiet, "suppress progress output on stderr");
    app.add_option("--mapping", mapping_path, "category mapping config (JSON)")
        ->check(CLI::ExistingFile);
    app.set_version_flag("--version", [&mapping_path]() {
        CategoryMapping m = resolve_mapping(mapping_path);
        return std::string("cadlog 0.1.0 (mapping ") + m.version + ")";
    });

    CleanArgs clean_args;
    auto* clean = app.add_subcommand("clean", "diagnose and repair a directory of session logs");
    clean->add_option("in-dir", clean_args.in_dir, "input directory")->required();
    clean->add_option("--out", clean_args.out_dir, "output directory for repaired files")
        ->required();
    clean->add_option("--report", clean_args.report, "repair report CSV path")->required();

    EncodeArgs encode_args;
    auto* encode = app.add_subcommand("encode", "encode sessions into a feature CSV");
    encode->add_option("clean-dir", encode_args.clean_dir, "directory of session logs")
        ->required();
    encode->add_option("--kind", encode_args.kind, "feature kind")
        ->check(CLI::IsMember({"tally", "sequence"}))
        ->required();
    encode->add_option("--prefix", encode_args.prefix_fraction,
                       "keep only the first fraction of each sequence (sequence kind)")
        ->check(CLI::Range(1e-9, 1.0));
    encode->add_option("--out", encode_args.out, "features CSV path")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "fit a regression model from a feature CSV");
    train->add_option("--features", train_args.features, "features CSV path")->required();
    train->add_option("--band", train_args.band, "success band in kWh (logistic)")
        ->capture_default_str();
    train->add_option("--seed", train_args.seed, "split seed")->capture_default_str();
    train->add_option("--family", train_args.family, "model family")
        ->check(CLI::IsMember({"linear", "logistic"}))
        ->capture_default_str();
    train->add_option("--test-fraction", train_args.test_fraction, "held-out fraction")
        ->capture_default_str();
    train->add_flag("--no-standardize", train_args.no_standardize,
                    "fit on raw (unstandardized) features");
    train->add_flag("--stratify", train_args.stratify, "stratify the split by label");
    train->add_option("--lr", train_args.hyper.learning_rate, "gradient descent step")
        ->capture_default_str();
    train->add_option("--max-iters", train_args.hyper.max_iters, "iteration cap")
        ->capture_default_str();
    train->add_option("--l2", train_args.hyper.l2_strength, "L2 strength")
        ->capture_default_str();
    train->add_option("--tol", train_args.hyper.tolerance, "gradient tolerance")
        ->capture_default_str();
    train->add_option("--out", train_args.out, "model JSON path")->required();
    train->add_option("--metrics", train_args.metrics, "metrics CSV path")->required();

    ExperimentArgs exp_args;
    auto* experiment = app.add_subcommand("experiment", "re-run one of the bundled experiments");
    experiment
        ->add_option("which", exp_args.which, "hist | linear | band | stability | prefix")
        ->check(CLI::IsMember({"hist", "linear", "band", "stability", "prefix"}))
        ->required();
    experiment->add_option("--cohort", exp_args.cohort_dir, "directory of session logs")
        ->required();
    experiment->add_option("--band", exp_args.band, "success band in kWh")
        ->capture_default_str();
    experiment->add_option("--bin-width", exp_args.bin_width, "histogram bin width in kWh")
        ->capture_default_str();
    experiment->add_option("--bands", exp_args.bands, "band sweep values in kWh")->delimiter(',');
    experiment->add_option("--iters", exp_args.iters, "iterations")->capture_default_str();
    experiment->add_option("--seed", exp_args.seed, "seed base")->capture_default_str();
    experiment->add_option("--kind", exp_args.kind, "stability feature kind")
        ->check(CLI::IsMember({"tally", "sequence"}))
        ->capture_default_str();
    experiment->add_flag("--no-standardize", exp_args.no_standardize,
                         "fit on raw (unstandardized) features");
    experiment->add_option("--out", exp_args.out, "report CSV path")->required();
    experiment->add_option("--svg", exp_args.svg, "also render an SVG chart here");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
    synth->add_option("--n", synth_args.config.n_students, "students")->capture_default_str();
    synth->add_option("--success-rate", synth_args.config.success_rate, "success probability")
        ->capture_default_str();
    synth->add_option("--signal", synth_args.config.signal, "class signal strength in [0,1]")
        ->capture_default_str();
    synth->add_option("--early-signal", synth_args.config.early_signal,
                      "signal share in the first 30% of actions")
        ->capture_default_str();
    synth->add_option("--min-actions", synth_args.config.min_actions, "min session length")
        ->capture_default_str();
    synth->add_option("--max-actions", synth_args.config.max_actions, "max session length")
        ->capture_default_str();
    synth->add_option("--corrupt", synth_args.config.corruption_rate,
                      "per-file single-fault corruption probability")
        ->capture_default_str();
    synth->add_option("--seed", synth_args.config.seed, "generator seed")->capture_default_str();
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();
    synth->add_option("--manifest", synth_args.manifest, "manifest CSV path");

    try {
        app.parse(argc, argv);
        CategoryMapping mapping = resolve_mapping(mapping_path);
        if (*clean) return run_clean(clean_args, mapping, quiet);
        if (*encode) return run_encode(encode_args, mapping, quiet);
        if (*train) return run_train(train_args, quiet);
        if (*experiment) return run_experiment(exp_args, mapping, quiet);
        if (*synth) return run_synth(synth_args, quiet);
        std::cerr << "cadlog: no subcommand\n";
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DomainError& e) {
        std::cerr << "cadlog: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "cadlog: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "cadlog: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "cadlog: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "cadlog: " << e.what() << "\n";
        return 2;
    }
}
