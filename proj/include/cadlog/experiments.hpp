#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cadlog/core.hpp"
#include "cadlog/features.hpp"
#include "cadlog/learn.hpp"
#include "cadlog/report.hpp"

// The five experiments, re-runnable on any cohort: outcome histogram, linear
// predicted-vs-actual, success-band sweep, split-stability run, and the
// early-prediction prefix sweep. Every experiment is a pure function of
// (cohort, config, seeds) and renders to deterministic CSV/SVG.

namespace cadlog {

inline constexpr double kDefaultBandKwh = 10000.0;

struct PipelineOptions {
    double band_kwh = kDefaultBandKwh;
    double test_fraction = 0.2;
    bool standardize = true;
    LogisticHyper hyper;
};

// Fraction of the majority class after binarization; the floor any useful
// model has to beat.
inline double majority_baseline(const Cohort& cohort, double band_kwh) {
    Cohort labeled = filter_labeled(cohort);
    if (labeled.sessions.empty()) throw DomainError("majority_baseline: no labeled sessions");
    std::size_t pos = 0;
    for (const auto& s : labeled.sessions) pos += binarize(*s.final_net_energy, band_kwh);
    double p = static_cast<double>(pos) / static_cast<double>(labeled.sessions.size());
    return std::max(p, 1.0 - p);
}

// ---------------------------------------------------------------------------
// Dataset assembly and per-cell model runs, shared by the sweeps so that
// matching cells are identical by construction.

namespace detail {

inline Dataset tally_dataset(const Cohort& labeled, TargetKind target_kind, double band_kwh) {
    std::vector<CountVector> tallies;
    std::vector<std::string> ids;
    Dataset d;
    d.target_kind = target_kind;
    for (const auto& s : labeled.sessions) {
        tallies.push_back(tally(s));
        ids.push_back(s.student_id);
        double e = *s.final_net_energy;
        d.targets.push_back(target_kind == TargetKind::Energy
                                ? e
                                : static_cast<double>(binarize(e, band_kwh)));
    }
    d.features = tally_matrix(tallies, std::move(ids));
    return d;
}

struct CellResult {
    double test_accuracy = 0.0;
    double train_accuracy = 0.0;
};

inline CellResult fit_and_score(Dataset train, Dataset test, const PipelineOptions& opts) {
    if (opts.standardize) {
        auto stats = fit_standardizer(train.features);
        train.features = apply_standardizer(train.features, stats);
        test.features = apply_standardizer(test.features, stats);
    }
    auto fit = fit_logistic(train, opts.hyper);
    auto to_labels = [](const std::vector<double>& t) {
        std::vector<int> v(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) v[i] = t[i] > 0.5 ? 1 : 0;
        return v;
    };
    CellResult r;
    r.test_accuracy = accuracy(predict_logistic(fit.weights, test.features), to_labels(test.targets));
    r.train_accuracy =
        accuracy(predict_logistic(fit.weights, train.features), to_labels(train.targets));
    return r;
}

// Tally features -> split -> logistic.
inline CellResult run_tally_cell(const Cohort& labeled, std::uint64_t seed,
                                 const PipelineOptions& opts) {
    Dataset d = tally_dataset(labeled, TargetKind::SuccessLabel, opts.band_kwh);
    auto [train, test] = split(d, SplitSpec{opts.test_fraction, seed});
    return fit_and_score(std::move(train), std::move(test), opts);
}

// Sequence features -> prefix -> split -> pad to the train width -> logistic.
// The pad width and standardizer are refit inside every cell so nothing
// leaks from the test rows.
inline CellResult run_sequence_cell(const Cohort& labeled, double fraction, std::uint64_t seed,
                                    const PipelineOptions& opts) {
    std::vector<CodeSequence> seqs;
    std::vector<std::string> ids;
    std::vector<double> labels;
    for (const auto& s : labeled.sessions) {
        seqs.push_back(prefix(encode_sequence(s), fraction));
        ids.push_back(s.student_id);
        labels.push_back(static_cast<double>(binarize(*s.final_net_energy, opts.band_kwh)));
    }
    auto [train_idx, test_idx] = split_indices(seqs.size(), SplitSpec{opts.test_fraction, seed});

    auto subset = [&](const std::vector<std::size_t>& idx, std::size_t pad_length,
                      bool fit_width) {
        std::vector<CodeSequence> ss;
        std::vector<std::string> ii;
        Dataset d;
        d.target_kind = TargetKind::SuccessLabel;
        for (std::size_t i : idx) {
            ss.push_back(seqs[i]);
            ii.push_back(ids[i]);
            d.targets.push_back(labels[i]);
        }
        d.features = fit_width ? pad_matrix(ss, std::move(ii))
                               : pad_matrix(ss, std::move(ii), pad_length);
        return d;
    };
    Dataset train = subset(train_idx, 0, true);
    Dataset test = subset(test_idx, train.features.pad_length, false);
    return fit_and_score(std::move(train), std::move(test), opts);
}

inline void push_hyper_config(ExperimentReport& r, const PipelineOptions& opts) {
    r.config.emplace_back("test_fraction", fmt_g6(opts.test_fraction));
    r.config.emplace_back("standardize", opts.standardize ? "1" : "0");
    r.config.emplace_back("learning_rate", fmt_g6(opts.hyper.learning_rate));
    r.config.emplace_back("max_iters", fmt_int(static_cast<long long>(opts.hyper.max_iters)));
    r.config.emplace_back("l2_strength", fmt_g6(opts.hyper.l2_strength));
    r.config.emplace_back("tolerance", fmt_g6(opts.hyper.tolerance));
}

inline Cohort require_labeled(const Cohort& cohort, std::size_t min_rows,
                              const char* who) {
    Cohort labeled = filter_labeled(cohort);
    if (labeled.sessions.size() < min_rows)
        throw DomainError(std::string(who) + ": labeled cohort too small (" +
                          std::to_string(labeled.sessions.size()) + " < " +
                          std::to_string(min_rows) + ")");
    return labeled;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Outcome histogram: final net energies in bins centered on 0.
// Energies beyond +-10 bins are listed separately as exact-value rows
// (bin_low == bin_high == energy).

inline ExperimentReport histogram_final_energy(const Cohort& cohort, double bin_width_kwh) {
    if (!(bin_width_kwh > 0.0)) throw DomainError("histogram: bin width must be positive");
    Cohort labeled = detail::require_labeled(cohort, 1, "histogram");

    std::map<long long, long long> bins;
    std::map<double, long long> outliers;
    for (const auto& s : labeled.sessions) {
        double e = *s.final_net_energy;
        double k = std::floor(e / bin_width_kwh + 0.5);
        if (std::abs(k) <= 10.0) ++bins[static_cast<long long>(k)];
        else ++outliers[e];
    }

    ExperimentReport r;
    r.name = "histogram";
    r.config.emplace_back("cohort", labeled.provenance);
    r.config.emplace_back("n", fmt_int(static_cast<long long>(labeled.sessions.size())));
    r.config.emplace_back("bin_width_kwh", fmt_g6(bin_width_kwh));
    r.columns = {"bin_low", "bin_high", "count"};
    for (const auto& [k, count] : bins) {
        double low = (static_cast<double>(k) - 0.5) * bin_width_kwh;
        double high = (static_cast<double>(k) + 0.5) * bin_width_kwh;
        r.rows.push_back({fmt_g6(low), fmt_g6(high), fmt_int(count)});
    }
    for (const auto& [e, count] : outliers)
        r.rows.push_back({fmt_g6(e), fmt_g6(e), fmt_int(count)});
    return r;
}

// ---------------------------------------------------------------------------
// Linear check: regression on tallied counts; actual vs predicted
// final net energy for the held-out rows.

inline ExperimentReport linear_pred_vs_actual(const Cohort& cohort, std::uint64_t seed,
                                              const PipelineOptions& opts = {}) {
    Cohort labeled = detail::require_labeled(cohort, 5, "linear_pva");
    Dataset d = detail::tally_dataset(labeled, TargetKind::Energy, opts.band_kwh);
    auto [train, test] = split(d, SplitSpec{opts.test_fraction, seed});
    if (opts.standardize) {
        auto stats = fit_standardizer(train.features);
        train.features = apply_standardizer(train.features, stats);
        test.features = apply_standardizer(test.features, stats);
    }
    ModelWeights w = fit_linear(train);
    auto predicted = predict_linear(w, test.features);

    ExperimentReport r;
    r.name = "linear_pva";
    r.seed_base = seed;
    r.config.emplace_back("cohort", labeled.provenance);
    r.config.emplace_back("n", fmt_int(static_cast<long long>(labeled.sessions.size())));
    r.config.emplace_back("seed", fmt_int(static_cast<long long>(seed)));
    r.config.emplace_back("test_fraction", fmt_g6(opts.test_fraction));
    r.config.emplace_back("standardize", opts.standardize ? "1" : "0");
    r.columns = {"student_id", "actual_kwh", "predicted_kwh"};
    for (std::size_t i = 0; i < test.rows(); ++i)
        r.rows.push_back(
            {test.features.row_ids[i], fmt_g6(test.targets[i]), fmt_g6(predicted[i])});
    return r;
}

// ---------------------------------------------------------------------------
// Band sweep: logistic accuracy as a function of the success band.
// Bands whose training split ends up single-class are flagged, not dropped.

inline std::vector<double> default_band_sweep_bands() {
    return {1000, 2000, 5000, 10000, 20000, 50000};
}

inline ExperimentReport band_sweep(const Cohort& cohort, const std::vector<double>& bands,
                                   std::uint64_t seed, const PipelineOptions& base_opts = {}) {
    if (bands.empty()) throw DomainError("band_sweep: no bands given");
    Cohort labeled = detail::require_labeled(cohort, 5, "band_sweep");

    ExperimentReport r;
    r.name = "band_sweep";
    r.seed_base = seed;
    r.config.emplace_back("cohort", labeled.provenance);
    r.config.emplace_back("n", fmt_int(static_cast<long long>(labeled.sessions.size())));
    r.config.emplace_back("seed", fmt_int(static_cast<long long>(seed)));
    detail::push_hyper_config(r, base_opts);
    r.columns = {"band_kwh", "test_accuracy", "positive_fraction", "status"};
    for (double band : bands) {
        if (!(band > 0.0)) throw DomainError("band_sweep: bands must be positive");
        PipelineOptions opts = base_opts;
        opts.band_kwh = band;
        std::size_t pos = 0;
        for (const auto& s : labeled.sessions) pos += binarize(*s.final_net_energy, band);
        double pos_frac =
            static_cast<double>(pos) / static_cast<double>(labeled.sessions.size());
        try {
            auto cell = detail::run_tally_cell(labeled, seed, opts);
            r.rows.push_back(
                {fmt_g6(band), fmt_g6(cell.test_accuracy), fmt_g6(pos_frac), "ok"});
        } catch (const DataError&) {
            r.rows.push_back({fmt_g6(band), "", fmt_g6(pos_frac), "single_class"});
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Stability run: accuracy across repeated splits; iteration i splits with
// seed_base + i.

inline ExperimentReport stability_run(const Cohort& cohort, FeatureKind kind,
                                      std::size_t iterations, std::uint64_t seed_base,
                                      const PipelineOptions& opts = {}) {
    if (iterations < 1) throw DomainError("stability_run: need at least 1 iteration");
    Cohort labeled = detail::require_labeled(cohort, 5, "stability_run");

    ExperimentReport r;
    r.name = "stability";
    r.seed_base = seed_base;
    r.config.emplace_back("cohort", labeled.provenance);
    r.config.emplace_back("n", fmt_int(static_cast<long long>(labeled.sessions.size())));
    r.config.emplace_back("feature_kind", feature_kind_name(kind));
    r.config.emplace_back("iterations", fmt_int(static_cast<long long>(iterations)));
    r.config.emplace_back("seed_base", fmt_int(static_cast<long long>(seed_base)));
    r.config.emplace_back("band_kwh", fmt_g6(opts.band_kwh));
    detail::push_hyper_config(r, opts);
    r.config.emplace_back("majority_baseline", fmt_g6(majority_baseline(labeled, opts.band_kwh)));
    r.columns = {"iteration", "test_accuracy"};
    for (std::size_t i = 0; i < iterations; ++i) {
        auto cell = kind == FeatureKind::Tally
                        ? detail::run_tally_cell(labeled, seed_base + i, opts)
                        : detail::run_sequence_cell(labeled, 1.0, seed_base + i, opts);
        r.rows.push_back({fmt_int(static_cast<long long>(i)), fmt_g6(cell.test_accuracy)});
    }
    return r;
}

// ---------------------------------------------------------------------------
// Early-prediction sweep over sequence prefixes. Cell (fraction index f, iteration i)
// splits with seed_base + i + 1000 * f, so the fraction=1.0 column matches a
// sequence-kind stability run at seed_base + 1000 * f.

inline std::vector<double> default_prefix_fractions() {
    std::vector<double> f;
    for (int i = 1; i <= 10; ++i) f.push_back(static_cast<double>(i) / 10.0);
    return f;
}

inline ExperimentReport prefix_sweep(const Cohort& cohort,
                                     const std::vector<double>& fractions,
                                     std::size_t iterations, std::uint64_t seed_base,
                                     const PipelineOptions& opts = {}) {
    if (fractions.empty()) throw DomainError("prefix_sweep: no fractions given");
    for (double f : fractions)
        if (!(f > 0.0) || f > 1.0) throw DomainError("prefix_sweep: fractions must be in (0,1]");
    if (iterations < 1) throw DomainError("prefix_sweep: need at least 1 iteration");
    Cohort labeled = detail::require_labeled(cohort, 5, "prefix_sweep");

    ExperimentReport r;
    r.name = "prefix_sweep";
    r.seed_base = seed_base;
    r.config.emplace_back("cohort", labeled.provenance);
    r.config.emplace_back("n", fmt_int(static_cast<long long>(labeled.sessions.size())));
    std::string flist;
    for (std::size_t i = 0; i < fractions.size(); ++i)
        flist += (i ? "," : "") + fmt_g6(fractions[i]);
    r.config.emplace_back("fractions", flist);
    r.config.emplace_back("iterations", fmt_int(static_cast<long long>(iterations)));
    r.config.emplace_back("seed_base", fmt_int(static_cast<long long>(seed_base)));
    r.config.emplace_back("band_kwh", fmt_g6(opts.band_kwh));
    detail::push_hyper_config(r, opts);
    r.config.emplace_back("majority_baseline", fmt_g6(majority_baseline(labeled, opts.band_kwh)));
    r.columns = {"fraction", "iteration", "test_accuracy"};
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        for (std::size_t i = 0; i < iterations; ++i) {
            std::uint64_t seed = seed_base + i + 1000 * fi;
            auto cell = detail::run_sequence_cell(labeled, fractions[fi], seed, opts);
            r.rows.push_back({fmt_g6(fractions[fi]), fmt_int(static_cast<long long>(i)),
                              fmt_g6(cell.test_accuracy)});
        }
    }
    return r;
}

// One-row report around majority_baseline, mostly for report-schema symmetry.
inline ExperimentReport baseline_report(const Cohort& cohort, double band_kwh) {
    double b = majority_baseline(cohort, band_kwh);
    ExperimentReport r;
    r.name = "baseline";
    r.config.emplace_back("cohort", cohort.provenance);
    r.config.emplace_back("band_kwh", fmt_g6(band_kwh));
    r.columns = {"band_kwh", "majority_baseline"};
    r.rows.push_back({fmt_g6(band_kwh), fmt_g6(b)});
    return r;
}

}  // namespace cadlog
