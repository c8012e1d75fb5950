#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadlog/core.hpp"
#include "cadlog/features.hpp"
#include "cadlog/rng.hpp"

// From-scratch linear and logistic regression, with outcome binarization,
// seeded train/test splitting, and accuracy metrics.

namespace cadlog {

// ---------------------------------------------------------------------------
// Datasets.

enum class TargetKind { Energy, SuccessLabel };

struct Dataset {
    FeatureMatrix features;
    std::vector<double> targets;  // kWh, or 0/1 labels
    TargetKind target_kind = TargetKind::Energy;

    std::size_t rows() const { return features.rows(); }
};

struct SplitSpec {
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    bool stratified = false;  // sensitivity analysis only; plain shuffle by default
};

struct LogisticHyper {
    double learning_rate = 0.1;
    std::size_t max_iters = 5000;
    double l2_strength = 1.0;
    double tolerance = 1e-6;  // on the gradient infinity norm
};

// ---------------------------------------------------------------------------
// Labels.

// 1 iff the final net energy lies within the closed band [-E, +E].
inline int binarize(double net_energy_kwh, double band_kwh) {
    if (!(band_kwh > 0.0)) throw DomainError("binarize: band must be positive");
    if (!std::isfinite(net_energy_kwh)) throw DomainError("binarize: non-finite energy");
    return (net_energy_kwh >= -band_kwh && net_energy_kwh <= band_kwh) ? 1 : 0;
}

// Keeps only sessions that carry a final net energy value.
inline Cohort filter_labeled(const Cohort& cohort) {
    Cohort out;
    out.provenance = cohort.provenance;
    for (const auto& s : cohort.sessions)
        if (s.final_net_energy.has_value()) out.sessions.push_back(s);
    return out;
}

// ---------------------------------------------------------------------------
// Train/test split. Test row count is ceil(test_fraction * n); rows are
// picked by a seeded shuffle, then listed in their original order.

namespace detail {

// ceil with a snap to nearest-integer, absorbing float noise in f * n.
inline std::size_t ceil_fraction(std::size_t n, double fraction) {
    double t = fraction * static_cast<double>(n);
    double r = std::round(t);
    double c = (std::abs(t - r) < 1e-9) ? r : std::ceil(t);
    return std::min(static_cast<std::size_t>(c), n);
}

inline Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.target_kind = d.target_kind;
    out.features.cols = d.features.cols;
    out.features.kind = d.features.kind;
    out.features.pad_code = d.features.pad_code;
    out.features.pad_length = d.features.pad_length;
    out.features.data.reserve(idx.size() * d.features.cols);
    for (std::size_t i : idx) {
        auto row = d.features.row(i);
        out.features.data.insert(out.features.data.end(), row.begin(), row.end());
        out.features.row_ids.push_back(d.features.row_ids[i]);
        out.targets.push_back(d.targets[i]);
    }
    return out;
}

}  // namespace detail

// Seeded shuffle split over row indices; both parts come back in original
// row order. The targets pointer is only consulted for the stratified variant.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, const SplitSpec& spec, const std::vector<double>* targets = nullptr) {
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
        throw DomainError("split: test_fraction must be in (0, 1)");
    if (n < 5) throw DomainError("split: need at least 5 rows, got " + std::to_string(n));

    std::vector<std::size_t> test_idx;
    Rng rng(spec.seed);
    if (!spec.stratified) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        shuffle_indices(order, rng);
        std::size_t n_test = detail::ceil_fraction(n, spec.test_fraction);
        test_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    } else {
        if (!targets || targets->size() != n)
            throw DomainError("split: stratified split needs targets");
        // Per-class shuffle; each class contributes ceil(f * n_class) rows.
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < n; ++i) ((*targets)[i] > 0.5 ? pos : neg).push_back(i);
        for (auto* cls : {&pos, &neg}) {
            shuffle_indices(*cls, rng);
            std::size_t k = detail::ceil_fraction(cls->size(), spec.test_fraction);
            test_idx.insert(test_idx.end(), cls->begin(),
                            cls->begin() + static_cast<std::ptrdiff_t>(k));
        }
    }
    std::sort(test_idx.begin(), test_idx.end());
    std::vector<bool> in_test(n, false);
    for (std::size_t i : test_idx) in_test[i] = true;
    std::vector<std::size_t> train_idx;
    train_idx.reserve(n - test_idx.size());
    for (std::size_t i = 0; i < n; ++i)
        if (!in_test[i]) train_idx.push_back(i);
    return {std::move(train_idx), std::move(test_idx)};
}

inline std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& spec) {
    const std::size_t n = d.rows();
    if (d.targets.size() != n) throw DomainError("split: targets length != row count");
    auto [train_idx, test_idx] = split_indices(n, spec, &d.targets);
    return {detail::take_rows(d, train_idx), detail::take_rows(d, test_idx)};
}

// ---------------------------------------------------------------------------
// Linear regression: ordinary least squares on [1 | X] via normal equations,
// with a 1e-8 ridge jitter on the Gram diagonal for numerical safety.

namespace detail {

// Solves the SPD system G x = b in place via Cholesky.
inline std::vector<double> solve_spd(std::vector<double> g, std::vector<double> b,
                                     std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = g[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= g[j * n + k] * g[j * n + k];
        if (!(d > 0.0)) throw DomainError("linear solve: matrix not positive definite");
        double dj = std::sqrt(d);
        g[j * n + j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = g[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= g[i * n + k] * g[j * n + k];
            g[i * n + j] = v / dj;
        }
    }
    // Forward then back substitution.
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= g[i * n + k] * b[k];
        b[i] = v / g[i * n + i];
    }
    for (std::size_t ii = n; ii > 0; --ii) {
        std::size_t i = ii - 1;
        double v = b[i];
        for (std::size_t k = i + 1; k < n; ++k) v -= g[k * n + i] * b[k];
        b[i] = v / g[i * n + i];
    }
    return b;
}

}  // namespace detail

inline constexpr double kGramJitter = 1e-8;

inline ModelWeights fit_linear(const Dataset& train) {
    if (train.target_kind != TargetKind::Energy)
        throw DomainError("fit_linear: expected energy targets");
    const std::size_t n = train.rows(), k = train.features.cols;
    if (n < 2) throw DomainError("fit_linear: need at least 2 rows");
    const std::size_t m = k + 1;  // intercept column first

    std::vector<double> gram(m * m, 0.0), rhs(m, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = train.features.row(i);
        double y = train.targets[i];
        gram[0] += 1.0;
        rhs[0] += y;
        for (std::size_t a = 0; a < k; ++a) {
            gram[(a + 1) * m] += x[a];
            rhs[a + 1] += x[a] * y;
            for (std::size_t b = 0; b <= a; ++b) gram[(a + 1) * m + (b + 1)] += x[a] * x[b];
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) gram[a * m + b] = gram[b * m + a];
        gram[a * m + a] += kGramJitter;
    }
    auto beta = detail::solve_spd(std::move(gram), std::move(rhs), m);

    ModelWeights w;
    w.family = ModelFamily::Linear;
    w.feature_kind = train.features.kind;
    w.pad_length = train.features.pad_length;
    w.pad_code = train.features.pad_code;
    w.intercept = beta[0];
    w.coefficients.assign(beta.begin() + 1, beta.end());
    return w;
}

inline std::vector<double> predict_linear(const ModelWeights& w, const FeatureMatrix& features) {
    if (w.family != ModelFamily::Linear) throw DomainError("predict_linear: not a linear model");
    if (w.coefficients.size() != features.cols)
        throw DomainError("predict_linear: feature width mismatch");
    std::vector<double> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto x = features.row(i);
        double z = w.intercept;
        for (std::size_t j = 0; j < features.cols; ++j) z += w.coefficients[j] * x[j];
        out[i] = z;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Logistic regression: regularized negative log-likelihood, full-batch
// gradient descent from zero weights.

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

namespace detail {

inline double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

struct LossGrad {
    double loss = 0.0;
    double grad_intercept = 0.0;
    std::vector<double> grad_coefficients;

    double grad_inf_norm() const {
        double m = std::abs(grad_intercept);
        for (double g : grad_coefficients) m = std::max(m, std::abs(g));
        return m;
    }
};

// loss = mean BCE + (lambda / 2n) * ||coefficients||^2, intercept
// unregularized; the gradient is exact and analytic.
inline LossGrad logistic_loss_grad(const ModelWeights& w, const Dataset& d,
                                   const LogisticHyper& hyper) {
    if (d.target_kind != TargetKind::SuccessLabel)
        throw DomainError("logistic_loss_grad: expected 0/1 labels");
    if (w.coefficients.size() != d.features.cols)
        throw DomainError("logistic_loss_grad: feature width mismatch");
    const std::size_t n = d.rows(), k = d.features.cols;
    if (n == 0) throw DomainError("logistic_loss_grad: empty dataset");

    LossGrad out;
    out.grad_coefficients.assign(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto x = d.features.row(i);
        double z = w.intercept;
        for (std::size_t j = 0; j < k; ++j) z += w.coefficients[j] * x[j];
        double y = d.targets[i];
        out.loss += detail::softplus(z) - y * z;
        double err = sigmoid(z) - y;
        out.grad_intercept += err;
        for (std::size_t j = 0; j < k; ++j) out.grad_coefficients[j] += err * x[j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.loss *= inv_n;
    out.grad_intercept *= inv_n;
    double reg = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        out.grad_coefficients[j] =
            out.grad_coefficients[j] * inv_n + hyper.l2_strength * inv_n * w.coefficients[j];
        reg += w.coefficients[j] * w.coefficients[j];
    }
    out.loss += 0.5 * hyper.l2_strength * inv_n * reg;
    return out;
}

struct LogisticFit {
    ModelWeights weights;
    double final_loss = 0.0;
    std::size_t iterations = 0;
};

// Fixed-step descent with per-step halving whenever a step would increase
// the loss, so the descent property holds for any learning rate.
inline LogisticFit fit_logistic(const Dataset& train, const LogisticHyper& hyper = {}) {
    if (train.target_kind != TargetKind::SuccessLabel)
        throw DomainError("fit_logistic: expected 0/1 labels");
    bool has_pos = false, has_neg = false;
    for (double y : train.targets) (y > 0.5 ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg)
        throw DataError("fit_logistic: degenerate labels (single class in training set)");
    if (!(hyper.learning_rate > 0.0) || hyper.max_iters == 0 || !(hyper.l2_strength > 0.0) ||
        !(hyper.tolerance > 0.0))
        throw DomainError("fit_logistic: hyperparameters must be positive");

    LogisticFit fit;
    ModelWeights& w = fit.weights;
    w.family = ModelFamily::Logistic;
    w.feature_kind = train.features.kind;
    w.pad_length = train.features.pad_length;
    w.pad_code = train.features.pad_code;
    w.coefficients.assign(train.features.cols, 0.0);
    w.intercept = 0.0;

    LossGrad lg = logistic_loss_grad(w, train, hyper);
    for (std::size_t iter = 0; iter < hyper.max_iters; ++iter) {
        if (lg.grad_inf_norm() <= hyper.tolerance) break;
        double step = hyper.learning_rate;
        ModelWeights next = w;
        LossGrad next_lg;
        while (true) {
            next.intercept = w.intercept - step * lg.grad_intercept;
            for (std::size_t j = 0; j < w.coefficients.size(); ++j)
                next.coefficients[j] = w.coefficients[j] - step * lg.grad_coefficients[j];
            next_lg = logistic_loss_grad(next, train, hyper);
            if (next_lg.loss <= lg.loss || step <= 1e-12) break;
            step *= 0.5;
        }
        if (next_lg.loss > lg.loss) break;  // no descent direction left
        w.intercept = next.intercept;
        w.coefficients = std::move(next.coefficients);
        lg = std::move(next_lg);
        fit.iterations = iter + 1;
    }
    fit.final_loss = lg.loss;
    return fit;
}

inline std::vector<int> predict_logistic(const ModelWeights& w, const FeatureMatrix& features,
                                         double threshold = 0.5) {
    if (w.family != ModelFamily::Logistic)
        throw DomainError("predict_logistic: not a logistic model");
    if (w.coefficients.size() != features.cols)
        throw DomainError("predict_logistic: feature width mismatch");
    std::vector<int> out(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto x = features.row(i);
        double z = w.intercept;
        for (std::size_t j = 0; j < features.cols; ++j) z += w.coefficients[j] * x[j];
        out[i] = sigmoid(z) >= threshold ? 1 : 0;
    }
    return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& actual) {
    if (predicted.empty() || predicted.size() != actual.size())
        throw DomainError("accuracy: empty or mismatched label vectors");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == actual[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// ---------------------------------------------------------------------------
// Model serialization.

inline nlohmann::json model_to_json(const ModelWeights& w) {
    nlohmann::json j;
    j["family"] = family_name(w.family);
    j["intercept"] = w.intercept;
    j["coefficients"] = w.coefficients;
    j["feature_kind"] = feature_kind_name(w.feature_kind);
    if (w.standardization) {
        nlohmann::json st = nlohmann::json::array();
        for (const auto& s : *w.standardization) st.push_back({s.mean, s.stddev});
        j["standardization"] = st;
    } else {
        j["standardization"] = nullptr;
    }
    j["pad_length"] = w.pad_length;
    j["pad_code"] = w.pad_code;
    return j;
}

inline ModelWeights model_from_json(const nlohmann::json& j) {
    ModelWeights w;
    std::string fam = j.at("family").get<std::string>();
    if (fam == "linear") w.family = ModelFamily::Linear;
    else if (fam == "logistic") w.family = ModelFamily::Logistic;
    else throw DataError("model file: unknown family: " + fam);
    std::string kind = j.at("feature_kind").get<std::string>();
    if (kind == "tally") w.feature_kind = FeatureKind::Tally;
    else if (kind == "sequence") w.feature_kind = FeatureKind::Sequence;
    else throw DataError("model file: unknown feature_kind: " + kind);
    w.intercept = j.at("intercept").get<double>();
    w.coefficients = j.at("coefficients").get<std::vector<double>>();
    if (j.contains("standardization") && !j["standardization"].is_null()) {
        std::vector<FeatureStats> st;
        for (const auto& p : j["standardization"])
            st.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        w.standardization = std::move(st);
    }
    w.pad_length = j.value("pad_length", std::size_t{0});
    w.pad_code = j.value("pad_code", -1);
    return w;
}

}  // namespace cadlog
