#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cadlog/learn.hpp"
#include "cadlog/rng.hpp"

using namespace cadlog;

namespace {

FeatureMatrix matrix(std::size_t cols, std::vector<double> data) {
    FeatureMatrix m;
    m.cols = cols;
    m.data = std::move(data);
    for (std::size_t i = 0; i < m.data.size() / cols; ++i)
        m.row_ids.push_back("r" + std::to_string(i));
    return m;
}

Dataset dataset(std::size_t cols, std::vector<double> data, std::vector<double> targets,
                TargetKind kind) {
    Dataset d;
    d.features = matrix(cols, std::move(data));
    d.targets = std::move(targets);
    d.target_kind = kind;
    return d;
}

}  // namespace

TEST_CASE("binarize uses an inclusive symmetric band") {
    REQUIRE(binarize(0, 10000) == 1);
    REQUIRE(binarize(-10000, 10000) == 1);
    REQUIRE(binarize(10000, 10000) == 1);
    REQUIRE(binarize(10000.0001, 10000) == 0);
    REQUIRE(binarize(210000, 10000) == 0);
    REQUIRE(binarize(660000, 10000) == 0);
    REQUIRE_THROWS_AS(binarize(std::nan(""), 10000), DomainError);
    REQUIRE_THROWS_AS(binarize(0, 0), DomainError);
}

TEST_CASE("binarize is symmetric in the energy sign") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        double e = uniform_range(rng, -30000, 30000);
        double band = uniform_range(rng, 1, 20000);
        REQUIRE(binarize(e, band) == binarize(-e, band));
    }
}

TEST_CASE("filter_labeled keeps only sessions with an outcome") {
    Cohort c;
    c.sessions.resize(3);
    c.sessions[0].student_id = "a";
    c.sessions[0].final_net_energy = 5.0;
    c.sessions[1].student_id = "b";  // no energy
    c.sessions[2].student_id = "c";
    c.sessions[2].final_net_energy = -7.0;
    auto f = filter_labeled(c);
    REQUIRE(f.sessions.size() == 2);
    REQUIRE(f.sessions[0].student_id == "a");
    REQUIRE(f.sessions[1].student_id == "c");
    REQUIRE(filter_labeled(Cohort{}).sessions.empty());
}

TEST_CASE("split sizes follow the ceil rule") {
    auto d55 = dataset(1, std::vector<double>(55, 0.0), std::vector<double>(55, 0.0),
                       TargetKind::Energy);
    auto [train, test] = split(d55, SplitSpec{0.2, 1});
    REQUIRE(test.rows() == 11);
    REQUIRE(train.rows() == 44);

    auto d128 = dataset(1, std::vector<double>(128, 0.0), std::vector<double>(128, 0.0),
                        TargetKind::Energy);
    auto [tr2, te2] = split(d128, SplitSpec{0.2, 1});
    REQUIRE(te2.rows() == 26);
    REQUIRE(tr2.rows() == 102);
}

TEST_CASE("split is deterministic per seed and partitions the rows") {
    std::vector<double> data, targets;
    for (int i = 0; i < 40; ++i) {
        data.push_back(i);
        targets.push_back(i % 2);
    }
    auto d = dataset(1, data, targets, TargetKind::SuccessLabel);

    auto [a_train, a_test] = split(d, SplitSpec{0.2, 99});
    auto [b_train, b_test] = split(d, SplitSpec{0.2, 99});
    REQUIRE(a_test.features.row_ids == b_test.features.row_ids);
    REQUIRE(a_train.features.row_ids == b_train.features.row_ids);

    auto [c_train, c_test] = split(d, SplitSpec{0.2, 100});
    REQUIRE(a_test.features.row_ids != c_test.features.row_ids);  // overwhelmingly likely

    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto [train, test] = split(d, SplitSpec{0.2, seed});
        std::vector<std::string> all = train.features.row_ids;
        all.insert(all.end(), test.features.row_ids.begin(), test.features.row_ids.end());
        std::sort(all.begin(), all.end());
        REQUIRE(std::adjacent_find(all.begin(), all.end()) == all.end());
        REQUIRE(all.size() == 40);
    }
}

TEST_CASE("split rejects tiny datasets") {
    auto d = dataset(1, {1, 2, 3, 4}, {1, 2, 3, 4}, TargetKind::Energy);
    REQUIRE_THROWS_AS(split(d, SplitSpec{0.2, 1}), DomainError);
}

TEST_CASE("stratified split keeps both classes in the test part") {
    std::vector<double> data, targets;
    for (int i = 0; i < 50; ++i) {
        data.push_back(i);
        targets.push_back(i < 45 ? 1.0 : 0.0);  // 45/5 imbalance
    }
    auto d = dataset(1, data, targets, TargetKind::SuccessLabel);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto [train, test] = split(d, SplitSpec{0.2, seed, true});
        std::size_t pos = 0, neg = 0;
        for (double y : test.targets) (y > 0.5 ? pos : neg) += 1;
        REQUIRE(pos == 9);  // ceil(0.2 * 45)
        REQUIRE(neg == 1);  // ceil(0.2 * 5)
    }
}

TEST_CASE("fit_linear interpolates two points exactly") {
    auto d = dataset(1, {0, 1}, {1, 3}, TargetKind::Energy);
    auto w = fit_linear(d);
    REQUIRE(w.intercept == Catch::Approx(1.0).margin(1e-6));
    REQUIRE(w.coefficients[0] == Catch::Approx(2.0).margin(1e-6));
}

TEST_CASE("fit_linear on constant targets returns the constant intercept") {
    Rng rng(7);
    std::vector<double> data;
    for (int i = 0; i < 30; ++i) data.push_back(uniform_range(rng, -5, 5));
    auto d = dataset(1, data, std::vector<double>(30, 42.0), TargetKind::Energy);
    auto w = fit_linear(d);
    REQUIRE(w.intercept == Catch::Approx(42.0).margin(1e-5));
    REQUIRE(w.coefficients[0] == Catch::Approx(0.0).margin(1e-5));
}

TEST_CASE("fit_linear recovers planted coefficients from noiseless data") {
    Rng rng(17);
    const std::size_t n = 20, k = 5;
    std::vector<double> planted = {3.0, -2.0, 0.5, 8.0, -1.25};
    const double planted_intercept = 4.5;
    std::vector<double> data, targets;
    for (std::size_t i = 0; i < n; ++i) {
        double y = planted_intercept;
        for (std::size_t j = 0; j < k; ++j) {
            double x = uniform_range(rng, -1, 1);
            data.push_back(x);
            y += planted[j] * x;
        }
        targets.push_back(y);
    }
    auto d = dataset(k, data, targets, TargetKind::Energy);
    auto w = fit_linear(d);
    REQUIRE(w.intercept == Catch::Approx(planted_intercept).margin(1e-6));
    for (std::size_t j = 0; j < k; ++j)
        REQUIRE(w.coefficients[j] == Catch::Approx(planted[j]).margin(1e-6));

    auto pred = predict_linear(w, d.features);
    for (std::size_t i = 0; i < n; ++i)
        REQUIRE(pred[i] == Catch::Approx(targets[i]).margin(1e-6));
}

TEST_CASE("fit_linear rejects bad inputs") {
    auto labels = dataset(1, {0, 1}, {0, 1}, TargetKind::SuccessLabel);
    REQUIRE_THROWS_AS(fit_linear(labels), DomainError);
    auto tiny = dataset(1, {0}, {1}, TargetKind::Energy);
    REQUIRE_THROWS_AS(fit_linear(tiny), DomainError);
}

TEST_CASE("predict_linear basics") {
    ModelWeights w;
    w.family = ModelFamily::Linear;
    w.coefficients = {0.0, 0.0};
    auto m = matrix(2, {1, 2, 3, 4});
    auto p = predict_linear(w, m);
    REQUIRE(p == std::vector<double>{0, 0});

    w.intercept = 7.5;
    p = predict_linear(w, m);
    REQUIRE(p == std::vector<double>{7.5, 7.5});

    ModelWeights narrow = w;
    narrow.coefficients = {1.0};
    REQUIRE_THROWS_AS(predict_linear(narrow, m), DomainError);
}

TEST_CASE("logistic loss at zero weights with balanced labels is ln 2") {
    auto d = dataset(1, {1, -1, 2, -2}, {1, 0, 1, 0}, TargetKind::SuccessLabel);
    ModelWeights w;
    w.family = ModelFamily::Logistic;
    w.coefficients = {0.0};
    auto lg = logistic_loss_grad(w, d, LogisticHyper{});
    REQUIRE(lg.loss == Catch::Approx(std::log(2.0)).margin(1e-12));
}

TEST_CASE("intercept gradient at zero weights is 0.5 - mean(y)") {
    auto d = dataset(1, {1, 2, 3, 4, 5}, {1, 1, 1, 0, 1}, TargetKind::SuccessLabel);
    ModelWeights w;
    w.family = ModelFamily::Logistic;
    w.coefficients = {0.0};
    auto lg = logistic_loss_grad(w, d, LogisticHyper{});
    REQUIRE(lg.grad_intercept == Catch::Approx(0.5 - 0.8).margin(1e-12));
}

TEST_CASE("logistic gradient matches central finite differences") {
    Rng rng(23);
    LogisticHyper hyper;
    const double h = 1e-5;
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 3 + uniform_below(rng, 18);
        std::size_t k = 1 + uniform_below(rng, 8);
        std::vector<double> data, targets;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j) data.push_back(uniform_range(rng, -2, 2));
            targets.push_back(uniform01(rng) < 0.5 ? 0.0 : 1.0);
        }
        auto d = dataset(k, data, targets, TargetKind::SuccessLabel);
        ModelWeights w;
        w.family = ModelFamily::Logistic;
        w.intercept = uniform_range(rng, -1, 1);
        for (std::size_t j = 0; j < k; ++j) w.coefficients.push_back(uniform_range(rng, -1, 1));

        auto lg = logistic_loss_grad(w, d, hyper);
        auto check = [&](double analytic, double* slot) {
            double keep = *slot;
            *slot = keep + h;
            double up = logistic_loss_grad(w, d, hyper).loss;
            *slot = keep - h;
            double down = logistic_loss_grad(w, d, hyper).loss;
            *slot = keep;
            double fd = (up - down) / (2 * h);
            REQUIRE(std::abs(fd - analytic) / std::max(1.0, std::abs(analytic)) < 1e-5);
        };
        check(lg.grad_intercept, &w.intercept);
        for (std::size_t j = 0; j < k; ++j) check(lg.grad_coefficients[j], &w.coefficients[j]);
    }
}

TEST_CASE("fit_logistic separates separable data and descends") {
    std::vector<double> data, targets;
    for (int i = 0; i < 10; ++i) {
        data.push_back(-1);
        targets.push_back(0);
        data.push_back(1);
        targets.push_back(1);
    }
    auto d = dataset(1, data, targets, TargetKind::SuccessLabel);
    auto fit = fit_logistic(d);
    auto pred = predict_logistic(fit.weights, d.features);
    std::vector<int> want;
    for (double y : targets) want.push_back(y > 0.5 ? 1 : 0);
    REQUIRE(accuracy(pred, want) == 1.0);
    REQUIRE(fit.final_loss <= std::log(2.0));  // loss at the zero start
    REQUIRE(fit.iterations > 0);
}

TEST_CASE("fit_logistic keeps a zero intercept on symmetric data") {
    Rng rng(31);
    std::vector<double> data, targets;
    for (int i = 0; i < 25; ++i) {
        double x = uniform_range(rng, 0.1, 3.0);
        data.push_back(x);
        targets.push_back(1);
        data.push_back(-x);
        targets.push_back(0);
    }
    auto d = dataset(1, data, targets, TargetKind::SuccessLabel);
    auto fit = fit_logistic(d);
    REQUIRE(std::abs(fit.weights.intercept) < 1e-6);
}

TEST_CASE("fit_logistic rejects single-class training sets") {
    auto d = dataset(1, {1, 2, 3}, {1, 1, 1}, TargetKind::SuccessLabel);
    REQUIRE_THROWS_AS(fit_logistic(d), DataError);
}

TEST_CASE("predict_logistic thresholds at sigmoid >= 0.5") {
    ModelWeights w;
    w.family = ModelFamily::Logistic;
    w.coefficients = {0.0};
    auto m = matrix(1, {-5, 0, 5});
    REQUIRE(predict_logistic(w, m) == std::vector<int>{1, 1, 1});  // sigmoid(0) == 0.5

    w.intercept = 50.0;
    REQUIRE(predict_logistic(w, m) == std::vector<int>{1, 1, 1});
    w.intercept = 0.0;
    w.coefficients = {1.0};
    REQUIRE(predict_logistic(w, m) == std::vector<int>{0, 1, 1});
    REQUIRE(predict_logistic(w, m, 0.6) == std::vector<int>{0, 0, 1});
}

TEST_CASE("accuracy") {
    REQUIRE(accuracy({1, 0, 1}, {1, 0, 1}) == 1.0);
    REQUIRE(accuracy({1, 0, 1}, {0, 1, 0}) == 0.0);
    // 7 of 11 correct, an 11-student test-set scale
    std::vector<int> pred = {1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    std::vector<int> act = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    REQUIRE(accuracy(pred, act) == Catch::Approx(0.6364).margin(5e-5));
    REQUIRE_THROWS_AS(accuracy({}, {}), DomainError);
    REQUIRE_THROWS_AS(accuracy({1}, {1, 0}), DomainError);
}

TEST_CASE("standardization absorbs per-feature rescaling") {
    // Power-of-two scale factors keep every float op exact, so the whole
    // standardized pipeline must be bit-identical.
    Rng rng(37);
    const std::size_t n = 30, k = 4;
    std::vector<double> data, targets;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) data.push_back(uniform_range(rng, -4, 4));
        targets.push_back(uniform01(rng) < 0.5 ? 0.0 : 1.0);
    }
    targets[0] = 0.0;
    targets[1] = 1.0;
    auto d = dataset(k, data, targets, TargetKind::SuccessLabel);

    const double scales[k] = {0.5, 2.0, 1024.0, 0.03125};
    Dataset scaled = d;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) scaled.features.at(i, j) *= scales[j];

    auto run = [&](const Dataset& input) {
        auto stats = fit_standardizer(input.features);
        Dataset std_input = input;
        std_input.features = apply_standardizer(input.features, stats);
        auto fit = fit_logistic(std_input);
        return predict_logistic(fit.weights, std_input.features);
    };
    REQUIRE(run(d) == run(scaled));
}

TEST_CASE("model json round-trip") {
    ModelWeights w;
    w.family = ModelFamily::Logistic;
    w.feature_kind = FeatureKind::Sequence;
    w.intercept = -0.75;
    w.coefficients = {1.5, -2.25, 0.0};
    w.standardization = std::vector<FeatureStats>{{1.0, 2.0}, {0.0, 1.0}, {-3.0, 0.5}};
    w.pad_length = 3;
    w.pad_code = 13;
    auto back = model_from_json(model_to_json(w));
    REQUIRE(back.family == w.family);
    REQUIRE(back.feature_kind == w.feature_kind);
    REQUIRE(back.intercept == w.intercept);
    REQUIRE(back.coefficients == w.coefficients);
    REQUIRE(back.pad_length == 3);
    REQUIRE(back.pad_code == 13);
    REQUIRE(back.standardization.has_value());
    REQUIRE((*back.standardization)[2].mean == -3.0);
    REQUIRE((*back.standardization)[2].stddev == 0.5);
}
