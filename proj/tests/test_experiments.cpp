#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>

#include "cadlog/experiments.hpp"
#include "cadlog/rng.hpp"
#include "test_util.hpp"

using namespace cadlog;
using cadlog_test::make_session;

namespace {

// A small cohort with a learnable frequency signal: successes lean on
// category 6, failures on category 3.
Cohort signal_cohort(std::size_t n, std::uint64_t seed, std::size_t min_len = 12,
                     std::size_t max_len = 40) {
    Cohort c;
    c.provenance = "test://signal";
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        bool success = uniform01(rng) < 0.6;
        std::size_t len =
            min_len + uniform_below(rng, max_len - min_len + 1);
        std::vector<int> codes;
        for (std::size_t j = 0; j < len; ++j) {
            if (uniform01(rng) < 0.7) codes.push_back(success ? 6 : 3);
            else codes.push_back(static_cast<int>(uniform_below(rng, 13)));
        }
        double energy = success ? uniform_range(rng, -8000, 8000)
                                : (uniform01(rng) < 0.5 ? 1 : -1) * uniform_range(rng, 15000, 60000);
        c.sessions.push_back(make_session("s" + std::to_string(i), codes, energy));
    }
    return c;
}

double cell_value(const ExperimentReport& r, std::size_t row, std::size_t col) {
    return std::strtod(r.rows[row][col].c_str(), nullptr);
}

}  // namespace

TEST_CASE("histogram puts everything near zero into the central bin") {
    Cohort c;
    for (int i = 0; i < 7; ++i) c.sessions.push_back(make_session("s" + std::to_string(i), {3}, 0.0));
    auto r = histogram_final_energy(c, 1000);
    REQUIRE(r.rows.size() == 1);
    REQUIRE(r.rows[0] == std::vector<std::string>{"-500", "500", "7"});
    REQUIRE(r.columns == std::vector<std::string>{"bin_low", "bin_high", "count"});
}

TEST_CASE("histogram groups values sharing a bin") {
    Cohort c;
    c.sessions.push_back(make_session("a", {3}, -100.0));
    c.sessions.push_back(make_session("b", {3}, 100.0));
    auto r = histogram_final_energy(c, 1000);
    REQUIRE(r.rows.size() == 1);
    REQUIRE(cell_value(r, 0, 2) == 2.0);
}

TEST_CASE("histogram bins are half-open on the upper edge") {
    Cohort c;
    c.sessions.push_back(make_session("a", {3}, 499.999));
    c.sessions.push_back(make_session("b", {3}, 500.0));
    auto r = histogram_final_energy(c, 1000);
    REQUIRE(r.rows.size() == 2);
    REQUIRE(r.rows[0][0] == "-500");
    REQUIRE(r.rows[1][0] == "500");
    REQUIRE(r.rows[1][1] == "1500");
}

TEST_CASE("histogram lists far outliers separately") {
    Cohort c;
    c.sessions.push_back(make_session("a", {3}, 0.0));
    c.sessions.push_back(make_session("b", {3}, 210000.0));
    auto r = histogram_final_energy(c, 5000);
    REQUIRE(r.rows.size() == 2);
    // outlier rows carry bin_low == bin_high == the exact energy
    REQUIRE(r.rows[1][0] == r.rows[1][1]);
    REQUIRE(cell_value(r, 1, 0) == 210000.0);

    REQUIRE_THROWS_AS(histogram_final_energy(Cohort{}, 1000), DomainError);
}

TEST_CASE("linear_pva holds out ceil(0.2 n) students") {
    auto c = signal_cohort(55, 1);
    auto r = linear_pred_vs_actual(c, 7);
    REQUIRE(r.rows.size() == 11);
    REQUIRE(r.columns == std::vector<std::string>{"student_id", "actual_kwh", "predicted_kwh"});
}

TEST_CASE("linear_pva is exact on a cohort with a planted linear law") {
    // energy = 2000 * count(category 6) - 500 * count(category 3) + 300
    Cohort c;
    c.provenance = "test://planted";
    Rng rng(77);
    for (int i = 0; i < 40; ++i) {
        std::vector<int> codes;
        std::size_t len = 5 + uniform_below(rng, 20);
        for (std::size_t j = 0; j < len; ++j)
            codes.push_back(static_cast<int>(uniform_below(rng, 13)));
        double c6 = 0, c3 = 0;
        for (int code : codes) {
            c6 += code == 6;
            c3 += code == 3;
        }
        c.sessions.push_back(
            make_session("s" + std::to_string(i), codes, 2000.0 * c6 - 500.0 * c3 + 300.0));
    }
    auto r = linear_pred_vs_actual(c, 3);
    for (std::size_t i = 0; i < r.rows.size(); ++i)
        REQUIRE(std::abs(cell_value(r, i, 1) - cell_value(r, i, 2)) <= 1e-3);
}

TEST_CASE("linear_pva reports are byte-deterministic") {
    auto c = signal_cohort(30, 2);
    auto a = render_csv(linear_pred_vs_actual(c, 5));
    auto b = render_csv(linear_pred_vs_actual(c, 5));
    REQUIRE(a == b);
}

TEST_CASE("band_sweep covers the default bands and flags degenerate ones") {
    auto c = signal_cohort(40, 3);
    auto bands = default_band_sweep_bands();
    REQUIRE(std::find(bands.begin(), bands.end(), 10000.0) != bands.end());

    auto r = band_sweep(c, {10000.0, 1e7}, 7);
    REQUIRE(r.rows.size() == 2);
    REQUIRE(r.rows[0][3] == "ok");
    REQUIRE(r.rows[1][3] == "single_class");  // every |energy| < 1e7
    REQUIRE(r.rows[1][1].empty());
    REQUIRE(cell_value(r, 1, 2) == 1.0);  // positive fraction
}

TEST_CASE("stability_run emits one accuracy per iteration plus the baseline") {
    auto c = signal_cohort(60, 4);
    auto r = stability_run(c, FeatureKind::Tally, 10, 42);
    REQUIRE(r.rows.size() == 10);
    bool has_baseline = false;
    for (const auto& [k, v] : r.config)
        if (k == "majority_baseline") has_baseline = true;
    REQUIRE(has_baseline);
    for (std::size_t i = 0; i < 10; ++i) {
        REQUIRE(r.rows[i][0] == std::to_string(i));
        double acc = cell_value(r, i, 1);
        REQUIRE(acc >= 0.0);
        REQUIRE(acc <= 1.0);
    }
}

TEST_CASE("a strong-signal cohort stays above chance across iterations") {
    auto c = signal_cohort(80, 5);
    auto r = stability_run(c, FeatureKind::Tally, 10, 1);
    for (std::size_t i = 0; i < r.rows.size(); ++i) REQUIRE(cell_value(r, i, 1) > 0.5);
}

TEST_CASE("prefix_sweep emits fractions x iterations records") {
    auto c = signal_cohort(30, 6, 8, 20);
    auto r = prefix_sweep(c, default_prefix_fractions(), 3, 9);
    REQUIRE(r.rows.size() == 30);
    REQUIRE(r.rows[0][0] == "0.1");
    REQUIRE(r.rows[29][0] == "1");
    REQUIRE(r.columns == std::vector<std::string>{"fraction", "iteration", "test_accuracy"});
}

TEST_CASE("prefix_sweep at fraction 1.0 matches a sequence stability run") {
    auto c = signal_cohort(40, 8, 8, 24);
    const std::size_t iters = 4;
    auto sweep = prefix_sweep(c, default_prefix_fractions(), iters, 100);
    // fraction 1.0 is index 9, so its cells split with seed 100 + 9000 + i
    auto stab = stability_run(c, FeatureKind::Sequence, iters, 100 + 9000);
    for (std::size_t i = 0; i < iters; ++i) {
        const auto& sweep_row = sweep.rows[9 * iters + i];
        REQUIRE(sweep_row[0] == "1");
        REQUIRE(sweep_row[2] == stab.rows[i][1]);
    }
}

TEST_CASE("majority_baseline") {
    Cohort all_pos;
    for (int i = 0; i < 4; ++i) all_pos.sessions.push_back(make_session("s" + std::to_string(i), {3}, 0.0));
    REQUIRE(majority_baseline(all_pos, 10000) == 1.0);

    Cohort half;
    half.sessions.push_back(make_session("a", {3}, 0.0));
    half.sessions.push_back(make_session("b", {3}, 50000.0));
    REQUIRE(majority_baseline(half, 10000) == 0.5);

    Cohort skewed;  // 90 successes, 38 failures
    for (int i = 0; i < 90; ++i) skewed.sessions.push_back(make_session("p" + std::to_string(i), {3}, 0.0));
    for (int i = 0; i < 38; ++i) skewed.sessions.push_back(make_session("n" + std::to_string(i), {3}, 99999.0));
    REQUIRE(majority_baseline(skewed, 10000) == Catch::Approx(0.7031).margin(5e-5));
}

TEST_CASE("report config round-trips through the CSV preamble") {
    auto c = signal_cohort(40, 10);
    auto r = stability_run(c, FeatureKind::Tally, 3, 5);
    auto parsed = parse_report_config(render_csv(r));
    REQUIRE(parsed.name == "stability");
    REQUIRE(parsed.config == r.config);
}

TEST_CASE("rendering is byte-deterministic and validates formats") {
    auto c = signal_cohort(40, 11);
    auto r = stability_run(c, FeatureKind::Tally, 5, 5);
    REQUIRE(render_report(r, "csv") == render_report(r, "csv"));
    REQUIRE(render_report(r, "svg") == render_report(r, "svg"));
    REQUIRE_THROWS_AS(render_report(r, "png"), DomainError);
}

TEST_CASE("stability SVG draws one marker per iteration") {
    auto c = signal_cohort(40, 12);
    auto r = stability_run(c, FeatureKind::Tally, 10, 5);
    auto svg_text = render_report(r, "svg");
    std::size_t markers = 0;
    for (std::size_t p = svg_text.find("<circle"); p != std::string::npos;
         p = svg_text.find("<circle", p + 1))
        ++markers;
    REQUIRE(markers == 10);
    REQUIRE(svg_text.find("</svg>") != std::string::npos);
}

TEST_CASE("histogram SVG draws bars") {
    Cohort c;
    c.sessions.push_back(make_session("a", {3}, 0.0));
    c.sessions.push_back(make_session("b", {3}, 4000.0));
    c.sessions.push_back(make_session("c", {3}, 210000.0));
    auto svg_text = render_report(histogram_final_energy(c, 1000), "svg");
    REQUIRE(svg_text.find("<rect") != std::string::npos);
    REQUIRE(svg_text.find("off scale") != std::string::npos);
}
