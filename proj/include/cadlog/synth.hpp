#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadlog/core.hpp"
#include "cadlog/features.hpp"
#include "cadlog/ingest.hpp"
#include "cadlog/learn.hpp"
#include "cadlog/report.hpp"
#include "cadlog/rng.hpp"

// Synthetic cohort generator: per-student session logs in the ingest schema,
// with planted labels, controllable class signal, and optional single-fault
// file corruption. Deterministic for a fixed config.

namespace cadlog {

struct GenConfig {
    std::size_t n_students = 128;
    double success_rate = 0.7;
    double signal = 0.9;        // behavioral difference between classes
    double early_signal = 0.5;  // share of the signal packed into the first 30% of actions
    std::size_t min_actions = 40;
    std::size_t max_actions = 300;
    double corruption_rate = 0.0;
    std::uint64_t seed = 0;
};

struct ManifestRow {
    std::string file;
    int label = 0;
    double net_energy_kwh = 0.0;
    std::size_t n_actions = 0;
    std::string corrupted;  // "", "non_utf8", "missing_comma", "truncated"
};

namespace detail {

// Action-name pools per category. Every name contains exactly one mapping
// keyword so categorization is unambiguous under the builtin mapping.
inline const std::array<std::vector<std::string>, kCategoryCount>& generator_action_names() {
    static const std::array<std::vector<std::string>, kCategoryCount> names = {{
        {"Add Door", "Edit Door", "Remove Door"},
        {"Add Floor", "Edit Floor"},
        {"Add Foundation", "Resize Foundation", "Remove Foundation"},
        {"Add Wall", "Edit Wall", "Resize Wall", "Remove Wall"},
        {"Add Window", "Edit Window", "Remove Window"},
        {"Add Roof", "Edit Roof", "Remove Roof"},
        {"Add Solar Panel", "Move Solar Panel", "Rotate Solar Panel", "Remove Solar Panel"},
        {"Plant Tree", "Move Tree", "Remove Tree"},
        {"Rotate Building", "Resize Building", "Move Building"},
        {"Run Annual Energy Analysis", "Show Heliodon", "Show Annual Energy Graph"},
        {"Change Latitude", "Set Location", "Change Date"},
        {"Change U-Value", "Adjust Thermal Mass"},
        {"Change Color", "Pick Color"},
    }};
    return names;
}

// Rough frequency profile of category use in a design session.
inline const std::vector<double>& base_category_weights() {
    static const std::vector<double> w = {0.5, 0.5, 0.7, 1.5, 1.2, 0.8, 1.5,
                                          0.6, 0.8, 1.2, 0.6, 0.7, 0.4};
    return w;
}

// Categories whose frequency is elevated for the success class.
inline bool signal_category(int code) { return code == 6 || code == 9 || code == 11; }
inline constexpr double kSignalBoost = 2.0;

inline void validate_config(const GenConfig& c) {
    if (c.n_students == 0) throw DomainError("synth: n_students must be >= 1");
    if (!(c.success_rate > 0.0 && c.success_rate < 1.0))
        throw DomainError("synth: success_rate must be in (0, 1)");
    if (c.signal < 0.0 || c.signal > 1.0) throw DomainError("synth: signal must be in [0, 1]");
    if (c.early_signal < 0.0 || c.early_signal > 1.0)
        throw DomainError("synth: early_signal must be in [0, 1]");
    if (c.min_actions < 1 || c.max_actions < c.min_actions)
        throw DomainError("synth: need 1 <= min_actions <= max_actions");
    if (c.corruption_rate < 0.0 || c.corruption_rate >= 1.0)
        throw DomainError("synth: corruption_rate must be in [0, 1)");
}

// Injects exactly one fault of the given kind (0 stray byte, 1 deleted
// comma, 2 truncation) into serialized JSON text.
inline std::string corrupt_bytes(std::string text, int fault, Rng& rng) {
    if (fault == 0) {
        // 0xff inside a string value keeps the fault clearly in-string.
        std::vector<std::size_t> spots;
        for (std::size_t p = text.find("\"action\": \""); p != std::string::npos;
             p = text.find("\"action\": \"", p + 1))
            spots.push_back(p + 12);
        std::size_t at = spots.empty() ? text.size() / 2
                                       : spots[uniform_below(rng, spots.size())];
        text.insert(at, 1, static_cast<char>(0xff));
    } else if (fault == 1) {
        std::vector<std::size_t> commas;
        for (std::size_t p = 0; p < text.size(); ++p)
            if (text[p] == ',') commas.push_back(p);
        if (!commas.empty()) text.erase(commas[uniform_below(rng, commas.size())], 1);
    } else {
        auto lo = static_cast<std::int64_t>(text.size() / 2);
        auto hi = static_cast<std::int64_t>(text.size() * 49 / 50);
        if (hi > lo) text.erase(static_cast<std::size_t>(uniform_int(rng, lo, hi)));
    }
    return text;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate: writes n_students session files plus returns the manifest.
// Success-class students draw actions with elevated SolarPanel/Analysis/
// Thermal frequency (front-loaded per early_signal); energies are separated
// from the +-10,000 kWh band by construction (|e| <= 8,000 for successes,
// |e| >= 15,000 for failures) so planted labels double as an oracle. A
// fraction ~1.5% of students are extreme positive outliers.

inline std::vector<ManifestRow> generate(const GenConfig& config,
                                         const std::filesystem::path& out_dir) {
    detail::validate_config(config);
    std::filesystem::create_directories(out_dir);
    const auto& names = detail::generator_action_names();
    const auto& base_w = detail::base_category_weights();

    int digits = 3;
    for (std::size_t v = config.n_students; v >= 1000; v /= 10) ++digits;

    std::vector<ManifestRow> manifest;
    manifest.reserve(config.n_students);
    for (std::size_t i = 0; i < config.n_students; ++i) {
        Rng rng(mix_seed(config.seed, i));

        int label;
        double energy;
        if (uniform01(rng) < 0.015) {
            label = 0;  // the off-scale outliers are failures by definition
            energy = uniform_range(rng, 150000.0, 700000.0);
        } else if (uniform01(rng) < config.success_rate) {
            label = 1;
            energy = uniform_range(rng, -8000.0, 8000.0);
        } else {
            label = 0;
            energy = uniform_range(rng, 15000.0, 80000.0);
            if (uniform01(rng) < 0.5) energy = -energy;
        }

        auto total = static_cast<std::size_t>(uniform_int(
            rng, static_cast<std::int64_t>(config.min_actions),
            static_cast<std::int64_t>(config.max_actions)));
        std::size_t body = total - 1;  // the last event is the final analysis
        std::size_t early_end = static_cast<std::size_t>(0.3 * static_cast<double>(body));

        TimestampMs ts = 1601542800000LL + static_cast<TimestampMs>(i) * 3600000LL;
        nlohmann::ordered_json events = nlohmann::ordered_json::array();
        std::vector<double> weights = base_w;
        for (std::size_t pos = 0; pos < body; ++pos) {
            double elev = 0.0;
            if (label == 1 && config.signal > 0.0) {
                bool early = pos < early_end;
                elev = config.signal *
                       (early ? config.early_signal / 0.3 : (1.0 - config.early_signal) / 0.7);
            }
            for (int c = 0; c < kCategoryCount; ++c)
                weights[c] = detail::signal_category(c)
                                 ? base_w[c] * (1.0 + detail::kSignalBoost * elev)
                                 : base_w[c];
            int cat = static_cast<int>(weighted_pick(rng, weights));
            const auto& pool = names[static_cast<std::size_t>(cat)];
            std::string name = pool[uniform_below(rng, pool.size())];
            ts += uniform_int(rng, 2000, 30000);
            nlohmann::ordered_json ev = {{"ts", format_iso8601_ms(ts)}, {"action", name}};
            // Interim analysis runs report a provisional (meaningless) figure.
            if (cat == code_of(ActionCategory::Analysis) && uniform01(rng) < 0.5)
                ev["netEnergy"] = uniform_range(rng, -50000.0, 100000.0);
            events.push_back(std::move(ev));
        }
        ts += uniform_int(rng, 2000, 30000);
        events.push_back({{"ts", format_iso8601_ms(ts)},
                          {"action", "Run Annual Energy Analysis"},
                          {"netEnergy", energy}});

        char id_buf[32];
        std::snprintf(id_buf, sizeof id_buf, "s%0*zu", digits, i);
        std::string student_id = id_buf;
        nlohmann::ordered_json doc = {{"student", student_id}, {"events", std::move(events)}};
        std::string text = doc.dump(2);
        text.push_back('\n');

        ManifestRow row;
        row.file = student_id + ".json";
        row.label = label;
        row.net_energy_kwh = energy;
        row.n_actions = total;
        if (config.corruption_rate > 0.0 && uniform01(rng) < config.corruption_rate) {
            int fault = static_cast<int>(uniform_below(rng, 3));
            row.corrupted = fault == 0 ? "non_utf8" : fault == 1 ? "missing_comma" : "truncated";
            text = detail::corrupt_bytes(std::move(text), fault, rng);
        }
        write_file_bytes(out_dir / row.file, text);
        manifest.push_back(std::move(row));
    }
    return manifest;
}

// ---------------------------------------------------------------------------
// verify_manifest: the generator's ground truth checked against a cohort
// loaded back from disk. All three lists must stay empty for a clean
// generation at the default band.

struct VerifyReport {
    std::vector<std::string> label_mismatches;   // binarize(planted energy) != planted label
    std::vector<std::string> missing_files;      // non-corrupted file absent from the cohort
    std::vector<std::string> energy_mismatches;  // recovered energy differs from planted

    bool ok() const {
        return label_mismatches.empty() && missing_files.empty() && energy_mismatches.empty();
    }
};

inline VerifyReport verify_manifest(const std::vector<ManifestRow>& manifest,
                                    const Cohort& cohort, double band_kwh) {
    VerifyReport report;
    for (const auto& row : manifest) {
        if (binarize(row.net_energy_kwh, band_kwh) != row.label)
            report.label_mismatches.push_back(row.file);
        if (!row.corrupted.empty()) continue;
        std::string stem = std::filesystem::path(row.file).stem().string();
        const SessionLog* found = nullptr;
        for (const auto& s : cohort.sessions)
            if (s.student_id == stem) found = &s;
        if (!found) {
            report.missing_files.push_back(row.file);
            continue;
        }
        if (!found->final_net_energy ||
            std::abs(*found->final_net_energy - row.net_energy_kwh) > 1e-9)
            report.energy_mismatches.push_back(row.file);
    }
    return report;
}

// manifest.csv: file,label,net_energy_kwh,n_actions,corrupted
inline std::string render_manifest_csv(
    const std::vector<ManifestRow>& manifest,
    const std::vector<std::pair<std::string, std::string>>& config = {}) {
    std::string out;
    for (const auto& [k, v] : config) out += "# " + k + "=" + v + "\n";
    out += "file,label,net_energy_kwh,n_actions,corrupted\n";
    for (const auto& r : manifest)
        out += r.file + "," + std::to_string(r.label) + "," + fmt_g6(r.net_energy_kwh) + "," +
               std::to_string(r.n_actions) + "," + r.corrupted + "\n";
    return out;
}

}  // namespace cadlog
