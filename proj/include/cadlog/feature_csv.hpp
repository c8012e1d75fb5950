#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cadlog/core.hpp"
#include "cadlog/features.hpp"
#include "cadlog/report.hpp"

// features.csv: student_id, f0..f(k-1), final_net_energy (empty when the
// session carries none). Leading `# key=value` lines record the encoding
// config.

namespace cadlog {

struct FeatureTable {
    FeatureMatrix features;
    std::vector<std::optional<double>> energies;
    std::vector<std::pair<std::string, std::string>> config;
};

inline FeatureTable encode_features(const Cohort& cohort, FeatureKind kind,
                                    std::optional<double> prefix_fraction = std::nullopt) {
    if (cohort.sessions.empty()) throw DataError("encode: empty cohort");
    if (prefix_fraction && kind != FeatureKind::Sequence)
        throw DomainError("encode: --prefix applies to sequence features only");

    FeatureTable t;
    std::vector<std::string> ids;
    for (const auto& s : cohort.sessions) {
        ids.push_back(s.student_id);
        t.energies.push_back(s.final_net_energy);
    }
    if (kind == FeatureKind::Tally) {
        std::vector<CountVector> tallies;
        for (const auto& s : cohort.sessions) tallies.push_back(tally(s));
        t.features = tally_matrix(tallies, std::move(ids));
    } else {
        std::vector<CodeSequence> seqs;
        for (const auto& s : cohort.sessions) {
            CodeSequence seq = encode_sequence(s);
            if (prefix_fraction) seq = prefix(seq, *prefix_fraction);
            seqs.push_back(std::move(seq));
        }
        t.features = pad_matrix(seqs, std::move(ids));
    }
    t.config.emplace_back("cohort", cohort.provenance);
    t.config.emplace_back("kind", feature_kind_name(kind));
    if (prefix_fraction) t.config.emplace_back("prefix", fmt_g6(*prefix_fraction));
    if (kind == FeatureKind::Sequence) {
        t.config.emplace_back("pad_code", std::to_string(t.features.pad_code));
        t.config.emplace_back("pad_length", std::to_string(t.features.pad_length));
    }
    return t;
}

inline std::string render_features_csv(const FeatureTable& t) {
    std::string out;
    for (const auto& [k, v] : t.config) out += "# " + k + "=" + v + "\n";
    out += "student_id";
    for (std::size_t j = 0; j < t.features.cols; ++j) out += ",f" + std::to_string(j);
    out += ",final_net_energy\n";
    for (std::size_t i = 0; i < t.features.rows(); ++i) {
        out += t.features.row_ids[i];
        for (std::size_t j = 0; j < t.features.cols; ++j)
            out += "," + fmt_g6(t.features.at(i, j));
        out += ",";
        if (t.energies[i]) out += fmt_g6(*t.energies[i]);
        out += "\n";
    }
    return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return cells;
}

}  // namespace detail

inline FeatureTable parse_features_csv(std::string_view csv) {
    FeatureTable t;
    std::size_t pos = 0;
    bool header_seen = false;
    std::size_t k = 0;
    while (pos < csv.size()) {
        std::size_t eol = csv.find('\n', pos);
        if (eol == std::string_view::npos) eol = csv.size();
        std::string_view line = csv.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string_view body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
            std::size_t eq = body.find('=');
            if (eq != std::string_view::npos)
                t.config.emplace_back(std::string(body.substr(0, eq)),
                                      std::string(body.substr(eq + 1)));
            continue;
        }
        auto cells = detail::split_csv_line(line);
        if (!header_seen) {
            if (cells.size() < 3 || cells.front() != "student_id" ||
                cells.back() != "final_net_energy")
                throw DataError("features csv: bad header");
            k = cells.size() - 2;
            t.features.cols = k;
            header_seen = true;
            continue;
        }
        if (cells.size() != k + 2)
            throw DataError("features csv: row width mismatch for id " +
                            (cells.empty() ? std::string("?") : cells[0]));
        t.features.row_ids.push_back(cells[0]);
        for (std::size_t j = 0; j < k; ++j)
            t.features.data.push_back(std::strtod(cells[j + 1].c_str(), nullptr));
        const std::string& e = cells.back();
        t.energies.push_back(e.empty() ? std::optional<double>{}
                                       : std::optional<double>{std::strtod(e.c_str(), nullptr)});
    }
    if (!header_seen) throw DataError("features csv: missing header");
    for (const auto& [key, val] : t.config) {
        if (key == "kind" && val == "sequence") t.features.kind = FeatureKind::Sequence;
        if (key == "pad_code") t.features.pad_code = std::atoi(val.c_str());
        if (key == "pad_length")
            t.features.pad_length = static_cast<std::size_t>(std::atoll(val.c_str()));
    }
    return t;
}

}  // namespace cadlog
