#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadlog/core.hpp"

// Feature construction: keyword-based action categorization, per-category
// tallies, coded action sequences with prefix truncation, fixed-width
// padding, and train-split standardization.

namespace cadlog {

// ---------------------------------------------------------------------------
// Category mapping. First rule whose keyword is a substring of the
// lowercased action name wins; rule order is the config order.

struct CategoryRule {
    std::string keyword;  // lowercase
    ActionCategory category = ActionCategory::Door;
};

struct CategoryMapping {
    std::vector<CategoryRule> rules;
    std::string version;
};

inline CategoryMapping default_mapping() {
    CategoryMapping m;
    m.version = "builtin-1";
    m.rules = {
        {"door", ActionCategory::Door},
        {"floor", ActionCategory::Floor},
        {"foundation", ActionCategory::Foundation},
        {"wall", ActionCategory::Wall},
        {"window", ActionCategory::Window},
        {"roof", ActionCategory::Roof},
        {"solar", ActionCategory::SolarPanel},
        {"tree", ActionCategory::Tree},
        {"building", ActionCategory::Building},
        {"analy", ActionCategory::Analysis},
        {"heliodon", ActionCategory::Analysis},
        {"graph", ActionCategory::Analysis},
        {"latitude", ActionCategory::Parameters},
        {"location", ActionCategory::Parameters},
        {"date", ActionCategory::Parameters},
        {"time", ActionCategory::Parameters},
        {"u-value", ActionCategory::Thermal},
        {"thermal", ActionCategory::Thermal},
        {"color", ActionCategory::Color},
    };
    return m;
}

// Every category reachable, keywords unique and lowercase.
inline void validate_mapping(const CategoryMapping& m) {
    bool seen[kCategoryCount] = {};
    for (std::size_t i = 0; i < m.rules.size(); ++i) {
        const auto& r = m.rules[i];
        if (r.keyword.empty()) throw DataError("category mapping: empty keyword");
        for (char c : r.keyword)
            if (std::isupper(static_cast<unsigned char>(c)))
                throw DataError("category mapping: keyword must be lowercase: " + r.keyword);
        for (std::size_t j = 0; j < i; ++j)
            if (m.rules[j].keyword == r.keyword)
                throw DataError("category mapping: duplicate keyword: " + r.keyword);
        seen[code_of(r.category)] = true;
    }
    for (int c = 0; c < kCategoryCount; ++c)
        if (!seen[c])
            throw DataError(std::string("category mapping: no rule for category ") +
                            category_name(category_of_code(c)));
}

// Mapping config file: { "version": "...", "rules": [ {"keyword":"wall","code":3}, ... ] }
inline CategoryMapping mapping_from_json(const nlohmann::json& j) {
    CategoryMapping m;
    if (!j.is_object() || !j.contains("rules") || !j["rules"].is_array())
        throw DataError("category mapping: expected object with a \"rules\" array");
    m.version = j.value("version", "unversioned");
    for (const auto& r : j["rules"]) {
        if (!r.is_object() || !r.contains("keyword") || !r.contains("code"))
            throw DataError("category mapping: each rule needs \"keyword\" and \"code\"");
        m.rules.push_back(
            {r["keyword"].get<std::string>(), category_of_code(r["code"].get<int>())});
    }
    validate_mapping(m);
    return m;
}

inline nlohmann::json mapping_to_json(const CategoryMapping& m) {
    nlohmann::json rules = nlohmann::json::array();
    for (const auto& r : m.rules)
        rules.push_back({{"keyword", r.keyword}, {"code", code_of(r.category)}});
    return {{"version", m.version}, {"rules", rules}};
}

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline ActionCategory categorize(const std::string& raw_name, const CategoryMapping& mapping) {
    const std::string lowered = to_lower(raw_name);
    for (const auto& rule : mapping.rules)
        if (lowered.find(rule.keyword) != std::string::npos) return rule.category;
    throw UnmappedActionError(raw_name);
}

// ---------------------------------------------------------------------------
// Per-session features.

struct CountVector {
    std::array<std::int64_t, kCategoryCount> counts{};
};

struct CodeSequence {
    std::vector<int> codes;  // each in 0..12
};

inline CountVector tally(const SessionLog& session) {
    CountVector v;
    for (const auto& a : session.actions) ++v.counts[code_of(a.category)];
    return v;
}

inline CodeSequence encode_sequence(const SessionLog& session) {
    CodeSequence s;
    s.codes.reserve(session.actions.size());
    for (const auto& a : session.actions) s.codes.push_back(code_of(a.category));
    return s;
}

// ceil(fraction * n), with a snap to the nearest integer to absorb float
// noise in products like 0.7 * 10.
inline std::size_t prefix_length(std::size_t n, double fraction) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw DomainError("prefix fraction must be in (0, 1]");
    double t = fraction * static_cast<double>(n);
    double r = std::round(t);
    double c = (std::abs(t - r) < 1e-9) ? r : std::ceil(t);
    auto k = static_cast<std::size_t>(c);
    return std::min(k, n);
}

inline CodeSequence prefix(const CodeSequence& seq, double fraction) {
    std::size_t k = prefix_length(seq.codes.size(), fraction);
    CodeSequence out;
    out.codes.assign(seq.codes.begin(), seq.codes.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

// ---------------------------------------------------------------------------
// Feature matrices. Row-major contiguous storage.

inline constexpr int kPadCode = kCategoryCount;  // 13, one past the last real code

struct FeatureMatrix {
    std::vector<double> data;
    std::size_t cols = 0;
    std::vector<std::string> row_ids;
    FeatureKind kind = FeatureKind::Tally;
    int pad_code = -1;          // Sequence kind only
    std::size_t pad_length = 0; // Sequence kind only

    std::size_t rows() const { return row_ids.size(); }
    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

inline FeatureMatrix tally_matrix(const std::vector<CountVector>& tallies,
                                  std::vector<std::string> ids) {
    FeatureMatrix m;
    m.kind = FeatureKind::Tally;
    m.cols = kCategoryCount;
    m.row_ids = std::move(ids);
    m.data.reserve(tallies.size() * m.cols);
    for (const auto& t : tallies)
        for (auto c : t.counts) m.data.push_back(static_cast<double>(c));
    return m;
}

// Right-pads every sequence with pad_code 13 to the given width; sequences
// longer than the width are truncated (used when applying a train-fitted
// width to test rows).
inline FeatureMatrix pad_matrix(const std::vector<CodeSequence>& seqs,
                                std::vector<std::string> ids, std::size_t pad_length) {
    if (seqs.empty()) throw DomainError("pad_matrix: no sequences");
    if (seqs.size() != ids.size()) throw DomainError("pad_matrix: ids/sequences mismatch");
    FeatureMatrix m;
    m.kind = FeatureKind::Sequence;
    m.pad_code = kPadCode;
    m.pad_length = pad_length;
    m.cols = pad_length;
    m.row_ids = std::move(ids);
    m.data.resize(seqs.size() * pad_length, static_cast<double>(kPadCode));
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto& codes = seqs[i].codes;
        std::size_t n = std::min(codes.size(), pad_length);
        for (std::size_t j = 0; j < n; ++j) m.data[i * pad_length + j] = codes[j];
    }
    return m;
}

// Width defaults to the longest input sequence.
inline FeatureMatrix pad_matrix(const std::vector<CodeSequence>& seqs,
                                std::vector<std::string> ids) {
    if (seqs.empty()) throw DomainError("pad_matrix: no sequences");
    std::size_t width = 0;
    for (const auto& s : seqs) width = std::max(width, s.codes.size());
    return pad_matrix(seqs, std::move(ids), width);
}

// ---------------------------------------------------------------------------
// Standardization. Population stddev; constant features get stddev 1 so the
// transform stays invertible.

inline std::vector<FeatureStats> fit_standardizer(const FeatureMatrix& train) {
    if (train.rows() < 2) throw DomainError("fit_standardizer: need at least 2 rows");
    const std::size_t n = train.rows(), k = train.cols;
    std::vector<FeatureStats> stats(k);
    for (std::size_t j = 0; j < k; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += train.at(i, j);
        double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = train.at(i, j) - mean;
            ss += d * d;
        }
        double sd = std::sqrt(ss / static_cast<double>(n));
        stats[j] = {mean, sd < 1e-12 ? 1.0 : sd};
    }
    return stats;
}

inline FeatureMatrix apply_standardizer(const FeatureMatrix& m,
                                        const std::vector<FeatureStats>& stats) {
    if (stats.size() != m.cols)
        throw DomainError("apply_standardizer: stats length != column count");
    FeatureMatrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols; ++j)
            out.at(i, j) = (out.at(i, j) - stats[j].mean) / stats[j].stddev;
    return out;
}

inline FeatureMatrix unapply_standardizer(const FeatureMatrix& m,
                                          const std::vector<FeatureStats>& stats) {
    if (stats.size() != m.cols)
        throw DomainError("unapply_standardizer: stats length != column count");
    FeatureMatrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols; ++j)
            out.at(i, j) = out.at(i, j) * stats[j].stddev + stats[j].mean;
    return out;
}

}  // namespace cadlog
