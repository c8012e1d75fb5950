#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types shared by every other header: the 13-way action
// taxonomy, per-student session logs, cohorts, and fitted model weights.

namespace cadlog {

// ---------------------------------------------------------------------------
// Errors. The CLI maps these onto exit codes (usage=1, data=2, io=3).

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad arguments or contract violations (out-of-range code, width mismatch).
struct DomainError : Error {
    using Error::Error;
};

// Problems with the data itself (degenerate labels, unmapped actions,
// schema violations).
struct DataError : Error {
    using Error::Error;
};

struct UnmappedActionError : DataError {
    explicit UnmappedActionError(const std::string& raw_name)
        : DataError("no category rule matches action name: \"" + raw_name + "\""),
          raw_name(raw_name) {}
    std::string raw_name;
};

struct IoError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Action categories, codes 0..12.

enum class ActionCategory : int {
    Door = 0,
    Floor = 1,
    Foundation = 2,
    Wall = 3,
    Window = 4,
    Roof = 5,
    SolarPanel = 6,
    Tree = 7,
    Building = 8,
    Analysis = 9,
    Parameters = 10,
    Thermal = 11,
    Color = 12,
};

inline constexpr int kCategoryCount = 13;

constexpr int code_of(ActionCategory c) { return static_cast<int>(c); }

inline ActionCategory category_of_code(int code) {
    if (code < 0 || code >= kCategoryCount)
        throw DomainError("category code out of range 0..12: " + std::to_string(code));
    return static_cast<ActionCategory>(code);
}

inline const char* category_name(ActionCategory c) {
    switch (c) {
        case ActionCategory::Door: return "Door";
        case ActionCategory::Floor: return "Floor";
        case ActionCategory::Foundation: return "Foundation";
        case ActionCategory::Wall: return "Wall";
        case ActionCategory::Window: return "Window";
        case ActionCategory::Roof: return "Roof";
        case ActionCategory::SolarPanel: return "SolarPanel";
        case ActionCategory::Tree: return "Tree";
        case ActionCategory::Building: return "Building";
        case ActionCategory::Analysis: return "Analysis";
        case ActionCategory::Parameters: return "Parameters";
        case ActionCategory::Thermal: return "Thermal";
        case ActionCategory::Color: return "Color";
    }
    throw DomainError("invalid ActionCategory value");
}

// ---------------------------------------------------------------------------
// Timestamps. Milliseconds since the Unix epoch, UTC.

using TimestampMs = std::int64_t;

namespace detail {

// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

constexpr void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y += m <= 2;
}

inline bool parse_fixed_uint(const std::string& s, std::size_t pos, std::size_t n, long& out) {
    if (pos + n > s.size()) return false;
    long v = 0;
    for (std::size_t i = 0; i < n; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

}  // namespace detail

// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]". Missing zone means UTC.
// Returns nullopt on anything it cannot read.
inline std::optional<TimestampMs> parse_iso8601_ms(const std::string& s) {
    long y, mo, d, h, mi, se;
    if (!detail::parse_fixed_uint(s, 0, 4, y)) return std::nullopt;
    if (s.size() < 19 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 5, 2, mo) || !detail::parse_fixed_uint(s, 8, 2, d))
        return std::nullopt;
    if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
    if (!detail::parse_fixed_uint(s, 11, 2, h) || s[13] != ':' ||
        !detail::parse_fixed_uint(s, 14, 2, mi) || s[16] != ':' ||
        !detail::parse_fixed_uint(s, 17, 2, se))
        return std::nullopt;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        return std::nullopt;

    std::size_t pos = 19;
    long ms = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        std::size_t start = pos;
        long frac = 0;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
            if (pos - start < 3) frac = frac * 10 + (s[pos] - '0');
            ++pos;
        }
        std::size_t ndigits = pos - start;
        if (ndigits == 0) return std::nullopt;
        for (std::size_t i = ndigits; i < 3; ++i) frac *= 10;
        ms = frac;
    }
    long offset_min = 0;
    if (pos < s.size()) {
        char c = s[pos];
        if (c == 'Z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            long oh = 0, om = 0;
            if (!detail::parse_fixed_uint(s, pos + 1, 2, oh)) return std::nullopt;
            std::size_t mpos = pos + 3;
            if (mpos < s.size() && s[mpos] == ':') ++mpos;
            if (!detail::parse_fixed_uint(s, mpos, 2, om)) return std::nullopt;
            offset_min = oh * 60 + om;
            if (c == '-') offset_min = -offset_min;
            pos = mpos + 2;
        } else {
            return std::nullopt;
        }
    }
    if (pos != s.size()) return std::nullopt;

    std::int64_t days = detail::days_from_civil(y, static_cast<unsigned>(mo),
                                                static_cast<unsigned>(d));
    std::int64_t total =
        (((days * 24 + h) * 60 + mi) * 60 + se) * 1000 + ms - offset_min * 60000LL;
    return total;
}

// Always renders UTC with millisecond precision and a 'Z' suffix.
inline std::string format_iso8601_ms(TimestampMs t) {
    std::int64_t ms = ((t % 1000) + 1000) % 1000;
    std::int64_t secs = (t - ms) / 1000;
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    std::int64_t y;
    unsigned mo, d;
    detail::civil_from_days(days, y, mo, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<long long>(y), mo, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60),
                  static_cast<long long>(ms));
    return buf;
}

// ---------------------------------------------------------------------------
// Session data.

struct DesignAction {
    TimestampMs timestamp = 0;
    std::string raw_name;
    ActionCategory category = ActionCategory::Door;
};

struct SessionLog {
    std::string student_id;
    std::vector<DesignAction> actions;  // nondecreasing timestamps, ties keep file order
    std::optional<double> final_net_energy;  // kWh/year
};

struct Cohort {
    std::vector<SessionLog> sessions;
    std::string provenance;  // directory path or generator seed descriptor
};

// ---------------------------------------------------------------------------
// Fitted models.

enum class ModelFamily { Linear, Logistic };
enum class FeatureKind { Tally, Sequence };

inline const char* family_name(ModelFamily f) {
    return f == ModelFamily::Linear ? "linear" : "logistic";
}

inline const char* feature_kind_name(FeatureKind k) {
    return k == FeatureKind::Tally ? "tally" : "sequence";
}

struct FeatureStats {
    double mean = 0.0;
    double stddev = 1.0;
};

struct ModelWeights {
    std::vector<double> coefficients;
    double intercept = 0.0;
    ModelFamily family = ModelFamily::Linear;
    FeatureKind feature_kind = FeatureKind::Tally;
    // Stats of the training features the weights were fit against, when the
    // pipeline standardized them. Constant features carry stddev 1.
    std::optional<std::vector<FeatureStats>> standardization;
    // Sequence-kind metadata, carried so saved models are self-describing.
    std::size_t pad_length = 0;
    int pad_code = -1;
};

}  // namespace cadlog
