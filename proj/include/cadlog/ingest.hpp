#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cadlog/core.hpp"
#include "cadlog/features.hpp"

// Session-log ingestion: directory scanning, malformation diagnosis, bounded
// automatic repair of the fault classes seen in real exports (stray non-UTF-8
// bytes, missing punctuation, truncated documents), and schema extraction.

namespace cadlog {

// ---------------------------------------------------------------------------
// Diagnostics.

enum class DiagnosticKind {
    NonUtf8Byte,
    MissingComma,
    MissingBrace,
    MissingBracket,
    MissingQuote,
    TruncatedDocument,
    UnknownToken,
};

inline const char* diagnostic_kind_name(DiagnosticKind k) {
    switch (k) {
        case DiagnosticKind::NonUtf8Byte: return "NonUtf8Byte";
        case DiagnosticKind::MissingComma: return "MissingComma";
        case DiagnosticKind::MissingBrace: return "MissingBrace";
        case DiagnosticKind::MissingBracket: return "MissingBracket";
        case DiagnosticKind::MissingQuote: return "MissingQuote";
        case DiagnosticKind::TruncatedDocument: return "TruncatedDocument";
        case DiagnosticKind::UnknownToken: return "UnknownToken";
    }
    return "?";
}

struct Diagnostic {
    std::size_t byte_offset = 0;  // 0..len (len = end of input)
    DiagnosticKind kind = DiagnosticKind::UnknownToken;
    std::string excerpt;  // up to 40 bytes of surrounding context
};

enum class RepairOutcome { Repaired, Unrepairable, CleanAsIs, SkippedEmpty };

inline const char* repair_outcome_name(RepairOutcome o) {
    switch (o) {
        case RepairOutcome::Repaired: return "Repaired";
        case RepairOutcome::Unrepairable: return "Unrepairable";
        case RepairOutcome::CleanAsIs: return "CleanAsIs";
        case RepairOutcome::SkippedEmpty: return "SkippedEmpty";
    }
    return "?";
}

struct RepairStep {
    Diagnostic diagnostic;
    std::string description;
};

struct RepairLog {
    std::string file;
    std::vector<RepairStep> applied;
    RepairOutcome outcome = RepairOutcome::CleanAsIs;
    std::vector<Diagnostic> residual;  // what was still wrong when giving up
};

namespace detail {

inline std::string excerpt_around(std::string_view bytes, std::size_t offset) {
    std::size_t lo = offset > 20 ? offset - 20 : 0;
    std::size_t hi = std::min(bytes.size(), offset + 20);
    std::string out;
    out.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        unsigned char c = static_cast<unsigned char>(bytes[i]);
        out.push_back((c >= 0x20 && c < 0x7f) ? static_cast<char>(c) : '.');
    }
    return out;
}

inline Diagnostic make_diag(std::string_view bytes, std::size_t offset, DiagnosticKind kind) {
    return {offset, kind, excerpt_around(bytes, offset)};
}

// Marks every byte that is not part of a valid UTF-8 sequence. A broken lead
// byte invalidates itself; its orphaned continuation bytes then get flagged
// individually, so deleting all marked bytes removes the whole sequence.
inline std::vector<bool> mark_invalid_utf8(std::string_view s) {
    std::vector<bool> bad(s.size(), false);
    std::size_t i = 0;
    auto cont = [&](std::size_t j, unsigned char lo = 0x80, unsigned char hi = 0xbf) {
        if (j >= s.size()) return false;
        unsigned char c = static_cast<unsigned char>(s[j]);
        return c >= lo && c <= hi;
    };
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            ++i;
        } else if (c >= 0xc2 && c <= 0xdf) {
            if (cont(i + 1)) i += 2;
            else bad[i++] = true;
        } else if (c == 0xe0) {
            if (cont(i + 1, 0xa0) && cont(i + 2)) i += 3;
            else bad[i++] = true;
        } else if (c >= 0xe1 && c <= 0xec) {
            if (cont(i + 1) && cont(i + 2)) i += 3;
            else bad[i++] = true;
        } else if (c == 0xed) {
            if (cont(i + 1, 0x80, 0x9f) && cont(i + 2)) i += 3;
            else bad[i++] = true;
        } else if (c >= 0xee && c <= 0xef) {
            if (cont(i + 1) && cont(i + 2)) i += 3;
            else bad[i++] = true;
        } else if (c == 0xf0) {
            if (cont(i + 1, 0x90) && cont(i + 2) && cont(i + 3)) i += 4;
            else bad[i++] = true;
        } else if (c >= 0xf1 && c <= 0xf3) {
            if (cont(i + 1) && cont(i + 2) && cont(i + 3)) i += 4;
            else bad[i++] = true;
        } else if (c == 0xf4) {
            if (cont(i + 1, 0x80, 0x8f) && cont(i + 2) && cont(i + 3)) i += 4;
            else bad[i++] = true;
        } else {
            bad[i++] = true;  // 0x80..0xc1, 0xf5..0xff
        }
    }
    return bad;
}

// One linear pass over the bytes: token scan with a container stack. Emits
// diagnostics plus the edits a repair pass could apply, grouped by class.
struct ScanResult {
    std::vector<Diagnostic> diagnostics;
    std::vector<std::size_t> utf8_deletions;   // byte offsets to delete
    std::vector<std::size_t> quote_insertions; // insert '"' here
    std::vector<std::size_t> comma_insertions; // insert ',' here
    bool eof_fix = false;
    std::size_t trim_from = 0;  // == len when nothing to trim
    std::string closers;        // appended after the trim point

    bool has_edits() const {
        return !utf8_deletions.empty() || !quote_insertions.empty() ||
               !comma_insertions.empty() || eof_fix;
    }
};

struct JsonScanner {
    std::string_view s;
    std::vector<bool> bad;
    ScanResult out;

    // Container frames. Object states: 0 expect key or '}', 1 expect ':',
    // 2 expect value, 3 expect ',' or '}', 4 expect key (after comma).
    // Array states: 0 expect value or ']', 2 expect value, 3 expect ',' or ']'.
    struct Frame {
        bool is_object;
        int state;
    };
    std::vector<Frame> stack;
    bool top_seen = false;
    bool top_done = false;
    bool partial_at_eof = false;
    std::size_t prev_token_end = 0;
    std::size_t last_good = 0;
    std::size_t last_good_depth = 0;

    explicit JsonScanner(std::string_view text) : s(text), bad(mark_invalid_utf8(text)) {
        for (std::size_t i = 0; i < s.size(); ++i)
            if (bad[i]) {
                diag(i, DiagnosticKind::NonUtf8Byte);
                out.utf8_deletions.push_back(i);
            }
    }

    void diag(std::size_t off, DiagnosticKind k) {
        out.diagnostics.push_back(make_diag(s, off, k));
    }

    bool unsafe_state() const {
        if (stack.empty()) return top_seen && !top_done;
        int st = stack.back().state;
        if (stack.back().is_object) return st == 1 || st == 2 || st == 4;
        return st == 2;
    }

    void mark_good(std::size_t pos_after) {
        last_good = pos_after;
        last_good_depth = stack.size();
    }

    // A complete value just ended at `end` in the innermost context.
    void value_completed(std::size_t end) {
        prev_token_end = end;
        if (stack.empty()) {
            top_done = true;
        } else {
            stack.back().state = 3;
        }
        mark_good(end);
    }

    bool expecting_value() const {
        if (stack.empty()) return !top_seen;
        const Frame& f = stack.back();
        if (f.is_object) return f.state == 2;
        return f.state == 0 || f.state == 2;
    }

    bool expecting_key() const {
        return !stack.empty() && stack.back().is_object &&
               (stack.back().state == 0 || stack.back().state == 4);
    }

    bool expecting_separator() const {
        return !stack.empty() ? stack.back().state == 3 : top_done;
    }

    void skip_ws(std::size_t& i) {
        while (i < s.size()) {
            if (bad[i]) {
                ++i;
                continue;
            }
            char c = s[i];
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r') ++i;
            else break;
        }
    }

    // Returns position after the string token (virtually closed if needed).
    std::size_t lex_string(std::size_t i, bool& eof_hit) {
        std::size_t j = i + 1;
        while (j < s.size()) {
            if (bad[j]) {
                ++j;
                continue;
            }
            unsigned char c = static_cast<unsigned char>(s[j]);
            if (c == '"') return j + 1;
            if (c == '\\') {
                if (j + 1 >= s.size()) break;  // dangling escape at EOF
                char e = s[j + 1];
                if (e == '"' || e == '\\' || e == '/' || e == 'b' || e == 'f' || e == 'n' ||
                    e == 'r' || e == 't') {
                    j += 2;
                } else if (e == 'u') {
                    bool ok = j + 5 < s.size();
                    for (std::size_t h = j + 2; ok && h < j + 6; ++h)
                        ok = std::isxdigit(static_cast<unsigned char>(s[h]));
                    if (!ok) {
                        diag(j, DiagnosticKind::UnknownToken);
                        j += 2;
                    } else {
                        j += 6;
                    }
                } else {
                    diag(j, DiagnosticKind::UnknownToken);  // invalid escape
                    j += 2;
                }
            } else if (c == '\n' || c == '\r') {
                // Strings cannot span lines; close at end of the enclosing line.
                diag(j, DiagnosticKind::MissingQuote);
                out.quote_insertions.push_back(j);
                return j;
            } else if (c < 0x20) {
                diag(j, DiagnosticKind::UnknownToken);  // raw control character
                ++j;
            } else {
                ++j;
            }
        }
        diag(s.size(), DiagnosticKind::MissingQuote);
        out.quote_insertions.push_back(s.size());
        eof_hit = true;
        return s.size();
    }

    // Returns one past the token, or npos for a token cut off by EOF.
    std::size_t lex_number(std::size_t i) {
        std::size_t j = i;
        auto digits = [&](std::size_t& p) {
            std::size_t start = p;
            while (p < s.size() && !bad[p] && s[p] >= '0' && s[p] <= '9') ++p;
            return p > start;
        };
        if (j < s.size() && s[j] == '-') ++j;
        if (j >= s.size()) return std::string_view::npos;
        if (s[j] == '0') {
            ++j;
        } else if (!digits(j)) {
            diag(i, DiagnosticKind::UnknownToken);
            return i + 1;  // lone '-' or junk; resync past it
        }
        if (j < s.size() && s[j] == '.') {
            ++j;
            if (j >= s.size()) return std::string_view::npos;
            if (!digits(j)) {
                diag(j, DiagnosticKind::UnknownToken);
                return j;
            }
        }
        if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
            ++j;
            if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
            if (j >= s.size()) return std::string_view::npos;
            if (!digits(j)) {
                diag(j, DiagnosticKind::UnknownToken);
                return j;
            }
        }
        return j;
    }

    void run() {
        std::size_t i = 0;
        const std::size_t len = s.size();
        while (true) {
            skip_ws(i);
            if (i >= len) break;
            char c = s[i];

            if (c == '{' || c == '[') {
                if (expecting_value()) {
                    top_seen = true;
                    stack.push_back({c == '{', 0});
                    prev_token_end = i + 1;
                    mark_good(i + 1);
                } else if (expecting_separator() && !stack.empty() && !stack.back().is_object) {
                    diag(i, DiagnosticKind::MissingComma);
                    out.comma_insertions.push_back(prev_token_end);
                    stack.push_back({c == '{', 0});
                    prev_token_end = i + 1;
                    mark_good(i + 1);
                } else if (expecting_key()) {
                    diag(i, DiagnosticKind::UnknownToken);
                    prev_token_end = i + 1;
                } else if (!stack.empty() && stack.back().is_object && stack.back().state == 1) {
                    // Missing ':' before a nested value; resync as if present.
                    diag(i, DiagnosticKind::UnknownToken);
                    stack.back().state = 2;
                    continue;
                } else {
                    diag(i, DiagnosticKind::UnknownToken);
                    prev_token_end = i + 1;
                }
                ++i;
                continue;
            }

            if (c == '}' || c == ']') {
                bool want_object = (c == '}');
                if (stack.empty()) {
                    diag(i, DiagnosticKind::UnknownToken);
                    ++i;
                    continue;
                }
                if (stack.back().is_object != want_object) {
                    // A closer for an outer container: the inner one is missing
                    // its own closer. Virtually pop so scanning stays aligned.
                    bool outer_matches = false;
                    for (const auto& f : stack)
                        if (f.is_object == want_object) outer_matches = true;
                    if (!outer_matches) {
                        diag(i, DiagnosticKind::UnknownToken);
                        ++i;
                        continue;
                    }
                    while (!stack.empty() && stack.back().is_object != want_object) {
                        diag(i, stack.back().is_object ? DiagnosticKind::MissingBrace
                                                       : DiagnosticKind::MissingBracket);
                        stack.pop_back();
                    }
                }
                int st = stack.back().state;
                bool ok = (st == 0 || st == 3);
                if (!ok) diag(i, DiagnosticKind::UnknownToken);  // dangling ',' or ':'
                stack.pop_back();
                value_completed(i + 1);
                ++i;
                continue;
            }

            if (c == ':') {
                if (!stack.empty() && stack.back().is_object && stack.back().state == 1)
                    stack.back().state = 2;
                else
                    diag(i, DiagnosticKind::UnknownToken);
                prev_token_end = i + 1;
                ++i;
                continue;
            }

            if (c == ',') {
                if (expecting_separator() && !stack.empty())
                    stack.back().state = stack.back().is_object ? 4 : 2;
                else
                    diag(i, DiagnosticKind::UnknownToken);
                prev_token_end = i + 1;
                ++i;
                continue;
            }

            if (c == '"') {
                bool eof_hit = false;
                std::size_t end = lex_string(i, eof_hit);
                if (eof_hit) {
                    partial_at_eof = true;
                    i = end;
                    continue;
                }
                if (expecting_key()) {
                    stack.back().state = 1;
                    prev_token_end = end;
                } else if (expecting_value()) {
                    top_seen = true;
                    value_completed(end);
                } else if (expecting_separator() && !stack.empty()) {
                    diag(i, DiagnosticKind::MissingComma);
                    out.comma_insertions.push_back(prev_token_end);
                    if (stack.back().is_object) {
                        stack.back().state = 1;  // string after virtual comma is a key
                        prev_token_end = end;
                    } else {
                        value_completed(end);
                    }
                } else {
                    diag(i, DiagnosticKind::UnknownToken);
                    prev_token_end = end;
                }
                i = end;
                continue;
            }

            bool number_start = (c == '-' || (c >= '0' && c <= '9'));
            bool alpha_start = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
            if (number_start || alpha_start) {
                std::size_t end;
                if (number_start) {
                    end = lex_number(i);
                } else {
                    end = i;
                    while (end < len && !bad[end] &&
                           ((s[end] >= 'a' && s[end] <= 'z') || (s[end] >= 'A' && s[end] <= 'Z')))
                        ++end;
                    std::string_view word = s.substr(i, end - i);
                    if (word != "true" && word != "false" && word != "null") {
                        if (end >= len && (std::string_view("true").starts_with(word) ||
                                           std::string_view("false").starts_with(word) ||
                                           std::string_view("null").starts_with(word))) {
                            end = std::string_view::npos;  // literal cut off by EOF
                        } else if (word.starts_with("true") || word.starts_with("null")) {
                            end = i + 4;  // fused literals, e.g. "truenull"
                        } else if (word.starts_with("false")) {
                            end = i + 5;
                        } else {
                            diag(i, DiagnosticKind::UnknownToken);
                            i = end;
                            prev_token_end = end;
                            continue;
                        }
                    }
                }
                if (end == std::string_view::npos) {
                    partial_at_eof = true;
                    diag(len, DiagnosticKind::TruncatedDocument);
                    break;
                }
                if (expecting_value()) {
                    top_seen = true;
                    value_completed(end);
                } else if (expecting_separator() && !stack.empty() && !stack.back().is_object) {
                    diag(i, DiagnosticKind::MissingComma);
                    out.comma_insertions.push_back(prev_token_end);
                    value_completed(end);
                } else {
                    diag(i, DiagnosticKind::UnknownToken);
                    prev_token_end = end;
                }
                i = end;
                continue;
            }

            diag(i, DiagnosticKind::UnknownToken);
            ++i;
        }

        finish(len);
    }

    void finish(std::size_t len) {
        if (!top_seen) {
            diag(len, DiagnosticKind::TruncatedDocument);
            return;  // nothing to complete
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it)
            diag(len, it->is_object ? DiagnosticKind::MissingBrace
                                    : DiagnosticKind::MissingBracket);
        bool dangling = partial_at_eof || unsafe_state();
        if (dangling && !partial_at_eof) diag(len, DiagnosticKind::TruncatedDocument);

        if (stack.empty() && !dangling) return;  // complete, balanced
        std::size_t depth = dangling ? last_good_depth : stack.size();
        out.trim_from = dangling ? last_good : len;
        out.closers.clear();
        for (std::size_t d = depth; d > 0; --d)
            out.closers.push_back(stack[d - 1].is_object ? '}' : ']');
        out.eof_fix = out.trim_from < len || !out.closers.empty();
        if (out.trim_from == 0 && out.closers.empty()) out.eof_fix = false;
    }
};

inline ScanResult scan_json(std::string_view bytes) {
    JsonScanner scanner(bytes);
    scanner.run();
    std::stable_sort(scanner.out.diagnostics.begin(), scanner.out.diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                         return a.byte_offset < b.byte_offset;
                     });
    return std::move(scanner.out);
}

inline bool accepts_json(std::string_view bytes) {
    return nlohmann::json::accept(bytes.begin(), bytes.end());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// diagnose: every malformation one linear scan + balance check can see.
// Empty result iff the bytes parse as well-formed JSON in UTF-8; the strict
// parser is the authority whenever the two disagree.

inline std::vector<Diagnostic> diagnose(std::string_view bytes) {
    if (detail::accepts_json(bytes)) return {};
    auto res = detail::scan_json(bytes);
    if (res.diagnostics.empty()) {
        // Scanner saw nothing specific; pin the strict parser's position.
        std::size_t off = bytes.size();
        try {
            auto parsed = nlohmann::json::parse(bytes.begin(), bytes.end());
            (void)parsed;
        } catch (const nlohmann::json::parse_error& e) {
            off = e.byte > 0 ? std::min(bytes.size(), static_cast<std::size_t>(e.byte) - 1)
                             : 0;
        }
        res.diagnostics.push_back(detail::make_diag(bytes, off, DiagnosticKind::UnknownToken));
    }
    return res.diagnostics;
}

// ---------------------------------------------------------------------------
// repair: bounded loop of targeted fixes. Each pass applies one fault class,
// in order: strip invalid UTF-8 bytes, close unterminated strings at end of
// line, insert missing commas between adjacent values, then complete a
// truncated document (drop a dangling tail, append missing closers).

struct RepairResult {
    std::string bytes;
    RepairLog log;
};

inline RepairResult repair(std::string_view input, const std::string& file = "") {
    RepairResult r;
    r.log.file = file;
    if (input.empty()) {
        r.log.outcome = RepairOutcome::SkippedEmpty;
        return r;
    }
    r.bytes.assign(input);
    if (detail::accepts_json(r.bytes)) {
        r.log.outcome = RepairOutcome::CleanAsIs;
        return r;
    }

    auto step = [&](std::size_t off, DiagnosticKind kind, std::string desc) {
        r.log.applied.push_back({detail::make_diag(r.bytes, off, kind), std::move(desc)});
    };

    for (int pass = 0; pass < 100; ++pass) {
        auto scan = detail::scan_json(r.bytes);
        if (!scan.has_edits()) {
            r.log.outcome = RepairOutcome::Unrepairable;
            r.log.residual = std::move(scan.diagnostics);
            return r;
        }
        if (!scan.utf8_deletions.empty()) {
            static const char* hex = "0123456789abcdef";
            for (auto it = scan.utf8_deletions.rbegin(); it != scan.utf8_deletions.rend(); ++it) {
                auto b = static_cast<unsigned char>(r.bytes[*it]);
                step(*it, DiagnosticKind::NonUtf8Byte,
                     std::string("deleted non-UTF-8 byte 0x") + hex[b >> 4] + hex[b & 15]);
                r.bytes.erase(*it, 1);
            }
        } else if (!scan.quote_insertions.empty()) {
            for (auto it = scan.quote_insertions.rbegin(); it != scan.quote_insertions.rend();
                 ++it) {
                step(*it, DiagnosticKind::MissingQuote,
                     "closed unterminated string at end of line");
                r.bytes.insert(*it, 1, '"');
            }
        } else if (!scan.comma_insertions.empty()) {
            for (auto it = scan.comma_insertions.rbegin(); it != scan.comma_insertions.rend();
                 ++it) {
                step(*it, DiagnosticKind::MissingComma, "inserted missing ','");
                r.bytes.insert(*it, 1, ',');
            }
        } else if (scan.eof_fix) {
            if (scan.trim_from < r.bytes.size()) {
                step(scan.trim_from, DiagnosticKind::TruncatedDocument,
                     "dropped " + std::to_string(r.bytes.size() - scan.trim_from) +
                         " bytes of truncated tail");
                r.bytes.erase(scan.trim_from);
            }
            for (char c : scan.closers) {
                step(r.bytes.size(),
                     c == '}' ? DiagnosticKind::MissingBrace : DiagnosticKind::MissingBracket,
                     std::string("appended missing '") + c + "'");
                r.bytes.push_back(c);
            }
        }
        if (detail::accepts_json(r.bytes)) {
            r.log.outcome = RepairOutcome::Repaired;
            return r;
        }
    }
    r.log.outcome = RepairOutcome::Unrepairable;
    r.log.residual = diagnose(r.bytes);
    return r;
}

// ---------------------------------------------------------------------------
// File and directory plumbing.

inline std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

// All regular *.json files in lexicographic path order, with sizes.
// Zero-size files are included; the caller flags them.
inline std::vector<std::pair<std::filesystem::path, std::uintmax_t>> scan_directory(
    const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw IoError("not a readable directory: " + dir.string());
    std::vector<std::pair<fs::path, std::uintmax_t>> files;
    for (fs::directory_iterator it(dir, ec), end; it != end; it.increment(ec)) {
        if (ec) throw IoError("cannot read directory: " + dir.string() + ": " + ec.message());
        if (!it->is_regular_file()) continue;
        if (it->path().extension() != ".json") continue;
        files.emplace_back(it->path(), it->file_size());
    }
    if (ec) throw IoError("cannot read directory: " + dir.string() + ": " + ec.message());
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.first.generic_string() < b.first.generic_string();
    });
    return files;
}

// ---------------------------------------------------------------------------
// Session extraction.

// Schema: { "student": "<id>", "events": [ { "ts": "<ISO-8601>",
// "action": "<raw name>", "netEnergy": <number, optional> }, ... ] }.
// The student id is the caller's (filename stem); the in-file field is
// informational only. Events damaged by truncation (no usable action name)
// are dropped rather than failing the whole file.
inline SessionLog parse_session(std::string_view bytes, const std::string& student_id,
                                const CategoryMapping& mapping = default_mapping()) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError("session is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw DataError("session schema: top level is not an object");
    if (!j.contains("events") || !j["events"].is_array())
        throw DataError("session schema: missing \"events\" array at $.events");

    SessionLog session;
    session.student_id = student_id;
    TimestampMs prev_ts = 0;
    std::optional<double> final_energy;
    const auto& events = j["events"];
    for (std::size_t idx = 0; idx < events.size(); ++idx) {
        const auto& ev = events[idx];
        if (!ev.is_object())
            throw DataError("session schema: non-object event at $.events[" +
                            std::to_string(idx) + "]");
        if (!ev.contains("action") || !ev["action"].is_string()) continue;
        std::string name = ev["action"].get<std::string>();
        if (name.empty()) continue;

        TimestampMs ts = prev_ts;  // monotone fill when the timestamp is unusable
        if (ev.contains("ts") && ev["ts"].is_string())
            if (auto parsed = parse_iso8601_ms(ev["ts"].get<std::string>())) ts = *parsed;
        prev_ts = ts;

        ActionCategory cat;
        try {
            cat = categorize(name, mapping);
        } catch (const UnmappedActionError&) {
            // A partial name in the final event is truncation residue; an
            // unmapped name anywhere else is a real mapping gap.
            if (idx + 1 == events.size()) continue;
            throw;
        }
        if (cat == ActionCategory::Analysis && ev.contains("netEnergy") &&
            ev["netEnergy"].is_number())
            final_energy = ev["netEnergy"].get<double>();  // last analysis wins
        session.actions.push_back({ts, std::move(name), cat});
    }
    std::stable_sort(session.actions.begin(), session.actions.end(),
                     [](const DesignAction& a, const DesignAction& b) {
                         return a.timestamp < b.timestamp;
                     });
    session.final_net_energy = final_energy;
    return session;
}

// ---------------------------------------------------------------------------
// load_cohort: scan -> repair -> parse, one RepairLog per scanned file.
// Zero-size and unrepairable files are excluded from the cohort but kept in
// the logs, so cohort size == files scanned - (SkippedEmpty + Unrepairable).

inline std::pair<Cohort, std::vector<RepairLog>> load_cohort(
    const std::filesystem::path& dir, const CategoryMapping& mapping = default_mapping()) {
    Cohort cohort;
    cohort.provenance = dir.generic_string();
    std::vector<RepairLog> logs;
    for (const auto& [path, size] : scan_directory(dir)) {
        const std::string fname = path.filename().string();
        if (size == 0) {
            RepairLog log;
            log.file = fname;
            log.outcome = RepairOutcome::SkippedEmpty;
            logs.push_back(std::move(log));
            continue;
        }
        auto rep = repair(read_file_bytes(path), fname);
        if (rep.log.outcome == RepairOutcome::Unrepairable) {
            logs.push_back(std::move(rep.log));
            continue;
        }
        try {
            cohort.sessions.push_back(parse_session(rep.bytes, path.stem().string(), mapping));
        } catch (const DataError& e) {
            rep.log.outcome = RepairOutcome::Unrepairable;
            rep.log.applied.push_back(
                {detail::make_diag(rep.bytes, 0, DiagnosticKind::UnknownToken),
                 std::string("schema rejected after repair: ") + e.what()});
        }
        logs.push_back(std::move(rep.log));
    }
    return {std::move(cohort), std::move(logs)};
}

}  // namespace cadlog
