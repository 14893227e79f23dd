#include "core/util.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "core/error.hpp"

namespace mloc {

std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::vector<std::string> split_lines_keep_ends(std::string_view text) {
    std::vector<std::string> lines;
    size_t start = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '\n') {
            lines.emplace_back(text.substr(start, i - start + 1));
            start = i + 1;
        }
    }
    if (start < text.size()) lines.emplace_back(text.substr(start));
    return lines;
}

std::string collapse_ws(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // swallow leading whitespace
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_ws) out.push_back(' ');
            in_ws = true;
        } else {
            out.push_back(c);
            in_ws = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr)) {
        throw Error(ErrorCode::InvalidArgument, "sha256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open file: " + path.string());
    std::ostringstream oss;
    oss << in.rdbuf();
    if (in.bad()) throw Error(ErrorCode::Io, "read failed: " + path.string());
    return oss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open file for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed: " + path.string());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    write_file(tmp, content);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "rename failed: " + path.string() + ": " + ec.message());
}

void append_line(const std::filesystem::path& path, std::string_view line) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot open file for append: " + path.string());
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.put('\n');
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "append failed: " + path.string());
}

std::optional<long> parse_int(std::string_view s) {
    std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    size_t i = 0;
    if (t[0] == '+' || t[0] == '-') i = 1;
    if (i == t.size()) return std::nullopt;
    long value = 0;
    bool negative = t[0] == '-';
    for (; i < t.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(t[i]))) return std::nullopt;
        value = value * 10 + (t[i] - '0');
        if (value > 1000000000L) return std::nullopt;  // fields here are small
    }
    return negative ? -value : value;
}

double round4(double v) {
    return std::round(v * 10000.0) / 10000.0;
}

std::string format_percent(double fraction) {
    long pct = static_cast<long>(std::llround(fraction * 100.0));
    return std::to_string(pct) + "%";
}

std::string iso8601_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::Io: return "Io";
        case ErrorCode::BadFormat: return "BadFormat";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingClassDirective: return "MissingClassDirective";
        case ErrorCode::UnterminatedMethod: return "UnterminatedMethod";
        case ErrorCode::NestedMethod: return "NestedMethod";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::ToolNotConfigured: return "ToolNotConfigured";
        case ErrorCode::ToolFailed: return "ToolFailed";
        case ErrorCode::NoSmaliProduced: return "NoSmaliProduced";
        case ErrorCode::BadTaxonomy: return "BadTaxonomy";
        case ErrorCode::BadFamilyTable: return "BadFamilyTable";
        case ErrorCode::UnknownFamily: return "UnknownFamily";
        case ErrorCode::BadTemplate: return "BadTemplate";
        case ErrorCode::EmptyExplanation: return "EmptyExplanation";
        case ErrorCode::GatewayUnconfigured: return "GatewayUnconfigured";
        case ErrorCode::AuthMissing: return "AuthMissing";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::CacheMiss: return "CacheMiss";
        case ErrorCode::MockUnscripted: return "MockUnscripted";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::EmptyBehaviorSet: return "EmptyBehaviorSet";
        case ErrorCode::ParseBudgetExceeded: return "ParseBudgetExceeded";
        case ErrorCode::ApkMismatch: return "ApkMismatch";
        case ErrorCode::UnknownBehaviorId: return "UnknownBehaviorId";
        case ErrorCode::BadGroundTruth: return "BadGroundTruth";
        case ErrorCode::DanglingVerdict: return "DanglingVerdict";
        case ErrorCode::CorruptVerdictFile: return "CorruptVerdictFile";
        case ErrorCode::BadConfig: return "BadConfig";
    }
    return "Unknown";
}

}  // namespace mloc
