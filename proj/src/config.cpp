#include "delayrc/config.hpp"

#include "delayrc/time_series.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace delayrc {

namespace {

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Cuts a '#' comment, respecting double quotes.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

struct value_parser {
    const std::string& text;
    std::size_t pos = 0;
    int line_no;

    [[noreturn]] void fail(const std::string& why) const {
        throw std::runtime_error(fmt::format("config line {}: {}", line_no, why));
    }

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }

    nlohmann::json parse_value() {
        skip_ws();
        if (pos >= text.size()) fail("missing value");
        if (text[pos] == '[') return parse_array();
        if (text[pos] == '"') return parse_quoted();
        return parse_scalar();
    }

    nlohmann::json parse_array() {
        ++pos;  // consume '['
        nlohmann::json arr = nlohmann::json::array();
        skip_ws();
        if (pos < text.size() && text[pos] == ']') {
            ++pos;
            return arr;
        }
        for (;;) {
            arr.push_back(parse_value());
            skip_ws();
            if (pos >= text.size()) fail("unterminated array");
            if (text[pos] == ']') {
                ++pos;
                return arr;
            }
            if (text[pos] != ',') fail("expected ',' or ']' in array");
            ++pos;
        }
    }

    nlohmann::json parse_quoted() {
        ++pos;  // consume '"'
        std::string out;
        while (pos < text.size()) {
            char c = text[pos++];
            if (c == '"') return out;
            if (c == '\\') {
                if (pos >= text.size()) fail("dangling escape");
                char e = text[pos++];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    default: fail(fmt::format("unknown escape '\\{}'", e));
                }
            } else {
                out += c;
            }
        }
        fail("unterminated string");
    }

    nlohmann::json parse_scalar() {
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ',' && text[pos] != ']') ++pos;
        std::string token = strip(text.substr(start, pos - start));
        if (token.empty()) fail("empty value");
        if (token == "true") return true;
        if (token == "false") return false;

        long long iv = 0;
        auto [ip, iec] = std::from_chars(token.data(), token.data() + token.size(), iv);
        if (iec == std::errc{} && ip == token.data() + token.size()) return iv;

        unsigned long long uv = 0;
        auto [up, uec] = std::from_chars(token.data(), token.data() + token.size(), uv);
        if (uec == std::errc{} && up == token.data() + token.size()) return uv;

        double dv = 0;
        auto [dp, dec] = std::from_chars(token.data(), token.data() + token.size(), dv);
        if (dec == std::errc{} && dp == token.data() + token.size()) return dv;

        return token;  // bare string
    }
};

nlohmann::json* descend(nlohmann::json& root, const std::string& dotted, int line_no) {
    nlohmann::json* node = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        std::size_t dot = dotted.find('.', start);
        std::string part =
            dot == std::string::npos ? dotted.substr(start) : dotted.substr(start, dot - start);
        if (part.empty())
            throw std::runtime_error(
                fmt::format("config line {}: empty path component in '{}'", line_no, dotted));
        node = &(*node)[part];
        if (!node->is_object() && !node->is_null())
            throw std::runtime_error(fmt::format(
                "config line {}: '{}' already holds a value, cannot nest into it", line_no, part));
        if (node->is_null()) *node = nlohmann::json::object();
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return node;
}

void write_value(std::ostream& os, const nlohmann::json& v) {
    if (v.is_boolean()) {
        os << (v.get<bool>() ? "true" : "false");
    } else if (v.is_number_integer()) {
        os << v.get<long long>();
    } else if (v.is_number_unsigned()) {
        os << v.get<unsigned long long>();
    } else if (v.is_number_float()) {
        const std::string s = format_double(v.get<double>());
        os << s;
        // keep it a real on re-parse
        if (s.find_first_of(".eE") == std::string::npos) os << ".0";
    } else if (v.is_string()) {
        const std::string& s = v.get<std::string>();
        bool bare = !s.empty() && s != "true" && s != "false";
        for (char c : s)
            if (!is_key_char(c)) bare = false;
        if (bare) {
            // bare strings must not re-parse as numbers
            double dv;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), dv);
            if (ec == std::errc{} && p == s.data() + s.size()) bare = false;
        }
        if (bare) {
            os << s;
        } else {
            os << '"';
            for (char c : s) {
                switch (c) {
                    case '"': os << "\\\""; break;
                    case '\\': os << "\\\\"; break;
                    case '\n': os << "\\n"; break;
                    case '\t': os << "\\t"; break;
                    default: os << c;
                }
            }
            os << '"';
        }
    } else if (v.is_array()) {
        os << '[';
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ", ";
            write_value(os, v[i]);
        }
        os << ']';
    } else {
        throw std::runtime_error("write_config_text: unsupported value type");
    }
}

void write_section(std::ostream& os, const nlohmann::json& obj, const std::string& path,
                   bool& first_section) {
    // scalar bindings of this section first, nested sections after
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (it.value().is_object()) continue;
        os << it.key() << " = ";
        write_value(os, it.value());
        os << '\n';
    }
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!it.value().is_object()) continue;
        const std::string sub = path.empty() ? it.key() : path + "." + it.key();
        if (!first_section) os << '\n';
        first_section = false;
        os << '[' << sub << "]\n";
        write_section(os, it.value(), sub, first_section);
    }
}

}  // namespace

nlohmann::json parse_config_text(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* section = &root;

    std::istringstream stream(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = strip(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::runtime_error(
                    fmt::format("config line {}: section header missing ']'", line_no));
            const std::string path = strip(line.substr(1, line.size() - 2));
            if (path.empty())
                throw std::runtime_error(fmt::format("config line {}: empty section name", line_no));
            for (char c : path)
                if (!is_key_char(c))
                    throw std::runtime_error(fmt::format(
                        "config line {}: invalid character '{}' in section name", line_no, c));
            section = descend(root, path, line_no);
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(
                fmt::format("config line {}: expected 'key = value' or '[section]'", line_no));
        const std::string key = strip(line.substr(0, eq));
        if (key.empty() || !std::all_of(key.begin(), key.end(), is_key_char))
            throw std::runtime_error(fmt::format("config line {}: invalid key '{}'", line_no, key));

        const std::string value_text = line.substr(eq + 1);
        value_parser parser{value_text, 0, line_no};
        nlohmann::json value = parser.parse_value();
        parser.skip_ws();
        if (parser.pos != value_text.size())
            throw std::runtime_error(
                fmt::format("config line {}: trailing characters after value", line_no));
        (*section)[key] = std::move(value);
    }
    return root;
}

std::string write_config_text(const nlohmann::json& config) {
    if (!config.is_object())
        throw std::invalid_argument("write_config_text: top level must be an object");
    std::ostringstream os;
    bool first_section = true;
    write_section(os, config, "", first_section);
    return os.str();
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open config file '{}'", path));
    std::stringstream buffer;
    buffer << f.rdbuf();
    const std::string text = buffer.str();

    // JSON manifests start with '{'; everything else is the text format
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') continue;
        if (c == '{') {
            nlohmann::json j = nlohmann::json::parse(text);
            if (j.contains("config")) return j["config"];
            return j;
        }
        break;
    }
    return parse_config_text(text);
}

}  // namespace delayrc
