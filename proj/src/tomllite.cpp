#include "bes/tomllite.hpp"

#include <cctype>
#include <cstdlib>

#include "bes/errors.hpp"

namespace bes {

namespace {

using Json = nlohmann::ordered_json;

class TomlReader {
public:
    explicit TomlReader(const std::string &text) : src_(text) {}

    Json run() {
        Json root = Json::object();
        Json *current = &root;
        while (true) {
            skip_blank();
            if (eof()) break;
            if (peek() == '[') {
                current = parse_header(root);
            } else {
                parse_assignment(*current);
            }
        }
        return root;
    }

private:
    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }
    char take() { return src_[pos_++]; }

    [[noreturn]] void fail(const std::string &msg) const { throw ParseError(msg, pos_); }

    void skip_spaces() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void skip_comment() {
        if (!eof() && peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }

    /// Whitespace, newlines, comments.
    void skip_blank() {
        while (!eof()) {
            skip_spaces();
            skip_comment();
            if (!eof() && (peek() == '\n' || peek() == '\r'))
                ++pos_;
            else
                break;
        }
    }

    void expect_line_end() {
        skip_spaces();
        skip_comment();
        if (eof()) return;
        if (peek() == '\n' || peek() == '\r') {
            ++pos_;
            return;
        }
        fail("expected end of line");
    }

    std::string parse_key_part() {
        skip_spaces();
        if (eof()) fail("expected a key");
        if (peek() == '"') return parse_basic_string();
        if (peek() == '\'') return parse_literal_string();
        std::string out;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                          peek() == '_' || peek() == '-'))
            out += take();
        if (out.empty()) fail("expected a key");
        return out;
    }

    std::vector<std::string> parse_dotted_key() {
        std::vector<std::string> parts{parse_key_part()};
        skip_spaces();
        while (!eof() && peek() == '.') {
            ++pos_;
            parts.push_back(parse_key_part());
            skip_spaces();
        }
        return parts;
    }

    Json *descend(Json &base, const std::vector<std::string> &parts, std::size_t upto) {
        Json *node = &base;
        for (std::size_t i = 0; i < upto; ++i) {
            Json &slot = (*node)[parts[i]];
            if (slot.is_null()) slot = Json::object();
            if (slot.is_array()) {
                if (slot.empty()) fail("cannot extend empty table array");
                node = &slot.back();
            } else if (slot.is_object()) {
                node = &slot;
            } else {
                fail("key '" + parts[i] + "' already holds a value");
            }
        }
        return node;
    }

    Json *parse_header(Json &root) {
        ++pos_; // '['
        const bool array_of_tables = !eof() && peek() == '[';
        if (array_of_tables) ++pos_;
        const std::vector<std::string> parts = parse_dotted_key();
        skip_spaces();
        if (eof() || take() != ']') fail("expected ']' in table header");
        if (array_of_tables) {
            if (eof() || take() != ']') fail("expected ']]' in table-array header");
        }
        expect_line_end();

        Json *parent = descend(root, parts, parts.size() - 1);
        Json &slot = (*parent)[parts.back()];
        if (array_of_tables) {
            if (slot.is_null()) slot = Json::array();
            if (!slot.is_array()) fail("table-array name already used for a table");
            slot.push_back(Json::object());
            return &slot.back();
        }
        if (slot.is_null()) slot = Json::object();
        if (!slot.is_object()) fail("table name already used for a value");
        return &slot;
    }

    void parse_assignment(Json &table) {
        const std::vector<std::string> parts = parse_dotted_key();
        skip_spaces();
        if (eof() || take() != '=') fail("expected '=' after key");
        skip_spaces();
        Json value = parse_value();
        Json *parent = descend(table, parts, parts.size() - 1);
        if (parent->contains(parts.back())) fail("duplicate key '" + parts.back() + "'");
        (*parent)[parts.back()] = std::move(value);
        expect_line_end();
    }

    std::string parse_basic_string() {
        ++pos_; // '"'
        if (!eof() && peek() == '"' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '"')
            fail("multi-line strings are not supported");
        std::string out;
        while (!eof() && peek() != '"') {
            char c = take();
            if (c == '\n') fail("unterminated string");
            if (c == '\\') {
                if (eof()) fail("dangling escape");
                const char e = take();
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    default: fail("unsupported escape sequence");
                }
            } else {
                out += c;
            }
        }
        if (eof()) fail("unterminated string");
        ++pos_; // closing '"'
        return out;
    }

    std::string parse_literal_string() {
        ++pos_; // '\''
        std::string out;
        while (!eof() && peek() != '\'') {
            if (peek() == '\n') fail("unterminated string");
            out += take();
        }
        if (eof()) fail("unterminated string");
        ++pos_;
        return out;
    }

    Json parse_value() {
        if (eof()) fail("expected a value");
        const char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') return parse_array();
        if (c == '{') return parse_inline_table();
        if (src_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            return true;
        }
        if (src_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            return false;
        }
        return parse_number();
    }

    Json parse_array() {
        ++pos_; // '['
        Json arr = Json::array();
        while (true) {
            skip_blank();
            if (eof()) fail("unterminated array");
            if (peek() == ']') {
                ++pos_;
                break;
            }
            arr.push_back(parse_value());
            skip_blank();
            if (!eof() && peek() == ',') {
                ++pos_;
                continue;
            }
            skip_blank();
            if (eof() || peek() != ']') fail("expected ',' or ']' in array");
        }
        return arr;
    }

    Json parse_inline_table() {
        ++pos_; // '{'
        Json obj = Json::object();
        skip_spaces();
        if (!eof() && peek() == '}') {
            ++pos_;
            return obj;
        }
        while (true) {
            const std::string key = parse_key_part();
            skip_spaces();
            if (eof() || take() != '=') fail("expected '=' in inline table");
            skip_spaces();
            if (obj.contains(key)) fail("duplicate key '" + key + "'");
            obj[key] = parse_value();
            skip_spaces();
            if (!eof() && peek() == ',') {
                ++pos_;
                skip_spaces();
                continue;
            }
            if (!eof() && peek() == '}') {
                ++pos_;
                break;
            }
            fail("expected ',' or '}' in inline table");
        }
        return obj;
    }

    Json parse_number() {
        std::string raw;
        while (!eof()) {
            const char c = peek();
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
                c == '.' || c == 'e' || c == 'E' || c == '_') {
                raw += take();
            } else {
                break;
            }
        }
        if (raw.empty()) fail("expected a value");
        // Underscore separators are allowed only between digits.
        std::string clean;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '_') {
                const bool ok = i > 0 && i + 1 < raw.size() &&
                                std::isdigit(static_cast<unsigned char>(raw[i - 1])) &&
                                std::isdigit(static_cast<unsigned char>(raw[i + 1]));
                if (!ok) fail("misplaced underscore in number");
                continue;
            }
            clean += raw[i];
        }
        const bool integral = clean.find_first_of(".eE") == std::string::npos;
        errno = 0;
        char *end = nullptr;
        if (integral) {
            const long long v = std::strtoll(clean.c_str(), &end, 10);
            if (end == clean.c_str() || *end != '\0' || errno == ERANGE)
                fail("invalid number '" + raw + "'");
            return v;
        }
        const double v = std::strtod(clean.c_str(), &end);
        if (end == clean.c_str() || *end != '\0')
            fail("invalid number '" + raw + "'");
        return v;
    }

    const std::string &src_;
    std::size_t pos_ = 0;
};

} // namespace

nlohmann::ordered_json toml_to_json(const std::string &text) {
    return TomlReader(text).run();
}

} // namespace bes
