#include "rmnoise/jsonio.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rmnoise {

std::string format_double17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

void append_escaped(std::string& out, const std::string& s) {
    out += '"';
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

void dump_rec(const nlohmann::ordered_json& node, std::string& out, int depth, bool compact) {
    const std::string pad = compact ? "" : std::string(2 * static_cast<size_t>(depth), ' ');
    const std::string pad_in = compact ? "" : std::string(2 * static_cast<size_t>(depth + 1), ' ');
    const char* nl = compact ? "" : "\n";
    switch (node.type()) {
        case nlohmann::json::value_t::object: {
            if (node.empty()) {
                out += "{}";
                return;
            }
            out += '{';
            out += nl;
            size_t i = 0;
            for (auto it = node.begin(); it != node.end(); ++it, ++i) {
                out += pad_in;
                append_escaped(out, it.key());
                out += compact ? ":" : ": ";
                dump_rec(it.value(), out, depth + 1, compact);
                if (i + 1 < node.size()) out += ',';
                out += nl;
            }
            out += pad + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (node.empty()) {
                out += "[]";
                return;
            }
            out += '[';
            out += nl;
            for (size_t i = 0; i < node.size(); ++i) {
                out += pad_in;
                dump_rec(node[i], out, depth + 1, compact);
                if (i + 1 < node.size()) out += ',';
                out += nl;
            }
            out += pad + "]";
            return;
        }
        case nlohmann::json::value_t::string:
            append_escaped(out, node.get_ref<const std::string&>());
            return;
        case nlohmann::json::value_t::boolean:
            out += node.get<bool>() ? "true" : "false";
            return;
        case nlohmann::json::value_t::number_integer:
            out += std::to_string(node.get<long long>());
            return;
        case nlohmann::json::value_t::number_unsigned:
            out += std::to_string(node.get<unsigned long long>());
            return;
        case nlohmann::json::value_t::number_float: {
            const double v = node.get<double>();
            if (!std::isfinite(v))
                throw std::logic_error("dump_json17: non-finite number in output document");
            out += format_double17(v);
            return;
        }
        case nlohmann::json::value_t::null:
            out += "null";
            return;
        default:
            throw std::logic_error("dump_json17: unsupported json value type");
    }
}

bool needs_quoting(const std::string& s) {
    for (char ch : s)
        if (ch == ',' || ch == '"' || ch == '\n' || ch == '\r') return true;
    return false;
}

}  // namespace

std::string dump_json17(const nlohmann::ordered_json& doc, bool compact) {
    std::string out;
    dump_rec(doc, out, 0, compact);
    if (!compact) out += '\n';
    return out;
}

void CsvWriter::comment(const std::string& line) {
    buf_ += "# ";
    buf_ += line;
    buf_ += '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    n_columns_ = columns.size();
    for (size_t i = 0; i < columns.size(); ++i) {
        if (i) buf_ += ',';
        buf_ += columns[i];
    }
    buf_ += '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
    if (cells.size() != n_columns_)
        throw std::logic_error("CsvWriter: row width does not match header");
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) buf_ += ',';
        const auto& v = cells[i].value;
        if (std::holds_alternative<double>(v)) {
            buf_ += format_double17(std::get<double>(v));
        } else if (std::holds_alternative<long long>(v)) {
            buf_ += std::to_string(std::get<long long>(v));
        } else if (std::holds_alternative<std::string>(v)) {
            const std::string& s = std::get<std::string>(v);
            if (needs_quoting(s)) {
                std::string quoted = "\"";
                for (char ch : s) {
                    if (ch == '"') quoted += "\"\"";
                    else quoted += ch;
                }
                quoted += '"';
                buf_ += quoted;
            } else {
                buf_ += s;
            }
        }
        // monostate renders as an empty field
    }
    buf_ += '\n';
}

}  // namespace rmnoise
