#ifndef RMNOISE_JSONIO_HPP
#define RMNOISE_JSONIO_HPP

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rmnoise {

// %.17g rendering: enough decimal digits to round-trip any double, with no
// locale dependence.
std::string format_double17(double value);

// Serializes an ordered_json document with all floating-point numbers
// rendered via format_double17. Two-space indentation, or single-line
// when compact.
std::string dump_json17(const nlohmann::ordered_json& doc, bool compact = false);

// RFC-4180 table writer ('\n' line endings, quoting only where required).
// Metadata is carried in '#'-prefixed lines preceding the header row.
class CsvWriter {
  public:
    struct Cell {
        std::variant<std::monostate, double, long long, std::string> value;
        Cell() = default;
        Cell(double v) : value(v) {}
        Cell(long long v) : value(v) {}
        Cell(int v) : value(static_cast<long long>(v)) {}
        Cell(const char* v) : value(std::string(v)) {}
        Cell(std::string v) : value(std::move(v)) {}
    };

    void comment(const std::string& line);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<Cell>& cells);
    const std::string& str() const { return buf_; }

  private:
    std::string buf_;
    size_t n_columns_ = 0;
};

}  // namespace rmnoise

#endif
