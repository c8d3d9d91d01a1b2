// CSV output: comma separated, LF line endings, header row first, numbers in
// shortest round-trip form.
#ifndef LIGHTHARVEST_CSV_HPP
#define LIGHTHARVEST_CSV_HPP

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace lightharvest::csv {

inline std::string number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

template <class Int>
    requires std::is_integral_v<Int>
std::string number(Int v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Quotes a field when it holds a comma, quote or line break.
inline std::string field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class Table {
public:
    explicit Table(std::vector<std::string> header) : header_(std::move(header)) {
        if (header_.empty()) throw std::invalid_argument("csv::Table: empty header");
    }

    void add(std::vector<std::string> cells) {
        if (cells.size() != header_.size())
            throw std::invalid_argument("csv::Table: row has " + std::to_string(cells.size()) + " cells, header has " +
                                        std::to_string(header_.size()));
        rows_.push_back(std::move(cells));
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += field(cells[i]);
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace lightharvest::csv

#endif  // LIGHTHARVEST_CSV_HPP
