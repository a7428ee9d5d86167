#include "kroncov/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace kroncov {

namespace {

bool is_na_token(std::string_view tok) {
    return tok.empty() || tok == "NA" || tok == "na" || tok == "NaN" || tok == "nan" ||
           tok == "null";
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

void split_line(std::string_view line, char delim, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
}

}  // namespace

ReturnPanel parse_csv(const std::string& text, const CsvOptions& options) {
    std::vector<std::string_view> fields;
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (trim(line).empty()) {
            if (pos > text.size()) break;
            continue;
        }
        split_line(line, options.delimiter, fields);
        if (line_no == 1) {
            for (std::string_view f : fields) names.emplace_back(f);
            continue;
        }
        if (fields.size() != names.size()) {
            throw RaggedRows(line_no, names.size(), fields.size());
        }
        std::vector<double> row(fields.size());
        bool drop = false;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            std::string_view tok = fields[c];
            if (is_na_token(tok)) {
                if (options.na_policy == NaPolicy::DropRow) {
                    drop = true;
                    break;
                }
                throw ParseError(line_no, c + 1, "missing value");
            }
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
            if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
                throw NonNumeric(line_no, c + 1, std::string(tok));
            }
            row[c] = value;
        }
        if (!drop) rows.push_back(std::move(row));
    }

    if (names.empty()) throw BadInput("CSV has no header row");
    if (rows.empty()) throw BadInput("CSV has no data rows");

    ReturnPanel panel;
    panel.names = std::move(names);
    panel.X.resize(static_cast<long>(rows.size()), static_cast<long>(panel.names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) panel.X(r, c) = rows[r][c];
    return panel;
}

ReturnPanel ingest_csv(const std::string& path, const CsvOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw BadInput("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), options);
}

}  // namespace kroncov
