#pragma once

#include <string>

#include "kroncov/panel.hpp"

namespace kroncov {

enum class NaPolicy { Fail, DropRow };

struct CsvOptions {
    char delimiter = ',';
    NaPolicy na_policy = NaPolicy::Fail;
};

// Rectangular CSV with a header row of column names and numeric data rows.
// Row/column indices in errors are 1-based file positions.
ReturnPanel ingest_csv(const std::string& path, const CsvOptions& options = CsvOptions{});
ReturnPanel parse_csv(const std::string& text, const CsvOptions& options = CsvOptions{});

}  // namespace kroncov
