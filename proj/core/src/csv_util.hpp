#pragma once

// Minimal numeric CSV reading shared by the loaders.

#include <filesystem>
#include <string>
#include <vector>

namespace hpv::detail {

struct NumericTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;  ///< column-major, aligned with header
    std::size_t rows = 0;

    /// Index of `name` in the header; throws DataError naming the column.
    std::size_t column(const std::string& name) const;
};

/// Parses a comma-separated file with one header line and numeric fields.
/// Throws DataError on I/O failure, ragged rows or non-numeric fields.
NumericTable read_numeric_csv(const std::filesystem::path& path);

}  // namespace hpv::detail
