#include "csv_util.hpp"

#include <boost/algorithm/string/split.hpp>
#include <boost/algorithm/string/trim.hpp>

#include <charconv>
#include <fstream>

#include "hybridpv/errors.hpp"

namespace hpv::detail {

std::size_t NumericTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw DataError("missing column '" + name + "'");
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    NumericTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ": empty file");
    }
    boost::algorithm::trim(line);
    boost::algorithm::split(t.header, line, [](char c) { return c == ','; });
    for (auto& h : t.header) {
        boost::algorithm::trim(h);
    }
    t.columns.resize(t.header.size());

    std::vector<std::string> fields;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        boost::algorithm::trim(line);
        if (line.empty()) {
            continue;
        }
        boost::algorithm::split(fields, line, [](char c) { return c == ','; });
        if (fields.size() != t.header.size()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(t.header.size()) + " fields");
        }
        for (std::size_t c = 0; c < fields.size(); ++c) {
            boost::algorithm::trim(fields[c]);
            const std::string& f = fields[c];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec != std::errc() || ptr != f.data() + f.size()) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric field '" + f +
                                "' in column '" + t.header[c] + "'");
            }
            t.columns[c].push_back(v);
        }
        ++t.rows;
    }
    return t;
}

}  // namespace hpv::detail
