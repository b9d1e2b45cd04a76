#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sald/path.hpp"
#include "sald/types.hpp"

namespace sald {

inline const char* version_string() { return "0.1.0"; }

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

/// Shortest decimal form that round-trips a double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

/// CSV writer with a provenance comment header (config hash, version,
/// optional timestamp) followed by a column-name row. The body below the
/// header is byte-stable for identical inputs; the timestamp line is the
/// only nondeterministic part and is suppressible.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, const std::string& config_hash,
              const std::vector<std::string>& columns, bool timestamp) {
        std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
        out_.open(file);
        if (!out_) throw std::runtime_error("cannot open output file: " + file.string());
        out_ << "# sald " << version_string() << "\n";
        out_ << "# config=" << config_hash << "\n";
        if (timestamp) {
            const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
            out_ << "# generated=" << now << "\n";
        }
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
    }

    void row_mixed(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << values[i] << (i + 1 < values.size() ? "," : "\n");
    }

private:
    std::ofstream out_;
};

inline void write_json_file(const std::filesystem::path& file, const nlohmann::json& j) {
    std::filesystem::create_directories(file.parent_path().empty() ? "." : file.parent_path());
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot open output file: " + file.string());
    out << j.dump(2) << "\n";
}

/// Path CSV: t, x_1..x_d.
inline void write_path_csv(const std::filesystem::path& file, const ::sald::Path& p,
                           const std::string& config_hash, bool timestamp) {
    std::vector<std::string> cols{"t"};
    for (int k = 1; k <= p.dim(); ++k) cols.push_back("x_" + std::to_string(k));
    CsvWriter w(file, config_hash, cols, timestamp);
    for (std::size_t j = 0; j < p.breakpoints(); ++j) {
        std::vector<double> row{p.time(j)};
        for (int k = 0; k < p.dim(); ++k) row.push_back(p.value(j)[k]);
        w.row(row);
    }
}

/// Path from a CSV produced by write_path_csv.
inline ::sald::Path read_path_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open path file: " + file.string());
    std::vector<double> times;
    std::vector<Vec> values;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column names
            continue;
        }
        std::vector<double> nums;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) nums.push_back(std::stod(cell));
        if (nums.size() < 2) throw std::runtime_error("path csv: malformed row");
        times.push_back(nums[0]);
        Vec v(static_cast<Eigen::Index>(nums.size()) - 1);
        for (std::size_t k = 1; k < nums.size(); ++k) v[static_cast<Eigen::Index>(k - 1)] = nums[k];
        values.push_back(v);
    }
    return ::sald::Path(times, values);
}

}  // namespace sald
