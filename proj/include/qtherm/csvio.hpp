// csvio.hpp — CSV emission with #-prefixed metadata lines, a tolerant reader
// for round-trip tests, and the per-run manifest.

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qtherm::io {

inline constexpr const char* kCsvSchemaVersion = "1";

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
              const std::vector<std::string>& metadata = {})
        : out_(path), columns_(columns.size()) {
        if (!out_) {
            throw std::runtime_error("CsvWriter: cannot open " + path.string());
        }
        out_ << "# csv-schema: " << kCsvSchemaVersion << "\n";
        for (const auto& line : metadata) {
            out_ << "# " << line << "\n";
        }
        for (std::size_t i = 0; i < columns.size(); ++i) {
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
        }
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) {
            throw std::invalid_argument("CsvWriter: cell count does not match header");
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
        }
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        row(cells);
    }

private:
    std::ofstream out_;
    std::size_t columns_;
};

struct CsvTable {
    std::vector<std::string> metadata;  // without the leading "# "
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw std::out_of_range("CsvTable: no column named " + name);
    }

    std::vector<double> numeric(const std::string& name) const {
        const std::size_t idx = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(std::stod(r[idx]));
        return out;
    }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_csv: cannot open " + path.string());
    }
    CsvTable table;
    std::string line;
    bool have_header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            table.metadata.push_back(line.size() > 2 ? line.substr(2) : "");
            continue;
        }
        if (!have_header) {
            table.columns = split(line);
            have_header = true;
        } else {
            table.rows.push_back(split(line));
        }
    }
    return table;
}

// ---------------------------------- manifest ----------------------------------

struct RunManifest {
    nlohmann::json config;
    std::string command;
    std::string version;
    std::uint64_t seed{0};
    std::string status{"running"};
    double wall_seconds{0.0};
    std::vector<std::string> outputs;
    nlohmann::json notes = nlohmann::json::object();  // convergence flags etc.

    nlohmann::json to_json() const {
        return nlohmann::json{{"format", "qtherm-run-manifest"},
                              {"manifest_version", 1},
                              {"command", command},
                              {"version", version},
                              {"units", "hbar = k_B = omega0 = 1"},
                              {"seed", seed},
                              {"status", status},
                              {"wall_seconds", wall_seconds},
                              {"config", config},
                              {"outputs", outputs},
                              {"notes", notes}};
    }
};

// Written before the first result row and atomically rewritten on completion.
inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    std::filesystem::create_directories(dir);
    const auto path = dir / "manifest.json";
    const auto tmp = dir / "manifest.json.tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw std::runtime_error("write_manifest: cannot open " + tmp.string());
        }
        out << manifest.to_json().dump(2) << '\n';
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace qtherm::io
