#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdiff/errors.hpp"

namespace qdiff {

namespace fs = std::filesystem;

// full double precision, '.' decimal, locale-independent
inline std::string fmt_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(const fs::path& path) : out_(path) {
        if (!out_) throw ConfigError("cannot open for writing: " + path.string());
    }
    void header(const std::vector<std::string>& cols) { row_strings(cols); }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i)
            out_ << (i ? "," : "") << fmt_g17(vals[i]);
        out_ << "\n";
    }
    void row_strings(const std::vector<std::string>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) out_ << (i ? "," : "") << vals[i];
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

inline void write_json_file(const fs::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out << j.dump(2) << "\n";
}

// Builds a run directory under a temporary name and renames it into place on
// commit, so a failed run leaves no partially written output.
class AtomicRunDir {
  public:
    explicit AtomicRunDir(const fs::path& final_path) : final_path_(final_path) {
        std::random_device rd;
        tmp_path_ = final_path;
        tmp_path_ += ".tmp-" + std::to_string(rd());
        fs::create_directories(tmp_path_);
    }
    ~AtomicRunDir() {
        if (!committed_) {
            std::error_code ec;
            fs::remove_all(tmp_path_, ec);
        }
    }
    AtomicRunDir(const AtomicRunDir&) = delete;
    AtomicRunDir& operator=(const AtomicRunDir&) = delete;

    const fs::path& path() const { return tmp_path_; }

    void commit() {
        if (fs::exists(final_path_)) fs::remove_all(final_path_);
        fs::rename(tmp_path_, final_path_);
        committed_ = true;
    }

  private:
    fs::path final_path_;
    fs::path tmp_path_;
    bool committed_ = false;
};

}  // namespace qdiff
