#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"
#include "render.hpp"

namespace ifs {

inline constexpr const char* tool_name = "ifs-lab";
inline constexpr const char* tool_version = "0.1.0";

/*!
 * Everything one run emits. The summary is the JSON document written as
 * summary.json; write_report appends the "files" list to it.
 */
struct ReportBundle {
    std::vector<CsvTable> tables;
    nlohmann::ordered_json summary = nlohmann::ordered_json::object();
    std::optional<PpmImage> image;
    std::string image_name = "attractor";
    /// A NotFound-class outcome (no chain connection, unreachable target).
    bool not_found = false;
};

namespace detail {
inline void write_atomically(const std::filesystem::path& path, const std::string& bytes)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorKind::Io, tmp.string() + ": cannot open for writing");
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            throw Error(ErrorKind::Io, tmp.string() + ": write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, path.string() + ": rename failed: " + ec.message());
    }
}
}  // namespace detail

/*!
 * Writes <table>.csv for each table, <image_name>.ppm when an image is
 * present, and summary.json last. Each file is written to a temporary name
 * and renamed into place. Returns the paths in write order.
 */
inline std::vector<std::filesystem::path> write_report(const ReportBundle& bundle,
                                                       const std::filesystem::path& out_dir)
{
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorKind::Io, out_dir.string() + ": cannot create directory: " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    std::vector<std::string> names;
    for (const auto& t : bundle.tables) {
        if (t.name().empty() || t.name() == "summary") {
            throw Error(ErrorKind::InvalidParameter, "invalid table name '" + t.name() + "'");
        }
        names.push_back(t.name() + ".csv");
    }
    if (bundle.image) {
        names.push_back(bundle.image_name + ".ppm");
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (names[i] == names[j]) {
                throw Error(ErrorKind::InvalidParameter, "duplicate output file " + names[i]);
            }
        }
    }

    std::size_t next = 0;
    for (const auto& t : bundle.tables) {
        written.push_back(out_dir / names[next++]);
        detail::write_atomically(written.back(), t.str());
    }
    if (bundle.image) {
        written.push_back(out_dir / names[next++]);
        detail::write_atomically(written.back(), bundle.image->bytes());
    }

    nlohmann::ordered_json summary = bundle.summary;
    summary["files"] = names;
    written.push_back(out_dir / "summary.json");
    detail::write_atomically(written.back(), summary.dump(2) + "\n");
    return written;
}

}  // namespace ifs
