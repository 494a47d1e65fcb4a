#pragma once

#include <filesystem>
#include <string>

#include "ctindex/ingest/label_catalog.hpp"
#include "ctindex/ingest/series.hpp"
#include "ctindex/termmap/mapping.hpp"

namespace ctindex::testing {

const ingest::CatalogRegistry& catalogs();
const termmap::MappingTable& v1_mapping();

ingest::SeriesDescriptor make_series(std::string uid, std::string patient = "PSN-1",
                                     std::string date = "2021-05-04");

/// Fresh empty directory under the system temp dir, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

std::filesystem::path golden_dir();

}  // namespace ctindex::testing
