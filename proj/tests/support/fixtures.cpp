#include "fixtures.hpp"

#include <atomic>
#include <random>
#include <unistd.h>

#include "ctindex/time.hpp"

namespace ctindex::testing {

const ingest::CatalogRegistry& catalogs() {
    static const auto registry = ingest::CatalogRegistry::load_directory(ingest::CatalogRegistry::default_directory());
    return registry;
}

const termmap::MappingTable& v1_mapping() {
    static const auto table = termmap::load_mapping(termmap::default_mapping_path(), catalogs());
    return table;
}

ingest::SeriesDescriptor make_series(std::string uid, std::string patient, std::string date) {
    ingest::SeriesDescriptor s;
    s.series_uid = std::move(uid);
    s.study_uid = s.series_uid + ".0";
    s.patient_pseudonym = std::move(patient);
    s.acquisition_date = *parse_iso_date(date);
    s.modality = ingest::Modality::CT;
    return s;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ctindex-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::filesystem::path golden_dir() { return CTINDEX_TEST_GOLDEN_DIR; }

}  // namespace ctindex::testing
