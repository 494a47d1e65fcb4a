#include "ctindex/ingest/manifest.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "ctindex/error.hpp"
#include "ctindex/text.hpp"

namespace ctindex::ingest {

std::vector<SeriesDescriptor> parse_manifest(std::string_view text, std::optional<Date> today) {
    const Date limit = today.value_or(today_utc());
    std::vector<SeriesDescriptor> out;
    std::unordered_set<std::string> seen;

    std::size_t line_no = 0;
    for (auto line : split(text, '\n')) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split(line, '|');
        if (fields.size() != 6 && fields.size() != 7) {
            throw Error(Errc::malformed_record,
                        "expected 6 or 7 '|'-separated fields, got " + std::to_string(fields.size()),
                        line_no);
        }
        SeriesDescriptor s;
        s.series_uid = std::string(trim(fields[0]));
        s.study_uid = std::string(trim(fields[1]));
        s.patient_pseudonym = std::string(trim(fields[2]));
        if (s.series_uid.empty() || s.study_uid.empty() || s.patient_pseudonym.empty()) {
            throw Error(Errc::malformed_record, "empty identifier field", line_no);
        }
        const auto date = parse_iso_date(trim(fields[3]));
        if (!date) {
            throw Error(Errc::malformed_record, "bad acquisition date '" + std::string(fields[3]) + "'",
                        line_no);
        }
        if (std::chrono::sys_days{*date} > std::chrono::sys_days{limit}) {
            throw Error(Errc::malformed_record, "acquisition date lies in the future", line_no);
        }
        s.acquisition_date = *date;
        const auto modality = parse_modality(trim(fields[4]));
        if (!modality) {
            throw Error(Errc::malformed_record, "unknown modality '" + std::string(fields[4]) + "'",
                        line_no);
        }
        s.modality = *modality;
        const auto source = parse_source(trim(fields[5]));
        if (!source) {
            throw Error(Errc::malformed_record, "source must be daily or legacy", line_no);
        }
        s.source = *source;
        if (fields.size() == 7 && !trim(fields[6]).empty()) {
            s.body_region_hint = std::string(trim(fields[6]));
        }
        if (!seen.insert(s.series_uid).second) {
            throw Error(Errc::duplicate_series_uid, "series_uid '" + s.series_uid + "' repeated",
                        line_no);
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SeriesDescriptor> load_manifest(const std::filesystem::path& path, std::optional<Date> today) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_error, "cannot read manifest " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_manifest(buf.str(), today);
}

std::string format_manifest_line(const SeriesDescriptor& s) {
    std::string line = s.series_uid + '|' + s.study_uid + '|' + s.patient_pseudonym + '|' +
                       format_iso_date(s.acquisition_date) + '|' + std::string(to_string(s.modality)) +
                       '|' + std::string(to_string(s.source));
    if (s.body_region_hint) {
        line += '|' + *s.body_region_hint;
    }
    return line;
}

std::string format_manifest(const std::vector<SeriesDescriptor>& series) {
    std::string out = "# series_uid|study_uid|patient_pseudonym|acquisition_date|modality|source[|body_region_hint]\n";
    for (const auto& s : series) {
        out += format_manifest_line(s);
        out += '\n';
    }
    return out;
}

}  // namespace ctindex::ingest
