#include "ctindex/fhir/bundle.hpp"

#include <map>
#include <set>
#include <unordered_set>

#include "ctindex/error.hpp"

namespace ctindex::fhir {

using nlohmann::json;

namespace {

std::string full_url_for(const std::string& id) {
    // 32 hex chars laid out as a UUID.
    return "urn:uuid:" + id.substr(0, 8) + "-" + id.substr(8, 4) + "-" + id.substr(12, 4) + "-" +
           id.substr(16, 4) + "-" + id.substr(20, 12);
}

void rewrite_references(json& node, const std::map<std::string, std::string>& urls) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (it.key() == "reference" && it->is_string()) {
                const auto found = urls.find(it->get<std::string>());
                if (found != urls.end()) {
                    *it = found->second;
                }
            } else {
                rewrite_references(*it, urls);
            }
        }
    } else if (node.is_array()) {
        for (auto& child : node) {
            rewrite_references(child, urls);
        }
    }
}

void collect_references(const json& node, std::vector<std::string>& out) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (it.key() == "reference" && it->is_string()) {
                out.push_back(it->get<std::string>());
            } else {
                collect_references(*it, out);
            }
        }
    } else if (node.is_array()) {
        for (const auto& child : node) {
            collect_references(child, out);
        }
    }
}

std::string_view identifier_system(ResourceType type) {
    return type == ResourceType::Patient ? kPatientIdentifierSystem : kDeviceIdentifierSystem;
}

}  // namespace

TransactionBundle to_transaction_bundle(std::span<const ResourceSet> sets) {
    std::map<std::string, std::string> urls;
    for (const auto& set : sets) {
        for (const auto* r : set.all()) {
            urls.emplace(r->reference(), full_url_for(r->id));
        }
    }

    TransactionBundle bundle;
    const auto add = [&](const Resource& r, Directive directive) {
        BundleEntry e;
        e.full_url = urls.at(r.reference());
        e.resource = r.body;
        rewrite_references(e.resource, urls);
        e.directive = directive;
        e.url = std::string(to_string(r.type));
        if (directive == Directive::conditional_create) {
            e.if_none_exist = "identifier=" + std::string(identifier_system(r.type)) + "|" + r.natural_key;
        }
        bundle.entries.push_back(std::move(e));
    };

    std::unordered_set<std::string> seen;
    for (const auto& set : sets) {
        if (seen.insert(set.patient.reference()).second) {
            add(set.patient, Directive::conditional_create);
        }
    }
    for (const auto& set : sets) {
        if (seen.insert(set.device.reference()).second) {
            add(set.device, Directive::conditional_create);
        }
    }
    for (const auto& set : sets) {
        add(set.imaging_study, Directive::create);
        add(set.body_structure, Directive::create);
        add(set.provenance, Directive::create);
    }
    return bundle;
}

std::vector<std::string> unresolved_references(const TransactionBundle& bundle) {
    std::set<std::string> urls;
    for (const auto& e : bundle.entries) {
        urls.insert(e.full_url);
    }
    std::vector<std::string> refs;
    for (const auto& e : bundle.entries) {
        collect_references(e.resource, refs);
    }
    std::vector<std::string> missing;
    for (auto& r : refs) {
        if (!urls.contains(r)) {
            missing.push_back(std::move(r));
        }
    }
    return missing;
}

std::int64_t unique_resource_count(std::int64_t series_count, std::int64_t patient_count,
                                   std::int64_t device_identity_count) {
    if (series_count < 0 || patient_count < 0 || device_identity_count < 0) {
        throw Error(Errc::invalid_counts, "counts must be non-negative");
    }
    if (patient_count > series_count) {
        throw Error(Errc::invalid_counts, "patient_count exceeds series_count");
    }
    return 3 * series_count + patient_count + device_identity_count;
}

std::string serialize_bundle(const TransactionBundle& bundle) {
    json entries = json::array();
    for (const auto& e : bundle.entries) {
        json request{{"method", "POST"}, {"url", e.url}};
        if (e.directive == Directive::conditional_create) {
            request["ifNoneExist"] = e.if_none_exist;
        }
        entries.push_back({{"fullUrl", e.full_url}, {"resource", e.resource}, {"request", std::move(request)}});
    }
    const json doc{{"resourceType", "Bundle"}, {"type", "transaction"}, {"entry", std::move(entries)}};
    return doc.dump(2) + "\n";
}

TransactionBundle parse_bundle(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw Error(Errc::malformed_file, std::string("bundle is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("resourceType") != "Bundle" || doc.at("type") != "transaction") {
            throw Error(Errc::schema_violation, "not a transaction Bundle");
        }
        TransactionBundle bundle;
        for (const auto& item : doc.at("entry")) {
            BundleEntry e;
            e.full_url = item.at("fullUrl").get<std::string>();
            e.resource = item.at("resource");
            const auto& request = item.at("request");
            if (request.at("method") != "POST") {
                throw Error(Errc::schema_violation, "only POST entries are supported");
            }
            e.url = request.at("url").get<std::string>();
            if (const auto it = request.find("ifNoneExist"); it != request.end()) {
                e.directive = Directive::conditional_create;
                e.if_none_exist = it->get<std::string>();
            }
            bundle.entries.push_back(std::move(e));
        }
        return bundle;
    } catch (const json::exception& e) {
        throw Error(Errc::schema_violation, std::string("bundle has unexpected shape: ") + e.what());
    }
}

std::string to_ndjson(const TransactionBundle& bundle) {
    std::string out;
    for (const auto& e : bundle.entries) {
        out += e.resource.dump();
        out.push_back('\n');
    }
    return out;
}

}  // namespace ctindex::fhir
