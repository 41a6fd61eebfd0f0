#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "hux/backend.hpp"
#include "hux/errors.hpp"
#include "hux/gaze.hpp"
#include "hux/scene.hpp"
#include "hux/text_util.hpp"

namespace hux {

struct MemoryMeta {
    std::string location;
    std::string time; // ISO-8601 text, recorded as given
    std::string device;

    friend bool operator==(const MemoryMeta&, const MemoryMeta&) = default;
};

// One multi-modal contextual memory: captions of the object and scene, the
// spoken context, image locations, metadata, and the generated retrieval
// keywords. Immutable once stored.
struct MemoryRecord {
    std::int64_t record_id = 0;
    std::string ooi_caption;
    std::string scene_caption;
    std::string object_type;
    std::optional<std::string> name;
    std::string user_context;
    std::string scene_image_path;
    std::string ooi_image_path;
    MemoryMeta meta;
    std::vector<std::string> keywords;

    friend bool operator==(const MemoryRecord&, const MemoryRecord&) = default;
};

struct RetrievalHit {
    std::int64_t record_id = 0;
    double score = 0.0;
    std::vector<std::string> matched_keywords;
};

namespace detail {

inline nlohmann::ordered_json memory_record_to_json(const MemoryRecord& r) {
    nlohmann::ordered_json j;
    j["record_id"] = r.record_id;
    j["object_of_interest"] = r.ooi_caption;
    j["scene_description"] = r.scene_caption;
    j["object_type"] = r.object_type;
    if (r.name) j["name"] = *r.name;
    j["user_context"] = r.user_context;
    j["original_scene_image_location"] = r.scene_image_path;
    j["cropped_object_of_interest_image_location"] = r.ooi_image_path;
    j["meta_information"] = {
        {"location", r.meta.location}, {"time", r.meta.time}, {"device", r.meta.device}};
    j["retrieval_keywords"] = r.keywords;
    return j;
}

inline MemoryRecord memory_record_from_json(const nlohmann::json& j) {
    MemoryRecord r;
    r.record_id = j.at("record_id").get<std::int64_t>();
    r.ooi_caption = j.at("object_of_interest").get<std::string>();
    r.scene_caption = j.at("scene_description").get<std::string>();
    r.object_type = j.at("object_type").get<std::string>();
    if (j.contains("name") && !j["name"].is_null())
        r.name = j["name"].get<std::string>();
    r.user_context = j.at("user_context").get<std::string>();
    r.scene_image_path = j.at("original_scene_image_location").get<std::string>();
    r.ooi_image_path = j.at("cropped_object_of_interest_image_location").get<std::string>();
    if (j.contains("meta_information")) {
        const auto& m = j["meta_information"];
        r.meta.location = m.value("location", "");
        r.meta.time = m.value("time", "");
        r.meta.device = m.value("device", "");
    }
    r.keywords = j.at("retrieval_keywords").get<std::vector<std::string>>();
    return r;
}

} // namespace detail

// Token-overlap retrieval over an in-memory record list backed by an
// append-only line-delimited store. Single writer; appends are fsynced
// before they are acknowledged.
class MemoryStore {
  public:
    MemoryStore() = default;

    static MemoryStore load(const std::string& path) {
        MemoryStore store;
        store.path_ = path;
        std::ifstream in(path);
        if (!in) return store; // absent store file means an empty store
        std::string line;
        std::size_t index = 0;
        while (std::getline(in, line)) {
            if (line.empty()) {
                ++index;
                continue;
            }
            try {
                store.records_.push_back(
                    detail::memory_record_from_json(nlohmann::json::parse(line)));
            } catch (const std::exception& e) {
                throw CorruptStore(index, "store record " + std::to_string(index) +
                                              " unreadable: " + e.what());
            }
            ++index;
        }
        if (!in.eof() && in.bad())
            throw CorruptStore(index, "store file unreadable at record " + std::to_string(index));
        return store;
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw PersistenceFailure("cannot write store file: " + path);
        for (const auto& r : records_) out << detail::memory_record_to_json(r).dump() << '\n';
        out.flush();
        if (!out) throw PersistenceFailure("short write to store file: " + path);
    }

    // Assigns the next record_id, appends to the store file (when the store
    // is file-backed), and fsyncs before returning.
    const MemoryRecord& append(MemoryRecord record) {
        record.record_id = next_record_id();
        if (!path_.empty()) {
            std::FILE* f = std::fopen(path_.c_str(), "ab");
            if (!f) throw PersistenceFailure("cannot append to store file: " + path_);
            const std::string line = detail::memory_record_to_json(record).dump() + "\n";
            const bool ok = std::fwrite(line.data(), 1, line.size(), f) == line.size() &&
                            std::fflush(f) == 0 && ::fsync(fileno(f)) == 0;
            std::fclose(f);
            if (!ok) throw PersistenceFailure("failed to persist record to: " + path_);
        }
        records_.push_back(std::move(record));
        return records_.back();
    }

    // score = |query tokens matched by the record's keyword tokens| / |query tokens|,
    // distinct lowercased tokens on both sides. Zero scores are dropped; ties
    // order by ascending record_id.
    std::vector<RetrievalHit> retrieve(const std::string& query) const {
        const std::set<std::string> query_tokens = token_set(query);
        if (query_tokens.empty()) throw EmptyQuery("retrieval query has no tokens");

        std::vector<RetrievalHit> hits;
        for (const auto& record : records_) {
            std::set<std::string> matched_tokens;
            std::vector<std::string> matched_keywords;
            for (const auto& keyword : record.keywords) {
                bool keyword_hit = false;
                for (const auto& token : tokenize(keyword)) {
                    if (query_tokens.count(token)) {
                        matched_tokens.insert(token);
                        keyword_hit = true;
                    }
                }
                if (keyword_hit) matched_keywords.push_back(keyword);
            }
            if (matched_tokens.empty()) continue;
            hits.push_back({record.record_id,
                            static_cast<double>(matched_tokens.size()) /
                                static_cast<double>(query_tokens.size()),
                            std::move(matched_keywords)});
        }
        std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.record_id < b.record_id;
        });
        return hits;
    }

    const std::vector<MemoryRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    const std::string& path() const { return path_; }

  private:
    std::int64_t next_record_id() const {
        std::int64_t max_id = 0;
        for (const auto& r : records_) max_id = std::max(max_id, r.record_id);
        return max_id + 1;
    }

    std::string path_; // empty for purely in-memory stores
    std::vector<MemoryRecord> records_;
};

inline MemoryStore load_store(const std::string& path) { return MemoryStore::load(path); }

inline void save_store(const MemoryStore& store, const std::string& path) { store.save(path); }

// Assemble and persist one memory: caption both images through the backend,
// generate retrieval keywords, store the record.
inline const MemoryRecord& create_memory(const FrameRecord& scene, const RoiCrop& roi,
                                         const std::string& object_type,
                                         std::optional<std::string> name,
                                         const std::string& user_context, const MemoryMeta& meta,
                                         Backend& keyword_gen, MemoryStore& store,
                                         const std::string& caption_instruction =
                                             "Describe the image.") {
    if (user_context.empty())
        throw Error("memory creation requires a non-empty user context");

    const std::string scene_caption = keyword_gen.caption(scene.image_ref, caption_instruction);
    const std::string ooi_caption = keyword_gen.caption(roi.image_ref, caption_instruction);
    if (scene_caption.empty() || ooi_caption.empty())
        throw MissingCaption("captioner returned an empty caption");

    MemoryRecord record;
    record.ooi_caption = ooi_caption;
    record.scene_caption = scene_caption;
    record.object_type = object_type;
    record.name = std::move(name);
    record.user_context = user_context;
    record.scene_image_path = scene.image_ref;
    record.ooi_image_path = roi.image_ref;
    record.meta = meta;
    record.keywords = keyword_gen.keywords(ooi_caption, scene_caption, user_context);
    if (record.keywords.empty())
        throw MissingCaption("keyword generator produced no keywords");
    return store.append(std::move(record));
}

} // namespace hux
