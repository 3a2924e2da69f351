#include "topseg/embeddings.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace topseg {

using json = nlohmann::json;

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char bytes[4] = {
        static_cast<unsigned char>(v & 0xff),
        static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff),
        static_cast<unsigned char>((v >> 24) & 0xff),
    };
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& what) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw ParseError("embeddings file truncated while reading " + what);
    }
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(out, bits);
}

float read_f32(std::istream& in, const std::string& what) {
    std::uint32_t bits = read_u32(in, what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

void check_finite(const std::vector<float>& vec, const std::string& what) {
    for (float v : vec) {
        if (!std::isfinite(v)) {
            throw ProviderError("non-finite embedding value in " + what);
        }
    }
}

} // namespace

void write_embeddings_binary(const std::filesystem::path& path, std::size_t dimension,
                             std::span<const EmbeddingRecord> records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    write_u32(out, static_cast<std::uint32_t>(dimension));
    write_u32(out, static_cast<std::uint32_t>(records.size()));
    for (const EmbeddingRecord& rec : records) {
        if (rec.vector.size() != dimension) {
            throw DimensionMismatchError("record for " + rec.doc_id + " has dimension " +
                                         std::to_string(rec.vector.size()) + ", expected " +
                                         std::to_string(dimension));
        }
        write_u32(out, static_cast<std::uint32_t>(rec.doc_id.size()));
        out.write(rec.doc_id.data(), static_cast<std::streamsize>(rec.doc_id.size()));
        write_u32(out, static_cast<std::uint32_t>(rec.sentence_index));
        for (float v : rec.vector) {
            write_f32(out, v);
        }
    }
}

std::vector<EmbeddingRecord> read_embeddings_binary(const std::filesystem::path& path,
                                                    std::size_t& dimension) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open embeddings file: " + path.string());
    }
    dimension = read_u32(in, "dimension");
    std::uint32_t count = read_u32(in, "count");
    std::vector<EmbeddingRecord> records;
    records.reserve(count);
    for (std::uint32_t r = 0; r < count; ++r) {
        EmbeddingRecord rec;
        std::uint32_t id_len = read_u32(in, "doc_id length");
        rec.doc_id.resize(id_len);
        if (!in.read(rec.doc_id.data(), id_len)) {
            throw ParseError("embeddings file truncated while reading doc_id");
        }
        rec.sentence_index = read_u32(in, "sentence index");
        rec.vector.reserve(dimension);
        for (std::size_t d = 0; d < dimension; ++d) {
            rec.vector.push_back(read_f32(in, "vector value"));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void write_embeddings_jsonl(const std::filesystem::path& path,
                            std::span<const EmbeddingRecord> records) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open " + path.string() + " for writing");
    }
    for (const EmbeddingRecord& rec : records) {
        json line = {
            {"doc_id", rec.doc_id},
            {"sentence_index", rec.sentence_index},
            {"vector", rec.vector},
        };
        out << line.dump() << '\n';
    }
}

std::vector<EmbeddingRecord> read_embeddings_jsonl(const std::filesystem::path& path,
                                                   std::size_t& dimension) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open embeddings file: " + path.string());
    }
    std::vector<EmbeddingRecord> records;
    dimension = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& ex) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
        }
        for (const char* field : {"doc_id", "sentence_index", "vector"}) {
            if (!doc.contains(field)) {
                throw SchemaViolationError(path.string() + ":" + std::to_string(line_no) +
                                           ": missing field \"" + field + "\"");
            }
        }
        EmbeddingRecord rec;
        rec.doc_id = doc.at("doc_id").get<std::string>();
        rec.sentence_index = doc.at("sentence_index").get<std::size_t>();
        rec.vector = doc.at("vector").get<std::vector<float>>();
        if (dimension == 0) {
            dimension = rec.vector.size();
        } else if (rec.vector.size() != dimension) {
            throw DimensionMismatchError(path.string() + ":" + std::to_string(line_no) +
                                         ": vector dimension " + std::to_string(rec.vector.size()) +
                                         " != " + std::to_string(dimension));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::filesystem::path& path) {
    std::vector<EmbeddingRecord> records;
    if (path.extension() == ".jsonl") {
        records = read_embeddings_jsonl(path, dimension_);
    } else {
        records = read_embeddings_binary(path, dimension_);
    }
    for (EmbeddingRecord& rec : records) {
        if (rec.vector.size() != dimension_) {
            throw DimensionMismatchError("record for " + rec.doc_id + " has wrong dimension");
        }
        check_finite(rec.vector, rec.doc_id);
        vectors_[{rec.doc_id, rec.sentence_index}] = std::move(rec.vector);
    }
}

FileEmbeddingProvider::FileEmbeddingProvider(std::size_t dimension,
                                             std::vector<EmbeddingRecord> records)
    : dimension_(dimension) {
    for (EmbeddingRecord& rec : records) {
        if (rec.vector.size() != dimension_) {
            throw DimensionMismatchError("record for " + rec.doc_id + " has wrong dimension");
        }
        check_finite(rec.vector, rec.doc_id);
        vectors_[{rec.doc_id, rec.sentence_index}] = std::move(rec.vector);
    }
}

std::vector<std::vector<float>> FileEmbeddingProvider::embed(const std::string& doc_id,
                                                             std::size_t first_sentence,
                                                             std::span<const std::string> texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (std::size_t k = 0; k < texts.size(); ++k) {
        auto it = vectors_.find({doc_id, first_sentence + k});
        if (it == vectors_.end()) {
            throw ProviderError("no embedding for " + doc_id + " sentence " +
                                std::to_string(first_sentence + k));
        }
        out.push_back(it->second);
    }
    return out;
}

} // namespace topseg
