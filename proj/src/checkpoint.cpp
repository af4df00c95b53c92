#include "afs/checkpoint.hpp"

#include "afs/bytes.hpp"
#include "afs/error.hpp"

#include "json.hpp"
#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <vector>

namespace afs {

namespace {

using nlohmann::json;

constexpr unsigned char kMagic[8] = {'A', 'F', 'S', 'C', 'K', 'P', 'T', '1'};
constexpr int kFormatVersion = 1;

void push_le_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    b.push_back(static_cast<unsigned char>(v));
    b.push_back(static_cast<unsigned char>(v >> 8));
    b.push_back(static_cast<unsigned char>(v >> 16));
    b.push_back(static_cast<unsigned char>(v >> 24));
}

std::uint32_t le_u32(const std::vector<unsigned char>& b, std::size_t off) {
    return std::uint32_t(b[off]) | (std::uint32_t(b[off + 1]) << 8) |
           (std::uint32_t(b[off + 2]) << 16) | (std::uint32_t(b[off + 3]) << 24);
}

bool carries_attention(CheckpointPart part) { return part != CheckpointPart::Learner; }
bool carries_learner(CheckpointPart part) { return part != CheckpointPart::Attention; }

std::vector<const ParamTensor*> part_tensors(const AfsModel& model, CheckpointPart part) {
    std::vector<const ParamTensor*> out;
    if (carries_attention(part))
        for (const ParamTensor* t : model.attention.tensors()) out.push_back(t);
    if (carries_learner(part))
        for (const ParamTensor* t : model.learner.tensors()) out.push_back(t);
    return out;
}

std::uint32_t buffer_crc(const unsigned char* data, std::size_t len) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(len)));
}

struct TensorEntry {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0; // byte offset into the payload
};

struct ParsedCheckpoint {
    CheckpointInfo info;
    std::vector<TensorEntry> tensors;
    std::size_t payload_begin = 0; // byte offset into the file
};

ParsedCheckpoint parse_checkpoint(const std::vector<unsigned char>& bytes,
                                  const std::string& path) {
    if (bytes.size() < sizeof(kMagic) + 4 + 4) throw DataError(path + ": truncated checkpoint");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw DataError(path + ": not a checkpoint file (bad magic)");
    const std::size_t meta_len = le_u32(bytes, 8);
    const std::size_t payload_begin = 12 + meta_len;
    if (payload_begin + 4 > bytes.size()) throw DataError(path + ": truncated checkpoint");

    const std::uint32_t stored_crc = le_u32(bytes, bytes.size() - 4);
    const std::uint32_t actual_crc = buffer_crc(bytes.data(), bytes.size() - 4);
    if (stored_crc != actual_crc)
        throw DataError(path + ": checksum mismatch (file corrupt or truncated)");

    json meta;
    try {
        meta = json::parse(bytes.begin() + 12, bytes.begin() + static_cast<std::ptrdiff_t>(payload_begin));
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid checkpoint metadata: " + e.what());
    }

    ParsedCheckpoint parsed;
    parsed.payload_begin = payload_begin;
    try {
        if (meta.at("format_version").get<int>() != kFormatVersion)
            throw DataError(path + ": unsupported checkpoint format version " +
                            meta.at("format_version").dump());
        if (meta.at("dtype").get<std::string>() != "float32")
            throw DataError(path + ": unsupported tensor dtype " + meta.at("dtype").dump());
        parsed.info.has_attention = meta.at("parts").at("attention").get<bool>();
        parsed.info.has_learner = meta.at("parts").at("learner").get<bool>();
        if (parsed.info.has_attention) {
            const json& a = meta.at("attention");
            parsed.info.attention.input_dim = a.at("input_dim").get<std::size_t>();
            parsed.info.attention.extract_dim = a.at("extract_dim").get<std::size_t>();
            parsed.info.attention.hidden_layers = a.at("hidden_layers").get<std::size_t>();
            parsed.info.attention.hidden_width = a.at("hidden_width").get<std::size_t>();
        }
        if (parsed.info.has_learner) {
            const json& l = meta.at("learner");
            parsed.info.learner.input_dim = l.at("input_dim").get<std::size_t>();
            parsed.info.learner.class_count = l.at("class_count").get<std::size_t>();
            parsed.info.learner.hidden = l.at("hidden").get<std::vector<std::size_t>>();
        }
        std::size_t offset = 0;
        for (const json& t : meta.at("tensors")) {
            TensorEntry entry;
            entry.name = t.at("name").get<std::string>();
            entry.rows = t.at("rows").get<std::size_t>();
            entry.cols = t.at("cols").get<std::size_t>();
            entry.offset = offset;
            offset += entry.rows * entry.cols * 4;
            parsed.tensors.push_back(std::move(entry));
        }
        const std::size_t payload_size = bytes.size() - 4 - payload_begin;
        if (offset != payload_size)
            throw DataError(path + ": tensor table declares " + std::to_string(offset) +
                            " payload bytes, file has " + std::to_string(payload_size));
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid checkpoint metadata: " + e.what());
    }
    return parsed;
}

} // namespace

void save_checkpoint(const AfsModel& model, const std::string& path, CheckpointPart part) {
    const std::vector<const ParamTensor*> tensors = part_tensors(model, part);

    json meta;
    meta["format_version"] = kFormatVersion;
    meta["dtype"] = "float32";
    meta["parts"] = {{"attention", carries_attention(part)},
                     {"learner", carries_learner(part)}};
    if (carries_attention(part)) {
        const AttentionConfig& a = model.attention.config;
        meta["attention"] = {{"input_dim", a.input_dim},
                             {"extract_dim", a.extract_dim},
                             {"hidden_layers", a.hidden_layers},
                             {"hidden_width", a.hidden_width}};
    }
    if (carries_learner(part)) {
        const LearnerConfig& l = model.learner.config;
        meta["learner"] = {{"input_dim", l.input_dim},
                           {"class_count", l.class_count},
                           {"hidden", l.hidden}};
    }
    json table = json::array();
    for (const ParamTensor* t : tensors)
        table.push_back({{"name", t->name},
                         {"rows", t->value.rows()},
                         {"cols", t->value.cols()}});
    meta["tensors"] = std::move(table);
    const std::string meta_str = meta.dump();

    std::vector<unsigned char> buf;
    std::size_t payload = 0;
    for (const ParamTensor* t : tensors) payload += t->value.size() * 4;
    buf.reserve(12 + meta_str.size() + payload + 4);
    buf.insert(buf.end(), kMagic, kMagic + sizeof(kMagic));
    push_le_u32(buf, static_cast<std::uint32_t>(meta_str.size()));
    buf.insert(buf.end(), meta_str.begin(), meta_str.end());
    for (const ParamTensor* t : tensors) {
        const double* v = t->value.data();
        for (std::size_t i = 0; i < t->value.size(); ++i) {
            const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(v[i]));
            push_le_u32(buf, bits);
        }
    }
    push_le_u32(buf, buffer_crc(buf.data(), buf.size()));
    write_binary_file_atomic(path, buf);
}

CheckpointInfo read_checkpoint_info(const std::string& path) {
    return parse_checkpoint(read_binary_file(path), path).info;
}

CheckpointInfo load_checkpoint(AfsModel& model, const std::string& path, CheckpointPart part) {
    const std::vector<unsigned char> bytes = read_binary_file(path);
    const ParsedCheckpoint parsed = parse_checkpoint(bytes, path);

    if (carries_attention(part) && !parsed.info.has_attention)
        throw DataError(path + ": checkpoint has no attention parameters");
    if (carries_learner(part) && !parsed.info.has_learner)
        throw DataError(path + ": checkpoint has no learner parameters");

    std::vector<ParamTensor*> targets;
    if (carries_attention(part))
        for (ParamTensor* t : model.attention.tensors()) targets.push_back(t);
    if (carries_learner(part))
        for (ParamTensor* t : model.learner.tensors()) targets.push_back(t);

    for (ParamTensor* t : targets) {
        const TensorEntry* entry = nullptr;
        for (const TensorEntry& e : parsed.tensors)
            if (e.name == t->name) entry = &e;
        if (!entry) throw DataError(path + ": checkpoint missing tensor " + t->name);
        if (entry->rows != t->value.rows() || entry->cols != t->value.cols())
            throw DataError(path + ": tensor " + t->name + " has shape " +
                            std::to_string(entry->rows) + "x" + std::to_string(entry->cols) +
                            ", model expects " + shape_str(t->value));
        const std::size_t base = parsed.payload_begin + entry->offset;
        double* v = t->value.data();
        for (std::size_t i = 0; i < t->value.size(); ++i) {
            const std::uint32_t bits = le_u32(bytes, base + i * 4);
            v[i] = static_cast<double>(std::bit_cast<float>(bits));
        }
        t->zero_grad();
        t->zero_adam_state();
    }
    return parsed.info;
}

} // namespace afs
