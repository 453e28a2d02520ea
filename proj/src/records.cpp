#include "wsi/records.hpp"

#include <algorithm>

#include <json.hpp>

#include "binary_io.hpp"
#include "wsi/error.hpp"

namespace wsi {

namespace {

constexpr char kMagic[] = "SUBB1";
constexpr std::size_t kMagicLen = 5;
constexpr std::size_t kFixedBytes = 20;

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

RecordFormat format_for_path(const std::string& path) {
    return ends_with(path, ".subbin") ? RecordFormat::Binary : RecordFormat::Jsonl;
}

std::vector<std::string> record_violations(const SubstituteRecord& rec, std::size_t vocab_size) {
    std::vector<std::string> out;
    if (rec.substitutes.empty()) out.push_back("empty substitute list");
    if (rec.substitutes.size() > kMaxSubstitutes) out.push_back("more than 5 substitutes");
    if (rec.target >= vocab_size) out.push_back("target id out of range");
    for (std::size_t i = 0; i < rec.substitutes.size(); ++i) {
        LemmaId s = rec.substitutes[i];
        if (s >= vocab_size) out.push_back("substitute id out of range");
        if (s == rec.target) out.push_back("target in substitutes");
        for (std::size_t j = 0; j < i; ++j)
            if (rec.substitutes[j] == s) out.push_back("duplicate substitute");
    }
    return out;
}

std::string record_to_json_line(const SubstituteRecord& rec) {
    std::string s = "{\"doc\":" + std::to_string(rec.occ.doc_id) + ",\"sent\":" + std::to_string(rec.occ.sent_idx) +
                    ",\"tok\":" + std::to_string(rec.occ.token_idx) + ",\"target\":" + std::to_string(rec.target) +
                    ",\"subs\":[";
    for (std::size_t i = 0; i < rec.substitutes.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(rec.substitutes[i]);
    }
    s += "]}";
    return s;
}

SubstituteRecord record_from_json_line(const std::string& line, std::uint64_t line_no) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptRecord(std::string("invalid JSON record: ") + e.what(), line_no);
    }
    try {
        SubstituteRecord rec;
        rec.occ.doc_id = j.at("doc").get<std::uint64_t>();
        rec.occ.sent_idx = j.at("sent").get<std::uint32_t>();
        auto tok = j.at("tok").get<std::uint64_t>();
        if (tok > UINT16_MAX) throw CorruptRecord("token index exceeds 16 bits", line_no);
        rec.occ.token_idx = static_cast<std::uint16_t>(tok);
        rec.target = j.at("target").get<LemmaId>();
        const auto& subs = j.at("subs");
        if (!subs.is_array() || subs.empty() || subs.size() > kMaxSubstitutes)
            throw CorruptRecord("subs must hold 1..5 ids", line_no);
        for (const auto& s : subs) rec.substitutes.push_back(s.get<LemmaId>());
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptRecord(std::string("bad record field: ") + e.what(), line_no);
    }
}

RecordReader::RecordReader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path);
    char head[kMagicLen] = {};
    in_.read(head, kMagicLen);
    std::streamsize got = in_.gcount();
    in_.clear();
    in_.seekg(0);
    if (got == 0) return;
    if (got == static_cast<std::streamsize>(kMagicLen) && std::equal(head, head + kMagicLen, kMagic)) {
        format_ = RecordFormat::Binary;
        in_.seekg(kMagicLen);
        offset_ = kMagicLen;
        return;
    }
    std::size_t i = 0;
    while (i < static_cast<std::size_t>(got) && (head[i] == ' ' || head[i] == '\n' || head[i] == '\r' || head[i] == '\t'))
        ++i;
    if (i == static_cast<std::size_t>(got) || head[i] == '{') return;
    throw UnknownFormat(path + ": unrecognized record file magic");
}

std::optional<SubstituteRecord> RecordReader::next() {
    return format_ == RecordFormat::Binary ? next_binary() : next_jsonl();
}

std::optional<SubstituteRecord> RecordReader::next_jsonl() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        return record_from_json_line(line, line_no_);
    }
    return std::nullopt;
}

std::optional<SubstituteRecord> RecordReader::next_binary() {
    const std::uint64_t start = offset_;
    std::uint64_t len = 0;
    int shift = 0;
    for (;;) {
        int c = in_.get();
        if (c == EOF) {
            if (shift == 0) return std::nullopt;
            throw CorruptRecord("truncated length prefix", start);
        }
        ++offset_;
        len |= static_cast<std::uint64_t>(c & 0x7f) << shift;
        if (!(c & 0x80)) break;
        shift += 7;
        if (shift > 63) throw CorruptRecord("length prefix overflow", start);
    }
    if (len < kFixedBytes + 4 || (len - kFixedBytes) % 4 != 0 || (len - kFixedBytes) / 4 > kMaxSubstitutes)
        throw CorruptRecord("invalid record length " + std::to_string(len), start);
    unsigned char buf[kFixedBytes + 4 * kMaxSubstitutes];
    in_.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(len));
    if (static_cast<std::uint64_t>(in_.gcount()) != len) throw CorruptRecord("truncated record", start);
    offset_ += len;

    SubstituteRecord rec;
    rec.occ.doc_id = static_cast<std::uint64_t>(detail::get_u32(buf)) |
                     (static_cast<std::uint64_t>(detail::get_u32(buf + 4)) << 32);
    rec.occ.sent_idx = detail::get_u32(buf + 8);
    std::uint32_t tok = detail::get_u32(buf + 12);
    if (tok > UINT16_MAX) throw CorruptRecord("token index exceeds 16 bits", start);
    rec.occ.token_idx = static_cast<std::uint16_t>(tok);
    rec.target = detail::get_u32(buf + 16);
    for (std::size_t i = 0; i < (len - kFixedBytes) / 4; ++i) rec.substitutes.push_back(detail::get_u32(buf + kFixedBytes + 4 * i));
    return rec;
}

RecordWriter::RecordWriter(const std::string& path, RecordFormat format)
    : out_(path, std::ios::binary | std::ios::trunc), format_(format) {
    if (!out_) throw IoError("cannot write " + path);
    if (format_ == RecordFormat::Binary) out_.write(kMagic, kMagicLen);
}

void RecordWriter::write(const SubstituteRecord& rec) {
    buf_.clear();
    if (format_ == RecordFormat::Jsonl) {
        buf_ = record_to_json_line(rec);
        buf_ += '\n';
    } else {
        detail::put_varint(buf_, kFixedBytes + 4 * rec.substitutes.size());
        detail::put_u32(buf_, static_cast<std::uint32_t>(rec.occ.doc_id & 0xffffffffULL));
        detail::put_u32(buf_, static_cast<std::uint32_t>(rec.occ.doc_id >> 32));
        detail::put_u32(buf_, rec.occ.sent_idx);
        detail::put_u32(buf_, rec.occ.token_idx);
        detail::put_u32(buf_, rec.target);
        for (LemmaId s : rec.substitutes) detail::put_u32(buf_, s);
    }
    out_.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
}

void RecordWriter::close() {
    out_.close();
    if (out_.fail()) throw IoError("record write failed");
}

std::vector<SubstituteRecord> read_records(const std::string& path) {
    RecordReader reader(path);
    std::vector<SubstituteRecord> out;
    while (auto rec = reader.next()) out.push_back(*rec);
    return out;
}

void write_records(const std::string& path, const std::vector<SubstituteRecord>& records,
                   std::optional<RecordFormat> format) {
    RecordWriter writer(path, format.value_or(format_for_path(path)));
    for (const auto& r : records) writer.write(r);
    writer.close();
}

}  // namespace wsi
