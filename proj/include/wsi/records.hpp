#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsi/types.hpp"

namespace wsi {

struct SubstituteRecord {
    Occurrence occ;
    LemmaId target = 0;
    SubstituteList substitutes;

    bool operator==(const SubstituteRecord&) const = default;
};

enum class RecordFormat { Jsonl, Binary };

/// ".subbin" selects the binary form, anything else JSONL.
RecordFormat format_for_path(const std::string& path);

/// Empty result means the record satisfies every invariant.
std::vector<std::string> record_violations(const SubstituteRecord& rec, std::size_t vocab_size);

std::string record_to_json_line(const SubstituteRecord& rec);
SubstituteRecord record_from_json_line(const std::string& line, std::uint64_t line_no = 0);

/// Forward-only reader. Format is detected from the file content: the
/// "SUBB1" magic selects binary, '{' (or an empty file) selects JSONL.
class RecordReader {
public:
    explicit RecordReader(const std::string& path);

    std::optional<SubstituteRecord> next();
    RecordFormat format() const noexcept { return format_; }

private:
    std::optional<SubstituteRecord> next_jsonl();
    std::optional<SubstituteRecord> next_binary();

    std::ifstream in_;
    RecordFormat format_ = RecordFormat::Jsonl;
    std::uint64_t offset_ = 0;
    std::uint64_t line_no_ = 0;
};

class RecordWriter {
public:
    RecordWriter(const std::string& path, RecordFormat format);
    explicit RecordWriter(const std::string& path) : RecordWriter(path, format_for_path(path)) {}

    void write(const SubstituteRecord& rec);
    void close();

private:
    std::ofstream out_;
    RecordFormat format_;
    std::string buf_;
};

std::vector<SubstituteRecord> read_records(const std::string& path);
void write_records(const std::string& path, const std::vector<SubstituteRecord>& records,
                   std::optional<RecordFormat> format = std::nullopt);

}  // namespace wsi
