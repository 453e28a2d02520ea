#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wsi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define WSI_DEFINE_ERROR(Name)                 \
    class Name : public Error {                \
    public:                                    \
        using Error::Error;                    \
    };

WSI_DEFINE_ERROR(DuplicateLemma)
WSI_DEFINE_ERROR(MalformedVocab)
WSI_DEFINE_ERROR(UnknownFormat)
WSI_DEFINE_ERROR(InvalidSpec)
WSI_DEFINE_ERROR(IndexBuildError)
WSI_DEFINE_ERROR(CorruptIndex)
WSI_DEFINE_ERROR(ModularityUndefined)
WSI_DEFINE_ERROR(TagError)
WSI_DEFINE_ERROR(TrainError)
WSI_DEFINE_ERROR(OovError)
WSI_DEFINE_ERROR(GroupError)
WSI_DEFINE_ERROR(IoError)

#undef WSI_DEFINE_ERROR

/// Truncated or malformed record; offset is a byte offset for binary input
/// and a 1-based line number for JSONL input.
class CorruptRecord : public Error {
public:
    CorruptRecord(const std::string& what, std::uint64_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

}  // namespace wsi
