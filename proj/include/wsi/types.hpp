#pragma once

#include <array>
#include <cassert>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace wsi {

using LemmaId = std::uint32_t;
using SenseId = std::uint32_t;

inline constexpr std::size_t kMaxSubstitutes = 5;

/// Position of one token occurrence in the corpus.
struct Occurrence {
    std::uint64_t doc_id = 0;
    std::uint32_t sent_idx = 0;
    std::uint16_t token_idx = 0;

    auto operator<=>(const Occurrence&) const = default;
    bool operator==(const Occurrence&) const = default;
};

/// Up to five lemma ids in descending substitute probability, stored inline.
class SubstituteList {
public:
    SubstituteList() = default;
    SubstituteList(std::initializer_list<LemmaId> ids) {
        for (LemmaId id : ids) push_back(id);
    }
    explicit SubstituteList(std::span<const LemmaId> ids) {
        for (LemmaId id : ids) push_back(id);
    }

    void push_back(LemmaId id) {
        assert(size_ < kMaxSubstitutes);
        ids_[size_++] = id;
    }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    LemmaId operator[](std::size_t i) const noexcept { return ids_[i]; }
    const LemmaId* begin() const noexcept { return ids_.data(); }
    const LemmaId* end() const noexcept { return ids_.data() + size_; }
    std::span<const LemmaId> span() const noexcept { return {ids_.data(), size_}; }

    bool contains(LemmaId id) const noexcept {
        for (std::size_t i = 0; i < size_; ++i)
            if (ids_[i] == id) return true;
        return false;
    }

    bool operator==(const SubstituteList& o) const noexcept {
        if (size_ != o.size_) return false;
        for (std::size_t i = 0; i < size_; ++i)
            if (ids_[i] != o.ids_[i]) return false;
        return true;
    }
    std::strong_ordering operator<=>(const SubstituteList& o) const noexcept {
        for (std::size_t i = 0; i < size_ && i < o.size_; ++i)
            if (auto c = ids_[i] <=> o.ids_[i]; c != 0) return c;
        return size_ <=> o.size_;
    }

private:
    std::array<LemmaId, kMaxSubstitutes> ids_{};
    std::uint8_t size_ = 0;
};

}  // namespace wsi
