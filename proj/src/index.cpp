#include "wsi/index.hpp"

#include <algorithm>
#include <thread>

#include "binary_io.hpp"
#include "wsi/error.hpp"
#include "wsi/rng.hpp"

namespace wsi {

namespace {

constexpr char kMagic[] = "WSIX1";
constexpr std::size_t kMagicLen = 5;
constexpr std::size_t kHeaderBytes = kMagicLen + 4 + 4;
constexpr std::size_t kEntryBytes = 4 + 8 + 4;
constexpr std::size_t kPostingBytes = 8 + 4 + 2 + 1 + 1 + 4 * kMaxSubstitutes;

}  // namespace

std::span<const Posting> InvertedIndex::lookup(LemmaId lemma) const noexcept {
    if (lemma >= lists_.size()) return {};
    return lists_[lemma];
}

std::size_t InvertedIndex::total_postings() const noexcept {
    std::size_t n = 0;
    for (const auto& l : lists_) n += l.size();
    return n;
}

std::vector<LemmaId> InvertedIndex::lemmas() const {
    std::vector<LemmaId> out;
    for (std::size_t i = 0; i < lists_.size(); ++i)
        if (!lists_[i].empty()) out.push_back(static_cast<LemmaId>(i));
    return out;
}

InvertedIndex build_index(std::span<const SubstituteRecord> records, std::size_t vocab_size) {
    InvertedIndex ix(vocab_size);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (auto v = record_violations(r, vocab_size); !v.empty())
            throw IndexBuildError("record " + std::to_string(i) + ": " + v.front());
        ix.lists_[r.target].push_back({r.occ, r.substitutes});
    }
    for (auto& l : ix.lists_) std::sort(l.begin(), l.end());
    return ix;
}

InvertedIndex merge_indexes(const InvertedIndex& a, const InvertedIndex& b) {
    InvertedIndex out(std::max(a.vocab_size(), b.vocab_size()));
    for (std::size_t l = 0; l < out.lists_.size(); ++l) {
        auto la = a.lookup(static_cast<LemmaId>(l));
        auto lb = b.lookup(static_cast<LemmaId>(l));
        auto& dst = out.lists_[l];
        dst.reserve(la.size() + lb.size());
        std::merge(la.begin(), la.end(), lb.begin(), lb.end(), std::back_inserter(dst));
    }
    return out;
}

InvertedIndex build_index_sharded(const std::vector<std::vector<SubstituteRecord>>& shards,
                                  std::size_t vocab_size, std::size_t threads) {
    if (shards.empty()) return InvertedIndex(vocab_size);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<InvertedIndex> parts(shards.size());
    std::vector<std::exception_ptr> errors(shards.size());
    for (std::size_t base = 0; base < shards.size(); base += threads) {
        std::vector<std::jthread> pool;
        for (std::size_t i = base; i < std::min(shards.size(), base + threads); ++i)
            pool.emplace_back([&, i] {
                try {
                    parts[i] = build_index(shards[i], vocab_size);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    // Pairwise tree merge; the result does not depend on shard order because
    // every list is fully sorted.
    while (parts.size() > 1) {
        std::vector<InvertedIndex> next;
        for (std::size_t i = 0; i + 1 < parts.size(); i += 2) next.push_back(merge_indexes(parts[i], parts[i + 1]));
        if (parts.size() % 2) next.push_back(std::move(parts.back()));
        parts = std::move(next);
    }
    return std::move(parts.front());
}

std::vector<Posting> sample_occurrences(const InvertedIndex& index, LemmaId lemma, std::size_t cap,
                                        std::uint64_t seed) {
    auto all = index.lookup(lemma);
    if (all.size() <= cap) return {all.begin(), all.end()};
    Rng rng(derive_seed(seed, lemma));
    std::vector<std::size_t> reservoir(cap);
    for (std::size_t i = 0; i < cap; ++i) reservoir[i] = i;
    for (std::size_t i = cap; i < all.size(); ++i) {
        std::size_t j = rng.uniform(i + 1);
        if (j < cap) reservoir[j] = i;
    }
    std::sort(reservoir.begin(), reservoir.end());
    std::vector<Posting> out;
    out.reserve(cap);
    for (std::size_t i : reservoir) out.push_back(all[i]);
    return out;
}

std::string serialize_index(const InvertedIndex& index) {
    const auto lemmas = index.lemmas();
    std::string out;
    out.reserve(kHeaderBytes + lemmas.size() * kEntryBytes + index.total_postings() * kPostingBytes);
    out.append(kMagic, kMagicLen);
    detail::put_u32(out, static_cast<std::uint32_t>(index.vocab_size()));
    detail::put_u32(out, static_cast<std::uint32_t>(lemmas.size()));
    std::uint64_t offset = kHeaderBytes + lemmas.size() * kEntryBytes;
    for (LemmaId l : lemmas) {
        detail::put_u32(out, l);
        detail::put_u64(out, offset);
        detail::put_u32(out, static_cast<std::uint32_t>(index.count(l)));
        offset += index.count(l) * kPostingBytes;
    }
    for (LemmaId l : lemmas)
        for (const auto& p : index.lookup(l)) {
            detail::put_u64(out, p.occ.doc_id);
            detail::put_u32(out, p.occ.sent_idx);
            detail::put_u16(out, p.occ.token_idx);
            out.push_back(static_cast<char>(p.substitutes.size()));
            out.push_back('\0');
            for (std::size_t k = 0; k < kMaxSubstitutes; ++k)
                detail::put_u32(out, k < p.substitutes.size() ? p.substitutes[k] : 0);
        }
    return out;
}

void save_index(const InvertedIndex& index, const std::string& path) { detail::write_file(path, serialize_index(index)); }

InvertedIndex parse_index(std::string_view bytes) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < kHeaderBytes || bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen))
        throw CorruptIndex("missing WSIX1 header");
    const std::uint32_t vocab_size = detail::get_u32(p + kMagicLen);
    const std::uint32_t entries = detail::get_u32(p + kMagicLen + 4);
    if ((bytes.size() - kHeaderBytes) / kEntryBytes < entries) throw CorruptIndex("truncated directory");

    InvertedIndex ix(vocab_size);
    std::uint64_t expected_offset = kHeaderBytes + static_cast<std::uint64_t>(entries) * kEntryBytes;
    std::int64_t prev_lemma = -1;
    for (std::uint32_t e = 0; e < entries; ++e) {
        const unsigned char* d = p + kHeaderBytes + e * kEntryBytes;
        const LemmaId lemma = detail::get_u32(d);
        const std::uint64_t offset = detail::get_u64(d + 4);
        const std::uint32_t count = detail::get_u32(d + 12);
        if (lemma >= vocab_size || static_cast<std::int64_t>(lemma) <= prev_lemma)
            throw CorruptIndex("bad directory entry " + std::to_string(e));
        if (offset != expected_offset || count == 0) throw CorruptIndex("bad posting offset in entry " + std::to_string(e));
        if ((bytes.size() - offset) / kPostingBytes < count) throw CorruptIndex("truncated posting block");
        prev_lemma = lemma;
        auto& list = ix.lists_[lemma];
        list.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            const unsigned char* q = p + offset + i * kPostingBytes;
            Posting post;
            post.occ.doc_id = detail::get_u64(q);
            post.occ.sent_idx = detail::get_u32(q + 8);
            post.occ.token_idx = detail::get_u16(q + 12);
            const unsigned n = q[14];
            if (n == 0 || n > kMaxSubstitutes) throw CorruptIndex("bad substitute count");
            for (unsigned k = 0; k < n; ++k) post.substitutes.push_back(detail::get_u32(q + 16 + 4 * k));
            list.push_back(post);
        }
        expected_offset = offset + static_cast<std::uint64_t>(count) * kPostingBytes;
    }
    if (expected_offset != bytes.size()) throw CorruptIndex("trailing or missing bytes");
    return ix;
}

InvertedIndex load_index(const std::string& path) { return parse_index(detail::read_file(path)); }

}  // namespace wsi
