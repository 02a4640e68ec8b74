#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace supernova {

/// Fixed-length bit-vector over time slots. Bit i set means "online in slot i".
///
/// Sized at construction; binary operations require equal sizes. Unused tail
/// bits of the last word are kept zero so word-wise popcounts stay exact.
class SlotSet {
 public:
  SlotSet() = default;
  explicit SlotSet(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  static SlotSet from_string(std::string_view bits) {
    SlotSet s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') s.set(i);
    }
    return s;
  }

  std::size_t size() const noexcept { return size_; }

  bool test(std::size_t i) const {
    assert(i < size_);
    return (words_[i >> 6] >> (i & 63)) & 1U;
  }

  void set(std::size_t i, bool value = true) {
    assert(i < size_);
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  void set_range(std::size_t begin, std::size_t end, bool value = true) {
    for (std::size_t i = begin; i < end; ++i) set(i, value);
  }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::size_t count_range(std::size_t begin, std::size_t end) const {
    std::size_t n = 0;
    for (std::size_t i = begin; i < end; ++i) n += test(i) ? 1 : 0;
    return n;
  }

  bool none() const noexcept {
    for (std::uint64_t w : words_) {
      if (w != 0) return false;
    }
    return true;
  }

  SlotSet slice(std::size_t begin, std::size_t end) const {
    SlotSet out(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
      if (test(i)) out.set(i - begin);
    }
    return out;
  }

  // Writes `part` into [offset, offset + part.size()).
  void assign_range(std::size_t offset, const SlotSet& part) {
    for (std::size_t i = 0; i < part.size(); ++i) set(offset + i, part.test(i));
  }

  SlotSet complement() const {
    SlotSet out(size_);
    for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] = ~words_[w];
    out.trim();
    return out;
  }

  SlotSet& operator|=(const SlotSet& o) {
    assert(o.size_ == size_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }
  SlotSet& operator&=(const SlotSet& o) {
    assert(o.size_ == size_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= o.words_[w];
    return *this;
  }
  // Set difference: clears every bit that is set in `o`.
  SlotSet& operator-=(const SlotSet& o) {
    assert(o.size_ == size_);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~o.words_[w];
    return *this;
  }

  friend SlotSet operator|(SlotSet a, const SlotSet& b) { return a |= b; }
  friend SlotSet operator&(SlotSet a, const SlotSet& b) { return a &= b; }
  friend SlotSet operator-(SlotSet a, const SlotSet& b) { return a -= b; }
  friend bool operator==(const SlotSet&, const SlotSet&) = default;

  // |a ∩ b| without materialising the intersection.
  static std::size_t count_and(const SlotSet& a, const SlotSet& b) {
    assert(a.size_ == b.size_);
    std::size_t n = 0;
    for (std::size_t w = 0; w < a.words_.size(); ++w) {
      n += static_cast<std::size_t>(std::popcount(a.words_[w] & b.words_[w]));
    }
    return n;
  }

  std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t i = 0; i < size_; ++i) {
      if (test(i)) s[i] = '1';
    }
    return s;
  }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty()) {
      words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
    }
  }

  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace supernova
