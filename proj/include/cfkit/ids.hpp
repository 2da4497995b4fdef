#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cfkit {

/// Bijection between external string tokens and dense indices.
/// Indices are handed out in first-insertion order, so the mapping is a
/// deterministic function of the token sequence.
class IdMap {
 public:
  /// Returns the index of `token`, interning it if unseen.
  std::uint32_t intern(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    if (tokens_.size() >= std::numeric_limits<std::int32_t>::max())
      throw std::length_error("IdMap: too many tokens");
    auto idx = static_cast<std::uint32_t>(tokens_.size());
    tokens_.push_back(token);
    index_.emplace(token, idx);
    return idx;
  }

  std::optional<std::uint32_t> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(std::uint32_t index) const { return tokens_.at(index); }

  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const IdMap& a, const IdMap& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

}  // namespace cfkit
