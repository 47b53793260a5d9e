#pragma once

#include <memory>
#include <span>
#include <string_view>

#include "utm/common.hpp"

namespace utm {

/// Incremental SHA-256 (backed by OpenSSL's EVP interface).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::uint8_t> data);
  Sha256& update(std::string_view data);
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

}  // namespace utm
