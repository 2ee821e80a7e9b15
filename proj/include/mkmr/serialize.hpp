#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mkmr/prm.hpp"
#include "mkmr/scheme.hpp"

namespace mkmr {

/// Every rejection path reports one of these, so callers can distinguish a
/// wrong file type from a damaged file.
enum class SerializeError {
  BadMagic,
  BadVersion,
  BadHeader,
  Truncated,
  BadChecksum,
  NonCanonical,  // an entry >= q
};

const char* to_string(SerializeError kind);

class SerializeException : public std::runtime_error {
 public:
  SerializeException(SerializeError kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}
  SerializeError kind() const { return kind_; }

 private:
  SerializeError kind_;
};

// All formats are little-endian with a trailing CRC32 over every preceding
// byte. Entries are u32 when q < 2^32, else u64.
//
//   ciphertext  "MKMR" | version u16 = 1 | flags u16 | q u64 | m u32 | l u32
//               | (l+1)*m entries, column-major, v0 first | CRC32
//   key matrix  "MKSK" | version u16 = 1 | q u64 | m u32 | m*m entries,
//               row-major | CRC32
//   row key     "MKRK" | version u16 = 1 | q u64 | m u32 | j u32 | m entries
//               | CRC32

std::vector<std::uint8_t> serialize_ciphertext(const Ciphertext& C);
Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_key(const SecretKeyMatrix& S);
SecretKeyMatrix deserialize_secret_key(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_key(const RecipientKey& key);
RecipientKey deserialize_recipient_key(std::span<const std::uint8_t> bytes);

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace mkmr
