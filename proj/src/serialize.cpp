#include "mkmr/serialize.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>

namespace mkmr {

namespace {

constexpr std::uint16_t kVersion = 1;
constexpr std::array<char, 4> kMagicCiphertext = {'M', 'K', 'M', 'R'};
constexpr std::array<char, 4> kMagicSecretKey = {'M', 'K', 'S', 'K'};
constexpr std::array<char, 4> kMagicRecipientKey = {'M', 'K', 'R', 'K'};

bool wide_entries(std::uint64_t q) { return q >= (1ull << 32); }

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(crc32_z(crc32_z(0, nullptr, 0), bytes.data(), bytes.size()));
}

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t x) {
  out.push_back(static_cast<std::uint8_t>(x));
  out.push_back(static_cast<std::uint8_t>(x >> 8));
}

void append_u32(std::vector<std::uint8_t>& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void append_u64(std::vector<std::uint8_t>& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
}

void append_entries(std::vector<std::uint8_t>& out, std::span<const FieldElement> entries, bool wide) {
  for (const auto& e : entries) {
    if (wide) {
      append_u64(out, e.value);
    } else {
      append_u32(out, static_cast<std::uint32_t>(e.value));
    }
  }
}

void append_crc(std::vector<std::uint8_t>& out) {
  append_u32(out, crc_of(out));
}

// Cursor over the input; length is validated up front, so reads never run
// off the end.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16() {
    std::uint16_t x = static_cast<std::uint16_t>(bytes_[pos_]) |
                      static_cast<std::uint16_t>(bytes_[pos_ + 1]) << 8;
    pos_ += 2;
    return x;
  }
  std::uint32_t u32() {
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return x;
  }
  std::uint64_t u64() {
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return x;
  }
  std::array<char, 4> magic() {
    std::array<char, 4> m;
    std::memcpy(m.data(), bytes_.data() + pos_, 4);
    pos_ += 4;
    return m;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

// Shared prefix validation: magic, version, and that the buffer holds at
// least the fixed-size header.
Reader open_header(std::span<const std::uint8_t> bytes, const std::array<char, 4>& want_magic,
                   std::size_t header_size, const char* what) {
  if (bytes.size() < header_size + 4) {
    throw SerializeException(SerializeError::Truncated,
                             std::string(what) + " shorter than its header");
  }
  Reader r(bytes);
  if (r.magic() != want_magic) {
    throw SerializeException(SerializeError::BadMagic, std::string("not a ") + what + " file");
  }
  if (std::uint16_t v = r.u16(); v != kVersion) {
    throw SerializeException(SerializeError::BadVersion,
                             "unsupported version " + std::to_string(v));
  }
  return r;
}

// Total size check plus CRC over everything before the trailer.
void check_size_and_crc(std::span<const std::uint8_t> bytes, unsigned __int128 n_entries, bool wide,
                        std::size_t header_size) {
  const unsigned __int128 expected =
      static_cast<unsigned __int128>(header_size) + n_entries * (wide ? 8 : 4) + 4;
  if (static_cast<unsigned __int128>(bytes.size()) != expected) {
    throw SerializeException(SerializeError::Truncated,
                             "size " + std::to_string(bytes.size()) + " does not match header");
  }
  const auto body = bytes.first(bytes.size() - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
  }
  if (crc_of(body) != stored) {
    throw SerializeException(SerializeError::BadChecksum, "CRC32 mismatch");
  }
}

FieldParams field_from_header(std::uint64_t q) {
  try {
    return FieldParams::make(q);
  } catch (const std::invalid_argument& e) {
    throw SerializeException(SerializeError::BadHeader, e.what());
  }
}

void read_entries(Reader& r, std::span<FieldElement> out, std::uint64_t q, bool wide) {
  for (auto& e : out) {
    const std::uint64_t v = wide ? r.u64() : r.u32();
    if (v >= q) {
      throw SerializeException(SerializeError::NonCanonical,
                               "entry " + std::to_string(v) + " >= q");
    }
    e = FieldElement{v};
  }
}

}  // namespace

const char* to_string(SerializeError kind) {
  switch (kind) {
    case SerializeError::BadMagic: return "bad magic";
    case SerializeError::BadVersion: return "bad version";
    case SerializeError::BadHeader: return "bad header";
    case SerializeError::Truncated: return "truncated";
    case SerializeError::BadChecksum: return "bad checksum";
    case SerializeError::NonCanonical: return "non-canonical entry";
  }
  return "unknown";
}

std::vector<std::uint8_t> serialize_ciphertext(const Ciphertext& C) {
  const bool wide = wide_entries(C.field.q);
  std::vector<std::uint8_t> out;
  out.reserve(24 + C.entries.size() * (wide ? 8 : 4) + 4);
  out.insert(out.end(), kMagicCiphertext.begin(), kMagicCiphertext.end());
  append_u16(out, kVersion);
  append_u16(out, 0);  // flags, none defined yet
  append_u64(out, C.field.q);
  append_u32(out, static_cast<std::uint32_t>(C.m));
  append_u32(out, static_cast<std::uint32_t>(C.l));
  append_entries(out, C.entries, wide);
  append_crc(out);
  return out;
}

Ciphertext deserialize_ciphertext(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 4 + 2 + 2 + 8 + 4 + 4;
  Reader r = open_header(bytes, kMagicCiphertext, kHeader, "ciphertext");
  if (r.u16() != 0) {
    throw SerializeException(SerializeError::BadHeader, "unknown flags set");
  }
  const std::uint64_t q = r.u64();
  const std::uint32_t m = r.u32();
  const std::uint32_t l = r.u32();
  const FieldParams field = field_from_header(q);
  if (m == 0 || l == 0) {
    throw SerializeException(SerializeError::BadHeader, "m and l must be positive");
  }
  const bool wide = wide_entries(q);
  const unsigned __int128 n =
      (static_cast<unsigned __int128>(l) + 1) * static_cast<unsigned __int128>(m);
  check_size_and_crc(bytes, n, wide, kHeader);

  Ciphertext C(field, m, l);
  read_entries(r, C.entries, q, wide);
  return C;
}

std::vector<std::uint8_t> serialize_key(const SecretKeyMatrix& S) {
  const bool wide = wide_entries(S.field.q);
  std::vector<std::uint8_t> out;
  out.reserve(18 + S.entries.size() * (wide ? 8 : 4) + 4);
  out.insert(out.end(), kMagicSecretKey.begin(), kMagicSecretKey.end());
  append_u16(out, kVersion);
  append_u64(out, S.field.q);
  append_u32(out, static_cast<std::uint32_t>(S.m));
  append_entries(out, S.entries, wide);
  append_crc(out);
  return out;
}

SecretKeyMatrix deserialize_secret_key(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 4 + 2 + 8 + 4;
  Reader r = open_header(bytes, kMagicSecretKey, kHeader, "secret key");
  const std::uint64_t q = r.u64();
  const std::uint32_t m = r.u32();
  const FieldParams field = field_from_header(q);
  if (m == 0) {
    throw SerializeException(SerializeError::BadHeader, "m must be positive");
  }
  const bool wide = wide_entries(q);
  const unsigned __int128 n =
      static_cast<unsigned __int128>(m) * static_cast<unsigned __int128>(m);
  check_size_and_crc(bytes, n, wide, kHeader);

  SecretKeyMatrix S;
  S.field = field;
  S.m = m;
  S.entries.resize(static_cast<std::size_t>(m) * m);
  read_entries(r, S.entries, q, wide);
  return S;
}

std::vector<std::uint8_t> serialize_key(const RecipientKey& key) {
  const bool wide = wide_entries(key.field.q);
  std::vector<std::uint8_t> out;
  out.reserve(22 + key.s.size() * (wide ? 8 : 4) + 4);
  out.insert(out.end(), kMagicRecipientKey.begin(), kMagicRecipientKey.end());
  append_u16(out, kVersion);
  append_u64(out, key.field.q);
  append_u32(out, static_cast<std::uint32_t>(key.s.size()));
  append_u32(out, key.index);
  append_entries(out, key.s, wide);
  append_crc(out);
  return out;
}

RecipientKey deserialize_recipient_key(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 4 + 2 + 8 + 4 + 4;
  Reader r = open_header(bytes, kMagicRecipientKey, kHeader, "recipient key");
  const std::uint64_t q = r.u64();
  const std::uint32_t m = r.u32();
  const std::uint32_t j = r.u32();
  const FieldParams field = field_from_header(q);
  if (m == 0) {
    throw SerializeException(SerializeError::BadHeader, "m must be positive");
  }
  if (j < 1 || j > m) {
    throw SerializeException(SerializeError::BadHeader,
                             "recipient index " + std::to_string(j) + " outside [1, m]");
  }
  const bool wide = wide_entries(q);
  check_size_and_crc(bytes, m, wide, kHeader);

  RecipientKey key;
  key.field = field;
  key.index = j;
  key.s.resize(m);
  read_entries(r, key.s, q, wide);
  return key;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  const std::streamsize size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()), size);
  if (!in) throw std::runtime_error("read failed: " + path.string());
  return bytes;
}

}  // namespace mkmr
