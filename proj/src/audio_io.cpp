#include "ksf/audio_io.hpp"

#include <bit>
#include <optional>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ksf/error.hpp"

namespace ksf {

static_assert(std::endian::native == std::endian::little,
              "file encoders assume a little-endian host");

namespace {

constexpr std::uint16_t kFormatIeeeFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

std::vector<float> floats_from(std::span<const std::uint8_t> bytes) {
  std::vector<float> out(bytes.size() / 4);
  std::memcpy(out.data(), bytes.data(), out.size() * 4);
  return out;
}

}  // namespace

WavData decode_wav_f32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw Error(ErrorCode::unsupported_format, "not a RIFF/WAVE file");
  }
  std::optional<WavData> result;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) {
      throw Error(ErrorCode::malformed_input, "truncated WAV chunk");
    }
    if (tag_is(bytes, pos, "fmt ")) {
      if (chunk_size < 16) throw Error(ErrorCode::malformed_input, "short fmt chunk");
      std::uint16_t format = read_u16(bytes, body);
      const std::uint16_t channels = read_u16(bytes, body + 2);
      const std::uint32_t rate = read_u32(bytes, body + 4);
      const std::uint16_t bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible && chunk_size >= 40) {
        format = read_u16(bytes, body + 24);  // first two bytes of the sub-format GUID
      }
      if (channels != 1) {
        throw Error(ErrorCode::unsupported_format,
                    "expected mono WAV, got " + std::to_string(channels) + " channels");
      }
      if (format != kFormatIeeeFloat || bits != 32) {
        throw Error(ErrorCode::unsupported_format, "expected 32-bit float WAV");
      }
      result = WavData{rate, {}};
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw Error(ErrorCode::malformed_input, "data chunk before fmt");
      if (chunk_size % 4 != 0) {
        throw Error(ErrorCode::malformed_input, "data size not a multiple of 4");
      }
      result->samples = floats_from(bytes.subspan(body, chunk_size));
      return *std::move(result);
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw Error(ErrorCode::malformed_input, "WAV has no data chunk");
}

std::vector<std::uint8_t> encode_wav_f32(std::span<const float> samples,
                                         std::uint32_t sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 4);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatIeeeFloat);
  put_u16(out, 1);
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * 4);
  put_u16(out, 4);
  put_u16(out, 32);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  const auto* raw = reinterpret_cast<const std::uint8_t*>(samples.data());
  out.insert(out.end(), raw, raw + data_bytes);
  return out;
}

std::vector<float> decode_raw_f32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorCode::malformed_input, "raw f32 size not a multiple of 4 bytes");
  }
  return floats_from(bytes);
}

std::vector<std::uint8_t> encode_raw_f32(std::span<const float> samples) {
  const auto* raw = reinterpret_cast<const std::uint8_t*>(samples.data());
  return {raw, raw + samples.size() * 4};
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::file_not_found, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

SignalBuffer decode_signal(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 4 && tag_is(bytes, 0, "RIFF")) {
    return SignalBuffer(decode_wav_f32(bytes).samples);
  }
  return SignalBuffer(decode_raw_f32(bytes));
}

SignalBuffer load_signal(const std::filesystem::path& path) {
  return decode_signal(read_file_bytes(path));
}

}  // namespace ksf
