#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ksf/signal.hpp"

namespace ksf {

struct WavData {
  std::uint32_t sample_rate = 0;
  std::vector<float> samples;
};

/// Decodes a mono IEEE-float32 WAV (format tag 3, or WAVE_FORMAT_EXTENSIBLE
/// with the float sub-format). Multichannel and integer PCM are rejected.
WavData decode_wav_f32(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_wav_f32(std::span<const float> samples,
                                         std::uint32_t sample_rate);

std::vector<float> decode_raw_f32(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_raw_f32(std::span<const float> samples);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

/// Sniffs the RIFF magic: WAV if present, raw little-endian float32 otherwise.
SignalBuffer decode_signal(std::span<const std::uint8_t> bytes);
SignalBuffer load_signal(const std::filesystem::path& path);

}  // namespace ksf
