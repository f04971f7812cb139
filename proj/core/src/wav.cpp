// Copyright 2026 The sdxkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sdx/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sdx/error.hpp"

namespace sdx {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24);
}

std::uint16_t read_u16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
  std::uint16_t block_align = 0;
};

double decode_sample(std::string_view b, std::size_t at, const FmtChunk& fmt) {
  if (fmt.format == kFormatFloat) {
    const std::uint32_t bits = read_u32(b, at);
    return static_cast<double>(std::bit_cast<float>(bits));
  }
  if (fmt.bits == 16) {
    return static_cast<double>(static_cast<std::int16_t>(read_u16(b, at))) / 32768.0;
  }
  // 24-bit: assemble into the top of an int32 so the shift sign-extends.
  const std::uint32_t raw = (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) << 8) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 16) |
                            (static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 24);
  return static_cast<double>(static_cast<std::int32_t>(raw) >> 8) / 8388608.0;
}

}  // namespace

AudioBuffer decode_wav(std::string_view bytes, const WavReadOptions& options) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE") {
    fail(Errc::kMalformedFile, "not a RIFF/WAVE stream");
  }
  FmtChunk fmt;
  bool have_fmt = false;
  std::string_view data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string_view id = bytes.substr(pos, 4);
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      if (id != "data") fail(Errc::kMalformedFile, "chunk overruns end of file");
    }
    if (id == "fmt ") {
      if (size < 16) fail(Errc::kMalformedFile, "fmt chunk too short");
      fmt.format = read_u16(bytes, body);
      fmt.channels = read_u16(bytes, body + 2);
      fmt.sample_rate = read_u32(bytes, body + 4);
      fmt.block_align = read_u16(bytes, body + 12);
      fmt.bits = read_u16(bytes, body + 14);
      if (fmt.format == kFormatExtensible) {
        if (size < 40) fail(Errc::kMalformedFile, "extensible fmt chunk too short");
        // First two bytes of the subformat GUID carry the actual format tag.
        fmt.format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      const std::size_t avail = std::min<std::size_t>(size, bytes.size() - body);
      if (avail != size) fail(Errc::kMalformedFile, "data chunk truncated");
      data = bytes.substr(body, avail);
      have_data = true;
    }
    pos = body + size + (size & 1U);
  }
  if (!have_fmt) fail(Errc::kMalformedFile, "missing fmt chunk");
  if (!have_data) fail(Errc::kMalformedFile, "missing data chunk");

  const bool pcm_ok = fmt.format == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24);
  const bool float_ok = fmt.format == kFormatFloat && fmt.bits == 32;
  if (!pcm_ok && !float_ok) {
    fail(Errc::kUnsupportedFormat, "unsupported sample encoding (format tag " +
                                       std::to_string(fmt.format) + ", " +
                                       std::to_string(fmt.bits) + " bits)");
  }
  if (fmt.sample_rate != static_cast<std::uint32_t>(kSampleRate)) {
    fail(Errc::kUnsupportedSampleRate,
         "sample rate " + std::to_string(fmt.sample_rate) + " Hz, expected 44100");
  }
  if (fmt.channels != 1 && fmt.channels != 2) {
    fail(Errc::kUnsupportedFormat, std::to_string(fmt.channels) + " channels not supported");
  }
  if (fmt.channels == 1 && !options.allow_mono) {
    fail(Errc::kUnsupportedFormat, "mono input rejected (allow_mono not set)");
  }
  const std::size_t bytes_per_sample = fmt.bits / 8U;
  const std::size_t frame_bytes = bytes_per_sample * fmt.channels;
  if (fmt.block_align != frame_bytes) fail(Errc::kMalformedFile, "inconsistent block alignment");
  if (data.size() % frame_bytes != 0) fail(Errc::kMalformedFile, "partial sample frame in data chunk");

  const std::size_t frames = data.size() / frame_bytes;
  std::vector<double> left(frames), right(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::size_t at = i * frame_bytes;
    left[i] = decode_sample(data, at, fmt);
    right[i] = fmt.channels == 2 ? decode_sample(data, at + bytes_per_sample, fmt) : left[i];
  }
  AudioBuffer out(std::move(left), std::move(right));
  require_finite(out, "decode_wav");
  return out;
}

std::string encode_wav(const AudioBuffer& buffer, WavFormat format) {
  require_finite(buffer, "encode_wav");
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t tag = format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat;
  const std::uint16_t block_align = static_cast<std::uint16_t>(kChannels * bits / 8);
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(buffer.frames()) * block_align;
  if (data_bytes > 0xFFFFFFFFULL - 44) fail(Errc::kIoError, "buffer too large for RIFF");

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, kChannels);
  put_u32(out, kSampleRate);
  put_u32(out, static_cast<std::uint32_t>(kSampleRate) * block_align);
  put_u16(out, block_align);
  put_u16(out, bits);
  out += "data";
  put_u32(out, static_cast<std::uint32_t>(data_bytes));

  const auto left = buffer.channel(0);
  const auto right = buffer.channel(1);
  for (std::size_t i = 0; i < buffer.frames(); ++i) {
    for (double v : {left[i], right[i]}) {
      if (format == WavFormat::kPcm16) {
        const double q = std::clamp(std::nearbyint(v * 32768.0), -32768.0, 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
      } else {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      }
    }
  }
  return out;
}

AudioBuffer load_wav(const std::filesystem::path& path, const WavReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kMissingFile, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes, options);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_wav(const AudioBuffer& buffer, const std::filesystem::path& path, WavFormat format) {
  const std::string bytes = encode_wav(buffer, format);
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(Errc::kIoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(Errc::kIoError, "short write to " + path.string());
}

WavFormat parse_wav_format(std::string_view name) {
  if (name == "pcm16") return WavFormat::kPcm16;
  if (name == "float32") return WavFormat::kFloat32;
  fail(Errc::kInvalidArgument, "unknown WAV format '" + std::string(name) + "'");
}

}  // namespace sdx
