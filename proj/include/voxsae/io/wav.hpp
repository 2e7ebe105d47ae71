#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voxsae/core/error.hpp"
#include "voxsae/dsp/waveform.hpp"
#include "voxsae/io/binary.hpp"

namespace voxsae::io {

/// Mono RIFF/WAVE decoding: 16-bit PCM or 32-bit IEEE float (plain or
/// WAVE_FORMAT_EXTENSIBLE). Other layouts are rejected.
inline dsp::Waveform decode_wav(const std::vector<std::uint8_t>& bytes, const std::string& what = "wav") {
  ByteReader r(bytes, what);
  if (r.fixed(4) != "RIFF") throw InputError(what + ": not a RIFF file");
  r.u32();
  if (r.fixed(4) != "WAVE") throw InputError(what + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const std::string id = r.fixed(4);
    const std::uint32_t size = r.u32();
    r.need(size);
    if (id == "fmt ") {
      if (size < 16) throw InputError(what + ": fmt chunk too small");
      const auto chunk = r.fixed(size);
      auto u16 = [&](std::size_t off) {
        return static_cast<std::uint16_t>(static_cast<std::uint8_t>(chunk[off]) |
                                          (static_cast<std::uint8_t>(chunk[off + 1]) << 8));
      };
      format = u16(0);
      channels = u16(2);
      rate = static_cast<std::uint32_t>(u16(4)) | (static_cast<std::uint32_t>(u16(6)) << 16);
      bits = u16(14);
      if (format == 0xFFFE && size >= 26) format = u16(24);  // extensible: first two bytes of the subformat GUID
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw InputError(what + ": data chunk before fmt chunk");
      if (channels != 1) throw InputError(what + ": expected mono, got " + std::to_string(channels) + " channels");
      if (rate == 0) throw InputError(what + ": zero sample rate");
      dsp::Waveform w;
      w.sample_rate = rate;
      if (format == 1 && bits == 16) {
        w.samples.resize(size / 2);
        const std::size_t start = r.pos();
        r.fixed(w.samples.size() * 2);
        for (std::size_t i = 0; i < w.samples.size(); ++i) {
          const auto lo = bytes[start + 2 * i], hi = bytes[start + 2 * i + 1];
          const auto s = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8)));
          w.samples[i] = static_cast<double>(s) / 32768.0;
        }
      } else if (format == 3 && bits == 32) {
        w.samples.resize(size / 4);
        for (double& v : w.samples) {
          v = r.f32();
          if (!std::isfinite(v)) throw InputError(what + ": non-finite sample");
        }
      } else {
        throw InputError(what + ": unsupported encoding (format " + std::to_string(format) + ", " +
                         std::to_string(bits) + " bits)");
      }
      return w;
    } else {
      r.fixed(size);
    }
    if (size % 2 == 1 && r.remaining() > 0) r.fixed(1);
  }
  throw InputError(what + ": no data chunk");
}

inline dsp::Waveform read_wav(const std::filesystem::path& p) { return decode_wav(read_file_bytes(p), p.string()); }

/// Mono 32-bit float WAVE.
inline std::vector<std::uint8_t> encode_wav_f32(const dsp::Waveform& w) {
  const auto rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(w.size() * 4);
  ByteWriter b;
  b.bytes("RIFF", 4);
  b.u32(4 + 8 + 16 + 8 + data_bytes);
  b.bytes("WAVE", 4);
  b.bytes("fmt ", 4);
  b.u32(16);
  b.u32(3u | (1u << 16));  // format 3 (float), 1 channel
  b.u32(rate);
  b.u32(rate * 4);
  b.u32(4u | (32u << 16));  // block align 4, 32 bits
  b.bytes("data", 4);
  b.u32(data_bytes);
  for (double v : w.samples) b.f32(static_cast<float>(v));
  return b.data();
}

/// Mono 16-bit PCM WAVE (values clipped to [-1, 1]).
inline std::vector<std::uint8_t> encode_wav_pcm16(const dsp::Waveform& w) {
  const auto rate = static_cast<std::uint32_t>(std::lround(w.sample_rate));
  const auto data_bytes = static_cast<std::uint32_t>(w.size() * 2);
  ByteWriter b;
  b.bytes("RIFF", 4);
  b.u32(4 + 8 + 16 + 8 + data_bytes);
  b.bytes("WAVE", 4);
  b.bytes("fmt ", 4);
  b.u32(16);
  b.u32(1u | (1u << 16));
  b.u32(rate);
  b.u32(rate * 2);
  b.u32(2u | (16u << 16));
  b.bytes("data", 4);
  b.u32(data_bytes);
  for (double v : w.samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    const auto s = static_cast<std::int16_t>(std::lround(std::clamp(c * 32768.0, -32768.0, 32767.0)));
    const auto u = static_cast<std::uint16_t>(s);
    const std::uint8_t pair[2] = {static_cast<std::uint8_t>(u & 0xff), static_cast<std::uint8_t>(u >> 8)};
    b.bytes(pair, 2);
  }
  return b.data();
}

inline void write_wav(const std::filesystem::path& p, const dsp::Waveform& w) { write_file_bytes(p, encode_wav_f32(w)); }

}  // namespace voxsae::io
