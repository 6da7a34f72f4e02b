#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "l2i/core/error.hpp"

namespace l2i {

struct Waveform {
  std::vector<float> samples;
  int sample_rate = 44100;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

namespace detail {

inline std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 24) & 0xff);
}

inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(v & 0xff);
  out.push_back((v >> 8) & 0xff);
}

}  // namespace detail

// Reads a RIFF/WAVE file. PCM16 and IEEE float32 are accepted, mono or
// stereo; stereo is averaged to mono and PCM16 is scaled by 1/32768.
inline Waveform load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open wav file: " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "not a RIFF/WAVE file: " + path);

  int format = 0, channels = 0, bits = 0, rate = 0;
  std::size_t data_off = 0, data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_len = detail::read_u32(&bytes[pos + 4]);
    if (std::memcmp(&bytes[pos], "fmt ", 4) == 0 && chunk_len >= 16) {
      format = detail::read_u16(&bytes[pos + 8]);
      channels = detail::read_u16(&bytes[pos + 10]);
      rate = static_cast<int>(detail::read_u32(&bytes[pos + 12]));
      bits = detail::read_u16(&bytes[pos + 22]);
    } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
      data_off = pos + 8;
      data_len = std::min<std::size_t>(chunk_len, bytes.size() - data_off);
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }
  require(format != 0 && data_off != 0, "wav file missing fmt/data chunk: " + path);
  require(channels == 1 || channels == 2, "unsupported channel count in " + path);

  const bool pcm16 = (format == 1 && bits == 16);
  const bool f32 = (format == 3 && bits == 32);
  require(pcm16 || f32, "unsupported wav encoding (want PCM16 or float32): " + path);

  const std::size_t bytes_per = (pcm16 ? 2u : 4u) * channels;
  const std::size_t frames = data_len / bytes_per;
  Waveform w;
  w.sample_rate = rate;
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const unsigned char* p = &bytes[data_off + i * bytes_per + c * (pcm16 ? 2 : 4)];
      if (pcm16) {
        const std::int16_t v = static_cast<std::int16_t>(detail::read_u16(p));
        acc += v / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += v;
      }
    }
    w.samples[i] = static_cast<float>(acc / channels);
    require(std::isfinite(w.samples[i]), "non-finite sample in " + path);
  }
  return w;
}

// Writes mono IEEE float32. Fails before touching the file if any sample is
// non-finite.
inline void save_wav(const Waveform& w, const std::string& path) {
  for (float s : w.samples) require(std::isfinite(s), "non-finite sample, refusing to write " + path);
  require(w.sample_rate > 0, "invalid sample rate");

  std::vector<unsigned char> out;
  const std::uint32_t data_len = static_cast<std::uint32_t>(w.samples.size() * 4);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(out, 4 + 8 + 16 + 8 + data_len);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  detail::put_u32(out, 16);
  detail::put_u16(out, 3);  // IEEE float
  detail::put_u16(out, 1);  // mono
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  detail::put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 4);
  detail::put_u16(out, 4);
  detail::put_u16(out, 32);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(out, data_len);
  for (float s : w.samples) {
    unsigned char b[4];
    std::memcpy(b, &s, 4);
    out.insert(out.end(), b, b + 4);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  require(f.good(), "cannot write wav file: " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  require(f.good(), "short write to " + path);
}

}  // namespace l2i
