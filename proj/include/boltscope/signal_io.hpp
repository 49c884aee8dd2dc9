#pragma once

// WAV (PCM16, PCM24, float32) and CSV (time_s, value...) signal files.

#include "boltscope/errors.hpp"
#include "boltscope/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace boltscope::io {

enum class FileFormat { Wav, Csv };

enum class WavEncoding { Pcm16, Pcm24, Float32 };

/// Format from the file extension (.wav / .csv, case-insensitive).
inline FileFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".wav") return FileFormat::Wav;
  if (ext == ".csv") return FileFormat::Csv;
  throw FormatError("cannot infer file format from extension '" + ext + "' of " + path.string());
}

/// Writes `content` to a sibling temp file and renames it over `path`, so
/// readers never observe a partially written file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}
inline void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32(const std::string& b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[at + i]);
  return v;
}
inline std::uint16_t get_u16(const std::string& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}

}  // namespace detail

/// Serializes channels (equal length, equal rate) as an interleaved WAV.
inline std::string encode_wav(const std::vector<TimeSeries>& channels,
                              WavEncoding enc = WavEncoding::Float32) {
  if (channels.empty()) throw ParameterError("encode_wav: no channels");
  const std::size_t frames = channels.front().size();
  const double fs = channels.front().sample_rate;
  for (const auto& c : channels) {
    if (c.size() != frames || c.sample_rate != fs) {
      throw ParameterError("encode_wav: channels differ in length or sample rate");
    }
  }
  if (fs != std::round(fs) || fs > 4294967295.0) {
    throw ParameterError("encode_wav: WAV needs an integer sample rate, got " + std::to_string(fs));
  }
  const std::uint16_t bytes = enc == WavEncoding::Pcm16 ? 2 : enc == WavEncoding::Pcm24 ? 3 : 4;
  const auto nch = static_cast<std::uint16_t>(channels.size());
  const std::uint64_t data_bytes = static_cast<std::uint64_t>(frames) * nch * bytes;
  if (data_bytes > 0xFFFFFFFFull - 64) throw ParameterError("encode_wav: data too large for WAV");

  std::string b;
  b.reserve(static_cast<std::size_t>(data_bytes) + 44);
  b += "RIFF";
  detail::put_u32(b, static_cast<std::uint32_t>(36 + data_bytes));
  b += "WAVEfmt ";
  detail::put_u32(b, 16);
  detail::put_u16(b, enc == WavEncoding::Float32 ? 3 : 1);
  detail::put_u16(b, nch);
  detail::put_u32(b, static_cast<std::uint32_t>(fs));
  detail::put_u32(b, static_cast<std::uint32_t>(fs) * nch * bytes);
  detail::put_u16(b, static_cast<std::uint16_t>(nch * bytes));
  detail::put_u16(b, static_cast<std::uint16_t>(8 * bytes));
  b += "data";
  detail::put_u32(b, static_cast<std::uint32_t>(data_bytes));
  for (std::size_t i = 0; i < frames; ++i) {
    for (const auto& c : channels) {
      const double v = c.samples[i];
      if (enc == WavEncoding::Float32) {
        const float f = static_cast<float>(v);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        detail::put_u32(b, bits);
      } else {
        const double full = enc == WavEncoding::Pcm16 ? 32767.0 : 8388607.0;
        const auto q = static_cast<std::int32_t>(std::lround(std::clamp(v, -1.0, 1.0) * full));
        const auto u = static_cast<std::uint32_t>(q);
        for (int k = 0; k < bytes; ++k) b.push_back(static_cast<char>((u >> (8 * k)) & 0xff));
      }
    }
  }
  return b;
}

/// Parses a WAV image; channel i is labelled "ch<i>".
inline std::vector<TimeSeries> decode_wav(const std::string& b, const std::string& origin = "WAV") {
  if (b.empty()) throw FormatError(origin + ": empty file");
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw FormatError(origin + ": not a RIFF/WAVE file");
  }
  std::uint16_t tag = 0, nch = 0, bits = 0;
  std::uint32_t fs = 0;
  bool have_fmt = false;
  std::size_t data_at = 0, data_len = 0;
  bool have_data = false;
  for (std::size_t at = 12; at + 8 <= b.size();) {
    const std::string id = b.substr(at, 4);
    const std::size_t len = detail::get_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (id == "fmt ") {
      if (len < 16 || body + 16 > b.size()) throw FormatError(origin + ": truncated fmt chunk");
      tag = detail::get_u16(b, body);
      nch = detail::get_u16(b, body + 2);
      fs = detail::get_u32(b, body + 4);
      bits = detail::get_u16(b, body + 14);
      if (tag == 0xFFFE && len >= 40 && body + 26 <= b.size()) tag = detail::get_u16(b, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      data_at = body;
      data_len = std::min(len, b.size() - body);
      have_data = true;
      break;
    }
    at = body + len + (len & 1);
  }
  if (!have_fmt || !have_data) throw FormatError(origin + ": missing fmt or data chunk");
  const bool pcm16 = tag == 1 && bits == 16;
  const bool pcm24 = tag == 1 && bits == 24;
  const bool f32 = tag == 3 && bits == 32;
  if (!(pcm16 || pcm24 || f32)) {
    throw FormatError(origin + ": unsupported WAV encoding (format tag " + std::to_string(tag) +
                      ", " + std::to_string(bits) + " bits); expected PCM16, PCM24 or float32");
  }
  if (nch == 0 || fs == 0) throw FormatError(origin + ": zero channels or sample rate");
  const std::size_t width = bits / 8;
  const std::size_t frames = data_len / (width * nch);
  if (frames == 0) throw FormatError(origin + ": no audio frames");

  std::vector<std::vector<double>> cols(nch, std::vector<double>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    for (std::size_t c = 0; c < nch; ++c) {
      const std::size_t at = data_at + (i * nch + c) * width;
      double v;
      if (f32) {
        const std::uint32_t u = detail::get_u32(b, at);
        float f;
        std::memcpy(&f, &u, 4);
        v = f;
      } else if (pcm16) {
        v = static_cast<std::int16_t>(detail::get_u16(b, at)) / 32767.0;
      } else {
        std::uint32_t u = static_cast<unsigned char>(b[at]) |
                          (static_cast<unsigned char>(b[at + 1]) << 8) |
                          (static_cast<unsigned char>(b[at + 2]) << 16);
        if (u & 0x800000u) u |= 0xFF000000u;
        v = static_cast<std::int32_t>(u) / 8388607.0;
      }
      cols[c][i] = v;
    }
  }
  std::vector<TimeSeries> out;
  for (std::size_t c = 0; c < nch; ++c) {
    out.emplace_back(std::move(cols[c]), static_cast<double>(fs), "ch" + std::to_string(c));
  }
  return out;
}

inline std::string format_double(double v, int digits = 17) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// CSV with header "time_s,<label>..." and full-precision values.
inline std::string encode_csv(const std::vector<TimeSeries>& channels) {
  if (channels.empty()) throw ParameterError("encode_csv: no channels");
  const std::size_t n = channels.front().size();
  const double fs = channels.front().sample_rate;
  for (const auto& c : channels) {
    if (c.size() != n || c.sample_rate != fs) {
      throw ParameterError("encode_csv: channels differ in length or sample rate");
    }
  }
  std::string out = "time_s";
  for (std::size_t c = 0; c < channels.size(); ++c) {
    out += ',';
    out += channels[c].channel.empty() ? "value" + std::to_string(c) : channels[c].channel;
  }
  out += '\n';
  const double t0 = channels.front().start_time;
  for (std::size_t i = 0; i < n; ++i) {
    out += format_double(t0 + static_cast<double>(i) / fs);
    for (const auto& c : channels) {
      out += ',';
      out += format_double(c.samples[i]);
    }
    out += '\n';
  }
  return out;
}

/// Relative tolerance on each timestamp interval against the nominal one.
inline constexpr double kTimestampJitter = 1e-6;

inline std::vector<TimeSeries> decode_csv(const std::string& text, const std::string& origin = "CSV") {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::string cur;
    std::istringstream ls(s);
    while (std::getline(ls, cur, ',')) {
      const auto a = cur.find_first_not_of(" \t");
      const auto z = cur.find_last_not_of(" \t");
      f.push_back(a == std::string::npos ? std::string{} : cur.substr(a, z - a + 1));
    }
    return f;
  };
  std::size_t header_line = 0;
  for (;;) {
    if (!std::getline(in, line)) throw FormatError(origin + ": empty file");
    ++header_line;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') break;
  }
  const auto header = split(line);
  if (header.size() < 2) throw FormatError(origin + ": header needs time_s plus at least one column");

  std::vector<double> t;
  std::vector<std::vector<double>> cols(header.size() - 1);
  std::vector<std::size_t> line_of;
  std::size_t row = 0;
  auto next_counted = [&]() -> bool {
    while (std::getline(in, line)) {
      ++row;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] != '#') return true;
    }
    return false;
  };
  row = header_line;
  while (next_counted()) {
    line_of.push_back(row);
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw FormatError(origin + ": row " + std::to_string(row) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      char* end = nullptr;
      const double v = std::strtod(fields[c].c_str(), &end);
      if (fields[c].empty() || end != fields[c].c_str() + fields[c].size()) {
        throw FormatError(origin + ": row " + std::to_string(row) + " column '" + header[c] +
                          "' is not a number");
      }
      if (c == 0) t.push_back(v);
      else cols[c - 1].push_back(v);
    }
  }
  if (t.empty()) throw FormatError(origin + ": no data rows");
  if (t.size() < 2) throw FormatError(origin + ": need at least two rows to infer the sample rate");

  std::vector<double> dts;
  for (std::size_t i = 1; i < t.size(); ++i) dts.push_back(t[i] - t[i - 1]);
  std::vector<double> sorted = dts;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double dt = sorted[sorted.size() / 2];
  if (!(dt > 0.0)) throw FormatError(origin + ": timestamps are not increasing");
  for (std::size_t i = 0; i < dts.size(); ++i) {
    if (std::abs(dts[i] - dt) > kTimestampJitter * dt) {
      throw FormatError(origin + ": non-uniform timestamps at row " + std::to_string(line_of[i + 1]) +
                        " (interval " + format_double(dts[i], 9) + " s vs nominal " +
                        format_double(dt, 9) + " s)");
    }
  }
  double fs = 1.0 / dt;
  if (std::abs(fs - std::round(fs)) <= kTimestampJitter * fs) fs = std::round(fs);

  std::vector<TimeSeries> out;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.emplace_back(std::move(cols[c]), fs, header[c + 1], t.front());
  }
  return out;
}

/// Maps source channel names (WAV "ch<i>", CSV column headers) to labels.
/// An empty map keeps every channel under its source name.
using ChannelMap = std::map<std::string, std::string>;

inline std::vector<TimeSeries> ingest(const std::filesystem::path& path, FileFormat format,
                                      const ChannelMap& channel_map = {}) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) throw IoError("no such file: " + path.string());
  const std::string bytes = read_file(path);
  std::vector<TimeSeries> all = format == FileFormat::Wav ? decode_wav(bytes, path.string())
                                                          : decode_csv(bytes, path.string());
  if (channel_map.empty()) return all;
  std::vector<TimeSeries> out;
  for (const auto& [source, label] : channel_map) {
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& ts) { return ts.channel == source; });
    if (it == all.end()) {
      std::string names;
      for (const auto& ts : all) names += (names.empty() ? "" : ", ") + ts.channel;
      throw FormatError(path.string() + ": no channel '" + source + "' (available: " + names + ")");
    }
    TimeSeries ts = *it;
    ts.channel = label;
    out.push_back(std::move(ts));
  }
  return out;
}

inline std::vector<TimeSeries> ingest(const std::filesystem::path& path,
                                      const ChannelMap& channel_map = {}) {
  return ingest(path, format_from_path(path), channel_map);
}

inline void write_signal(const std::filesystem::path& path, const std::vector<TimeSeries>& channels,
                         WavEncoding enc = WavEncoding::Float32) {
  const auto fmt = format_from_path(path);
  write_atomic(path, fmt == FileFormat::Wav ? encode_wav(channels, enc) : encode_csv(channels));
}

}  // namespace boltscope::io
