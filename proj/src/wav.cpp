#include "gfbeam/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gfbeam/errors.hpp"

namespace gfb {

namespace {

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

TimeRecord read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorCode::kFormatMismatch, "not a RIFF/WAVE file: " + path);
  }

  FmtChunk fmt;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes.data() + pos + 4);
    const unsigned char* chunk = bytes.data() + pos + 8;
    if (pos + 8 + chunk_size > bytes.size()) {
      throw Error(ErrorCode::kFormatMismatch, "truncated WAV chunk in " + path);
    }
    if (std::memcmp(bytes.data() + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw Error(ErrorCode::kFormatMismatch, "short fmt chunk");
      fmt.format = read_u16(chunk);
      fmt.channels = read_u16(chunk + 2);
      fmt.sample_rate = read_u32(chunk + 4);
      fmt.bits = read_u16(chunk + 14);
      if (fmt.format == 0xFFFE && chunk_size >= 40) {
        fmt.format = read_u16(chunk + 24);  // extensible subformat tag
      }
    } else if (std::memcmp(bytes.data() + pos, "data", 4) == 0) {
      data = chunk;
      data_size = chunk_size;
    }
    pos += 8 + chunk_size + (chunk_size & 1);
  }

  if (fmt.channels == 0 || data == nullptr) {
    throw Error(ErrorCode::kFormatMismatch, "WAV file lacks fmt/data chunks: " + path);
  }
  const std::size_t bytes_per_sample = fmt.bits / 8;
  if ((fmt.format == 1 && (fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32)) ||
      (fmt.format == 3 && fmt.bits == 32)) {
    // supported
  } else {
    std::ostringstream msg;
    msg << "unsupported WAV encoding (format " << fmt.format << ", " << fmt.bits << " bits)";
    throw Error(ErrorCode::kFormatMismatch, msg.str());
  }

  const std::size_t frame_size = bytes_per_sample * fmt.channels;
  const std::size_t n_frames = data_size / frame_size;

  TimeRecord record;
  record.sample_rate = static_cast<double>(fmt.sample_rate);
  record.n_channels = fmt.channels;
  record.n_samples = n_frames;
  record.data.resize(record.n_channels * record.n_samples);

  for (std::size_t frame = 0; frame < n_frames; ++frame) {
    for (std::size_t ch = 0; ch < fmt.channels; ++ch) {
      const unsigned char* p = data + frame * frame_size + ch * bytes_per_sample;
      double value = 0.0;
      if (fmt.format == 3) {
        float f;
        std::memcpy(&f, p, 4);
        value = f;
      } else if (fmt.bits == 16) {
        const auto v = static_cast<std::int16_t>(read_u16(p));
        value = static_cast<double>(v) / 32768.0;
      } else if (fmt.bits == 24) {
        std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
        if (v & 0x800000) v |= ~0xFFFFFF;  // sign extend
        value = static_cast<double>(v) / 8388608.0;
      } else {
        const auto v = static_cast<std::int32_t>(read_u32(p));
        value = static_cast<double>(v) / 2147483648.0;
      }
      record.data[ch * record.n_samples + frame] = value;
    }
  }
  return record;
}

TimeRecord read_csv_record(const std::string& path, double sample_rate) {
  if (sample_rate <= 0.0) {
    throw Error(ErrorCode::kConfig, "CSV records need an explicit sample rate");
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      try {
        row.push_back(std::stod(field));
      } catch (...) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw Error(ErrorCode::kFormatMismatch, "unparseable CSV record row: " + line);
    }
    first = false;
    if (!rows.empty() && row.size() != rows[0].size()) {
      throw Error(ErrorCode::kFormatMismatch, "CSV record rows differ in column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::kFormatMismatch, "CSV record has no samples");

  TimeRecord record;
  record.sample_rate = sample_rate;
  record.n_channels = rows[0].size();
  record.n_samples = rows.size();
  record.data.resize(record.n_channels * record.n_samples);
  for (std::size_t s = 0; s < record.n_samples; ++s) {
    for (std::size_t ch = 0; ch < record.n_channels; ++ch) {
      record.data[ch * record.n_samples + s] = rows[s][ch];
    }
  }
  return record;
}

void write_wav_float32(const std::string& path, const TimeRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);

  const std::uint32_t data_size =
      static_cast<std::uint32_t>(record.n_samples * record.n_channels * 4);
  auto put_u32 = [&out](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_u16 = [&out](std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 2);
  };

  out.write("RIFF", 4);
  put_u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(3);  // IEEE float
  put_u16(static_cast<std::uint16_t>(record.n_channels));
  put_u32(static_cast<std::uint32_t>(record.sample_rate));
  put_u32(static_cast<std::uint32_t>(record.sample_rate) * 4 *
          static_cast<std::uint32_t>(record.n_channels));
  put_u16(static_cast<std::uint16_t>(4 * record.n_channels));
  put_u16(32);
  out.write("data", 4);
  put_u32(data_size);
  for (std::size_t s = 0; s < record.n_samples; ++s) {
    for (std::size_t ch = 0; ch < record.n_channels; ++ch) {
      const float v = static_cast<float>(record.data[ch * record.n_samples + s]);
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
  }
}

}  // namespace gfb
