#ifndef GFBEAM_WAV_HPP
#define GFBEAM_WAV_HPP

#include <string>

#include "gfbeam/csm.hpp"

namespace gfb {

// RIFF/WAVE reader: PCM 16/24/32-bit and IEEE float32, any channel count.
// Integer samples are scaled to [-1, 1) by 2^(bits-1); channel order is the
// microphone index order.
TimeRecord read_wav(const std::string& path);

// CSV fallback: one row per sample, one column per channel, optional header
// row. The file carries no rate, so it is supplied by the caller.
TimeRecord read_csv_record(const std::string& path, double sample_rate);

void write_wav_float32(const std::string& path, const TimeRecord& record);

}  // namespace gfb

#endif
