#pragma once

#include <string>

#include "objf/audio/synth.hpp"

namespace objf {

// Mono 16-bit PCM. Writing peak-normalizes to 0.9 full scale (in-memory
// samples are never modified); a waveform whose peak is below 1e-12 is
// written as silence.
void write_wav(const std::string& path, const Waveform& w);
Waveform read_wav(const std::string& path);

}  // namespace objf
