#pragma once

#include "voxsae/dsp/spectral.hpp"
#include "voxsae/dsp/stft.hpp"
#include "voxsae/dsp/waveform.hpp"
#include "voxsae/tensor/matrix.hpp"

namespace voxsae::dsp {

/// Built-in shallow encoder: T x n log-mel energies on the STFT frame grid.
inline Matrix filterbank_encoder(const Waveform& w, std::size_t n = 80, const FrameConfig& cfg = {}) {
  const auto spectra = stft_magnitude(w, cfg);
  const Matrix fb = mel_filterbank(n, spectra.fft_size, spectra.sample_rate);
  return log_mel_energies(spectra.frames, fb);
}

}  // namespace voxsae::dsp
