#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "pmfgn/corpus/types.hpp"

namespace pmfgn::signal {

struct MfccParams {
  int sample_rate = corpus::kSampleRate;
  double window_ms = 50.0;
  double shift_ms = 50.0;
  int n_mels = 26;
  int n_coeffs = 13;
  double preemphasis = 0.97;
  double log_floor = 1e-10;

  int window_samples() const;
  int shift_samples() const;
  // Next power of two >= window_samples().
  int fft_size() const;
  void validate() const;
};

// n_frames x n_coeffs.
using FrameMatrix = Eigen::MatrixXd;

// Hz <-> mel with mel(f) = 2595 log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_mels x (fft_size/2 + 1) triangular filters with centers equally spaced
// on the mel scale between 0 Hz and Nyquist.
Eigen::MatrixXd mel_filterbank(const MfccParams& p);

// Reusable extractor; holds the filterbank and FFT plan. Each frame is
// pre-emphasized on its own, Hamming-windowed, zero-padded to fft_size, and
// reduced to its power spectrum |X_k|^2 before the filterbank, the
// floored natural log, and an orthonormal DCT-II.
class MfccExtractor {
 public:
  explicit MfccExtractor(MfccParams params = {});
  ~MfccExtractor();
  MfccExtractor(const MfccExtractor&) = delete;
  MfccExtractor& operator=(const MfccExtractor&) = delete;

  const MfccParams& params() const { return params_; }
  int frame_count(std::size_t n_samples) const;

  // Samples are scaled to [-1, 1) by 1/32768.
  FrameMatrix compute(const corpus::Waveform& wave) const;
  // n_frames x n_mels filterbank energies (before the log).
  Eigen::MatrixXd filterbank_energies(const corpus::Waveform& wave) const;

 private:
  Eigen::VectorXd power_spectrum(const std::vector<double>& frame) const;
  std::vector<double> frame_samples(const corpus::Waveform& wave, int frame) const;

  MfccParams params_;
  Eigen::MatrixXd filterbank_;
  Eigen::MatrixXd dct_;
  Eigen::VectorXd window_;
  struct Fft;
  std::unique_ptr<Fft> fft_;
};

FrameMatrix compute_mfcc(const corpus::Waveform& wave, const MfccParams& params = {});

}  // namespace pmfgn::signal
