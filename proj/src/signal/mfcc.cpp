#include "pmfgn/signal/mfcc.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "pmfgn/error.hpp"

namespace pmfgn::signal {

int MfccParams::window_samples() const { return static_cast<int>(std::lround(sample_rate * window_ms / 1000.0)); }
int MfccParams::shift_samples() const { return static_cast<int>(std::lround(sample_rate * shift_ms / 1000.0)); }

int MfccParams::fft_size() const {
  int n = 1;
  while (n < window_samples()) n <<= 1;
  return n;
}

void MfccParams::validate() const {
  if (sample_rate <= 0) throw ValidationError("MfccParams.sample_rate must be positive");
  if (window_samples() < 1 || shift_samples() < 1) throw ValidationError("MfccParams window/shift must be positive");
  if (shift_ms > window_ms) throw ValidationError("MfccParams.shift_ms must not exceed window_ms");
  if (n_mels < 1 || n_coeffs < 1 || n_coeffs > n_mels) {
    throw ValidationError("MfccParams requires 1 <= n_coeffs <= n_mels");
  }
  if (!(log_floor > 0)) throw ValidationError("MfccParams.log_floor must be positive");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Eigen::MatrixXd mel_filterbank(const MfccParams& p) {
  const int n_fft = p.fft_size();
  const int n_bins = n_fft / 2 + 1;
  const double top = hz_to_mel(p.sample_rate / 2.0);
  std::vector<double> edges(p.n_mels + 2);
  for (int i = 0; i < p.n_mels + 2; ++i) edges[i] = mel_to_hz(top * i / (p.n_mels + 1));
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(p.n_mels, n_bins);
  for (int m = 0; m < p.n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * p.sample_rate / n_fft;
      if (f > lo && f < mid) fb(m, k) = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi) fb(m, k) = (hi - f) / (hi - mid);
    }
  }
  return fb;
}

// FFTW planning is not thread-safe; execution with new-array functions is.
struct MfccExtractor::Fft {
  int n = 0;
  fftw_plan plan = nullptr;
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  explicit Fft(int size) : n(size) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
  }
  ~Fft() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
};

MfccExtractor::MfccExtractor(MfccParams params) : params_(params) {
  params_.validate();
  filterbank_ = mel_filterbank(params_);
  const int n = params_.n_mels;
  dct_.resize(params_.n_coeffs, n);
  for (int k = 0; k < params_.n_coeffs; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) dct_(k, i) = s * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n));
  }
  const int w = params_.window_samples();
  window_.resize(w);
  for (int i = 0; i < w; ++i) {
    window_(i) = w == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (w - 1));
  }
  fft_ = std::make_unique<Fft>(params_.fft_size());
}

MfccExtractor::~MfccExtractor() = default;

int MfccExtractor::frame_count(std::size_t n_samples) const {
  const auto w = static_cast<std::size_t>(params_.window_samples());
  if (n_samples < w) return 0;
  return static_cast<int>((n_samples - w) / static_cast<std::size_t>(params_.shift_samples()) + 1);
}

std::vector<double> MfccExtractor::frame_samples(const corpus::Waveform& wave, int frame) const {
  const int w = params_.window_samples();
  const std::size_t start = static_cast<std::size_t>(frame) * params_.shift_samples();
  std::vector<double> x(w);
  for (int i = 0; i < w; ++i) x[i] = wave.samples[start + i] / 32768.0;
  std::vector<double> y(w);
  y[0] = x[0];
  for (int i = 1; i < w; ++i) y[i] = x[i] - params_.preemphasis * x[i - 1];
  for (int i = 0; i < w; ++i) y[i] *= window_(i);
  return y;
}

Eigen::VectorXd MfccExtractor::power_spectrum(const std::vector<double>& frame) const {
  const int n = fft_->n;
  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
  for (int i = 0; i < n; ++i) in[i] = i < static_cast<int>(frame.size()) ? frame[i] : 0.0;
  fftw_execute_dft_r2c(fft_->plan, in, out);
  Eigen::VectorXd power(n / 2 + 1);
  for (int k = 0; k <= n / 2; ++k) power(k) = out[k][0] * out[k][0] + out[k][1] * out[k][1];
  fftw_free(in);
  fftw_free(out);
  return power;
}

Eigen::MatrixXd MfccExtractor::filterbank_energies(const corpus::Waveform& wave) const {
  if (wave.sample_rate != params_.sample_rate) {
    throw ValidationError("waveform sample rate " + std::to_string(wave.sample_rate) + " does not match " +
                          std::to_string(params_.sample_rate));
  }
  const int frames = frame_count(wave.samples.size());
  if (frames == 0) {
    throw ValidationError("waveform too short for MFCC: need at least " +
                          std::to_string(params_.window_samples()) + " samples, got " +
                          std::to_string(wave.samples.size()));
  }
  Eigen::MatrixXd energies(frames, params_.n_mels);
  for (int f = 0; f < frames; ++f) {
    energies.row(f) = (filterbank_ * power_spectrum(frame_samples(wave, f))).transpose();
  }
  return energies;
}

FrameMatrix MfccExtractor::compute(const corpus::Waveform& wave) const {
  const Eigen::MatrixXd energies = filterbank_energies(wave);
  const Eigen::MatrixXd logs = energies.array().max(params_.log_floor).log().matrix();
  // Frame by frame, so a frame's coefficients never depend on the frame count.
  FrameMatrix out(logs.rows(), params_.n_coeffs);
  for (Eigen::Index f = 0; f < logs.rows(); ++f) out.row(f) = (dct_ * logs.row(f).transpose()).transpose();
  return out;
}

FrameMatrix compute_mfcc(const corpus::Waveform& wave, const MfccParams& params) {
  return MfccExtractor(params).compute(wave);
}

}  // namespace pmfgn::signal
