#pragma once

#include <cstdint>

#include "ofdmsense/core/iq_buffer.hpp"
#include "ofdmsense/dsp/channel.hpp"
#include "ofdmsense/dsp/resample.hpp"
#include "ofdmsense/wavegen/ofdm_config.hpp"

namespace ofdmsense::wavegen {

struct ImpairmentSpec {
  double snr_db = dsp::kNoNoise;
  double cfo_hz = 0.0;
  std::size_t timing_offset_samples = 0;  // at the input rate
  double sdr_rate_hz = kCaptureRateHz;
  std::uint64_t seed = 0;
};

/// Delay by `offset` zero samples, keeping the original length.
inline IqBuffer delay(const IqBuffer& x, std::size_t offset) {
  if (offset == 0) return x;
  IqBuffer out({}, x.sample_rate_hz);
  out.samples.assign(std::min(offset, x.size()), cplx{});
  if (offset < x.size())
    out.samples.insert(out.samples.end(), x.samples.begin(),
                       x.samples.end() - static_cast<std::ptrdiff_t>(offset));
  return out;
}

/// Capture chain: delay, CFO, resample to the SDR rate, AWGN at the SDR
/// rate, resample to the 20 MHz processing rate.
inline IqBuffer impair(const IqBuffer& x, const ImpairmentSpec& spec) {
  if (spec.sdr_rate_hz < kCaptureRateHz) throw Error(ErrorCode::ConfigMismatch, "SDR rate must be at least 20 MHz");
  IqBuffer y = delay(x, spec.timing_offset_samples);
  y = dsp::apply_cfo(y, spec.cfo_hz);
  y = dsp::resample(y, spec.sdr_rate_hz);
  y = dsp::apply_awgn(y, spec.snr_db, spec.seed);
  return dsp::resample(y, kCaptureRateHz);
}

}  // namespace ofdmsense::wavegen
