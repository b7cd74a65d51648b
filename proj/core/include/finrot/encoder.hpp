#pragma once

#include "finrot/rng.hpp"
#include "finrot/tape.hpp"
#include "finrot/tensor.hpp"

#include <vector>

namespace finrot {

// Small strided CNN turning one view into a descriptor. Each stage is a 3x3
// convolution followed by relu; a spatial mean over the final grid yields
// [B, widths.back()]. With circular_w the width axis wraps, which suits
// log-polar inputs where that axis is the angle; keeping stride_w at 1 there
// makes the final mean exactly invariant to circular shifts along that axis.
struct EncoderConfig {
  std::vector<int> widths{8, 12, 16, 24};
  int in_channels = 1;
  bool circular_w = false;
  int stride_h = 2;
  int stride_w = 2;

  int out_dim() const { return widths.back(); }
};

// Preset for log-polar views: circular, never strides the angle axis.
inline EncoderConfig polar_encoder_config(std::vector<int> widths = {8, 12, 16, 24},
                                          int in_channels = 1) {
  EncoderConfig cfg;
  cfg.widths = std::move(widths);
  cfg.in_channels = in_channels;
  cfg.circular_w = true;
  cfg.stride_w = 1;
  return cfg;
}

struct Encoder {
  EncoderConfig cfg;
  std::vector<Tensor> conv_w; // [C_out, 3, 3, C_in] per stage
  std::vector<Tensor> conv_b; // [C_out] per stage
};

// He-uniform init in +-sqrt(6 / fan_in), fan_in = 9 * C_in; biases zero.
Encoder make_encoder(const EncoderConfig& cfg, Rng& rng);

// Pushes the encoder weights onto the tape (trainable when train is set) and
// returns their Vars in (w0, b0, w1, b1, ...) order for the optimizer.
std::vector<Tape::Var> push_encoder(Tape& t, const Encoder& enc, bool train);

// images [B, H, W, C_in] -> [B, out_dim]. params must come from push_encoder.
Tape::Var encoder_forward(Tape& t, const EncoderConfig& cfg,
                          const std::vector<Tape::Var>& params, Tape::Var images);

} // namespace finrot
