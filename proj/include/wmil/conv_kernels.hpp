/*
 * Copyright 2026 The wmil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef WMIL_CONV_KERNELS_HPP_
#define WMIL_CONV_KERNELS_HPP_

#include <cstdint>
#include <span>

// Inner kernels of the region scorer. Feature maps are channel-major
// [channels][rows][cols]; "padded" maps carry a one-pixel zero border, so a
// size x size map occupies (size + 2)^2 entries per channel. All loops are
// written so that the innermost one runs along a row and vectorizes.
namespace wmil::kernels {

// out[oc] = bias[oc] + sum_ic correlate(in_padded[ic], weight[oc][ic]).
// weight is [cout][cin][3][3]; out is unpadded [cout][size][size].
void conv3x3_forward(std::span<const double> in_padded, int cin, int size,
                     std::span<const double> weight,
                     std::span<const double> bias, int cout,
                     std::span<double> out);

// Accumulates dL/dweight and dL/dbias given the layer input and dL/dout.
void conv3x3_backward_params(std::span<const double> in_padded, int cin,
                             int size, std::span<const double> grad_out,
                             int cout, std::span<double> grad_weight,
                             std::span<double> grad_bias);

// dL/din (unpadded [cin][size][size]) from a zero-bordered dL/dout.
void conv3x3_backward_input(std::span<const double> grad_out_padded, int cout,
                            int size, std::span<const double> weight, int cin,
                            std::span<double> grad_in);

// ReLU followed by 2x2/stride-2 max pooling. Pooled values go into the
// interior of a zero-bordered map of size/2 (or an unpadded one when
// `padded_out` is false); argmax records the winning tap (0..3) per output.
void relu_maxpool_forward(std::span<const double> pre, int channels, int size,
                          std::span<double> pooled, bool padded_out,
                          std::span<std::uint8_t> argmax);

// Routes dL/dpooled back to the pre-activation map. Outputs whose pooled
// value is not positive receive no gradient (ReLU subgradient 0 at 0).
void relu_maxpool_backward(std::span<const double> grad_pooled,
                           std::span<const double> pooled, bool padded_pooled,
                           std::span<const std::uint8_t> argmax, int channels,
                           int size, std::span<double> grad_pre);

// Copies an unpadded [channels][size][size] map into a zero-bordered one.
void pad_map(std::span<const double> in, int channels, int size,
             std::span<double> out_padded);

}  // namespace wmil::kernels

#endif  // WMIL_CONV_KERNELS_HPP_
