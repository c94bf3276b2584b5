#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hcmgnn/numerics/tape.hpp"

namespace hcmgnn::num {

inline constexpr double kLeakyReluSlope = 0.01;

// Algebra. Shape mismatches throw std::invalid_argument naming both shapes.
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
// a * s for a 1x1 variable s.
Var scale(Var a, Var s);
// Adds a 1 x cols row to every row of a (bias).
Var add_row(Var a, Var row);
// Multiplies every row of a elementwise by a 1 x cols row.
Var mul_row(Var a, Var row);
// Multiplies row i of a by column(i, 0) for an n x 1 column.
Var scale_rows(Var a, Var column);

// Structure.
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::span<const std::uint32_t> index);

// Segment reductions: row i of `a` belongs to segment segment[i] < segments.
// Segments without members produce zero rows.
Var segment_sum(Var a, std::span<const std::uint32_t> segment, std::size_t segments);
// Row v, column block k: sum over entries i with segment[i] == v of
// weights(i, k) * values.row(index[i]). Output is segments x (K * F).
Var weighted_segment_sum(Var weights, Var values, std::span<const std::uint32_t> index,
                         std::span<const std::uint32_t> segment, std::size_t segments);
Var segment_mean(Var a, std::span<const std::uint32_t> segment, std::size_t segments);
// Column-wise softmax within each segment (independent per column).
Var segment_softmax(Var a, std::span<const std::uint32_t> segment, std::size_t segments);
Var row_softmax(Var a);
// 1 x cols mean over rows.
Var mean_rows(Var a);

// Elementwise nonlinearities.
Var leaky_relu(Var a, double slope = kLeakyReluSlope);
Var elu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);

// Reductions to 1x1.
Var sum(Var a);
Var squared_norm(Var a);

}  // namespace hcmgnn::num
