#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "caltec/caltec.hpp"

namespace caltec {

/// "No completion": lost elements are zero.
RepairResult zero_fill(const FeatureTensor& tensor, const LossMask& mask, const PacketGrid& grid);

/// Each lost packet copies its select_neighbor() packet row for row.
/// Whole-lost channels are zero-filled.
RepairResult neighbor_copy(const FeatureTensor& tensor, const LossMask& mask,
                           const PacketGrid& grid);

/// Vertical interpolation inside each channel: a lost row takes, per column,
/// the linear blend of the nearest received rows above and below. A gap
/// touching the top or bottom edge repeats the single received row next to
/// it. Whole-lost channels are zero-filled.
RepairResult linear_interp(const FeatureTensor& tensor, const LossMask& mask,
                           const PacketGrid& grid);

enum class Method { caltec, zero_fill, neighbor_copy, linear_interp };

std::string_view method_name(Method method) noexcept;

/// Accepts the names produced by method_name(). Throws std::invalid_argument otherwise.
Method parse_method(std::string_view name);

const std::vector<Method>& all_methods();

RepairResult complete(Method method, const FeatureTensor& tensor, const LossMask& mask,
                      const PacketGrid& grid, const RepairOptions& options = {});

} // namespace caltec
