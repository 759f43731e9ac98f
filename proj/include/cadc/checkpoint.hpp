#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "cadc/nn.hpp"
#include "cadc/snn.hpp"

namespace cadc {

using Model = std::variant<CnnModel, AnnModel, SnnModel>;

ModelKind kind_of(const Model& m);

// Layout, little-endian: "CADC1", u8 kind, u32 layer count, then per layer
// u32 rows, u32 cols, u32 bits, f64 scale, the weights (f64 each when bits
// is 0, otherwise i16 codes), rows f64 biases. SNN models append one f64
// threshold per layer and a u32 time-step count.

std::string serialize_model(const Model& m);
/// Throws CorruptFileError positioned at the offending byte.
Model deserialize_model(std::string_view bytes);

void save_model(const std::filesystem::path& path, const Model& m);
Model load_model(const std::filesystem::path& path);

}  // namespace cadc
