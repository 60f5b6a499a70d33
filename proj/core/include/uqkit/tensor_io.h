#ifndef UQKIT_TENSOR_IO_H_
#define UQKIT_TENSOR_IO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uqkit/types.h"

namespace uqkit {

enum class DType { kF32, kF64, kI64 };

std::string_view DTypeDescr(DType dtype);  // "<f4", "<f8", "<i8"
std::size_t DTypeSize(DType dtype);

inline constexpr std::size_t kMaxTensorRank = 4;

// A dense row-major tensor as it appears on disk.
struct TensorFile {
  using Buffer = std::variant<std::vector<float>, std::vector<double>,
                              std::vector<std::int64_t>>;

  std::vector<std::size_t> shape;
  Buffer data;

  DType dtype() const { return static_cast<DType>(data.index()); }
  std::size_t element_count() const;
  std::size_t rank() const { return shape.size(); }

  // Throws kShapeError when shape and buffer disagree or rank > 4.
  void Validate() const;

  // Element i widened to double (i64 converted exactly where representable).
  double AsDouble(std::size_t i) const;

  bool operator==(const TensorFile&) const = default;
};

TensorFile MakeF32(std::vector<std::size_t> shape, std::vector<float> data);
TensorFile MakeF64(std::vector<std::size_t> shape, std::vector<double> data);
TensorFile MakeI64(std::vector<std::size_t> shape,
                   std::vector<std::int64_t> data);

// NPY v1.0 little-endian C-order parser. Never reads past the declared
// payload; any size disagreement is kHeaderMismatch.
TensorFile ReadNpy(std::span<const std::uint8_t> bytes);

// Emits v1.0 with numpy's header layout (spare growth-axis spaces, padded so
// the data offset is a multiple of 64).
std::vector<std::uint8_t> WriteNpy(const TensorFile& tensor);

TensorFile ReadNpyFile(const std::filesystem::path& path);
// Writes to a sibling temp file and renames over `path`.
void WriteNpyFile(const std::filesystem::path& path, const TensorFile& tensor);

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path);
void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes);
void WriteFileAtomic(const std::filesystem::path& path, std::string_view text);

// Rank-3 [M,N,C] float tensor -> validated predictions; f32 widened to f64.
McPredictions PredictionsFromTensor(const TensorFile& tensor, Task task);
McPredictions LoadPredictions(const std::filesystem::path& path, Task task);
TensorFile PredictionsToTensor(const McPredictions& preds);

// i64 tensor, rank 1 [N] for multiclass or rank 2 [N,C] for multilabel.
// `items` / `classes` come from the paired predictions.
LabelSet LabelsFromTensor(const TensorFile& tensor, Task task,
                          std::size_t items, std::size_t classes);
LabelSet LoadLabels(const std::filesystem::path& path, Task task,
                    std::size_t items, std::size_t classes);
TensorFile LabelsToTensor(const LabelSet& labels);

}  // namespace uqkit

#endif  // UQKIT_TENSOR_IO_H_
