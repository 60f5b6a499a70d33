#include "uqkit/tensor_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <system_error>

#include "uqkit/error.h"

namespace uqkit {
namespace {

constexpr std::uint8_t kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreludeSize = 10;  // magic + version + u16 length
constexpr std::size_t kAlignment = 64;
constexpr std::size_t kGrowthAxisDigits = 21;

// Minimal parser for the Python dict literal numpy writes, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  struct Header {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
  };

  Header Parse() {
    Header header;
    bool have_descr = false, have_order = false, have_shape = false;
    Expect('{');
    while (true) {
      SkipSpace();
      if (Peek() == '}') {
        ++pos_;
        break;
      }
      std::string key = ParseString();
      Expect(':');
      if (key == "descr") {
        header.descr = ParseString();
        have_descr = true;
      } else if (key == "fortran_order") {
        header.fortran_order = ParseBool();
        have_order = true;
      } else if (key == "shape") {
        header.shape = ParseShape();
        have_shape = true;
      } else {
        Fail("unexpected key '" + key + "'");
      }
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
      } else if (Peek() != '}') {
        Fail("expected ',' or '}'");
      }
    }
    SkipSpace();
    if (pos_ != text_.size()) Fail("trailing characters after dict");
    if (!have_descr || !have_order || !have_shape) {
      Fail("header must declare descr, fortran_order and shape");
    }
    return header;
  }

 private:
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kMalformedHeader,
                what + " at offset " + std::to_string(pos_));
  }

  char Peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void SkipSpace() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\n')) {
      ++pos_;
    }
  }

  void Expect(char c) {
    SkipSpace();
    if (Peek() != c) Fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ParseString() {
    SkipSpace();
    const char quote = Peek();
    if (quote != '\'' && quote != '"') Fail("expected string literal");
    ++pos_;
    const auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) Fail("unterminated string");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  bool ParseBool() {
    SkipSpace();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    Fail("expected True or False");
  }

  std::vector<std::size_t> ParseShape() {
    std::vector<std::size_t> shape;
    Expect('(');
    while (true) {
      SkipSpace();
      if (Peek() == ')') {
        ++pos_;
        return shape;
      }
      if (Peek() < '0' || Peek() > '9') Fail("expected non-negative extent");
      std::size_t value = 0;
      while (Peek() >= '0' && Peek() <= '9') {
        const std::size_t digit = static_cast<std::size_t>(Peek() - '0');
        if (value > (SIZE_MAX - digit) / 10) Fail("extent overflows");
        value = value * 10 + digit;
        ++pos_;
      }
      shape.push_back(value);
      SkipSpace();
      if (Peek() == ',') {
        ++pos_;
      } else if (Peek() != ')') {
        Fail("expected ',' or ')' in shape");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<DType> DTypeFromDescr(std::string_view descr) {
  if (descr == "<f4") return DType::kF32;
  if (descr == "<f8") return DType::kF64;
  if (descr == "<i8") return DType::kI64;
  return std::nullopt;
}

template <typename T>
std::vector<T> DecodeLittleEndian(const std::uint8_t* src, std::size_t count) {
  std::vector<T> out(count);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(out.data(), src, count * sizeof(T));
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      std::uint8_t tmp[sizeof(T)];
      std::reverse_copy(src + i * sizeof(T), src + (i + 1) * sizeof(T), tmp);
      std::memcpy(&out[i], tmp, sizeof(T));
    }
  }
  return out;
}

template <typename T>
void EncodeLittleEndian(const std::vector<T>& values,
                        std::vector<std::uint8_t>& out) {
  const std::size_t offset = out.size();
  out.resize(offset + values.size() * sizeof(T));
  if (values.empty()) return;
  std::memcpy(out.data() + offset, values.data(), values.size() * sizeof(T));
  if constexpr (std::endian::native != std::endian::little) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      auto* p = out.data() + offset + i * sizeof(T);
      std::reverse(p, p + sizeof(T));
    }
  }
}

std::size_t ShapeProduct(std::span<const std::size_t> shape) {
  std::size_t product = 1;
  for (std::size_t extent : shape) {
    if (extent != 0 && product > SIZE_MAX / extent) {
      throw Error(ErrorCode::kHeaderMismatch, "shape product overflows");
    }
    product *= extent;
  }
  return product;
}

std::string ShapeLiteral(std::span<const std::size_t> shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace

std::string_view DTypeDescr(DType dtype) {
  switch (dtype) {
    case DType::kF32: return "<f4";
    case DType::kF64: return "<f8";
    case DType::kI64: return "<i8";
  }
  return "";
}

std::size_t DTypeSize(DType dtype) { return dtype == DType::kF32 ? 4 : 8; }

std::size_t TensorFile::element_count() const {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

void TensorFile::Validate() const {
  if (shape.size() > kMaxTensorRank) {
    throw Error(ErrorCode::kShapeError,
                "rank " + std::to_string(shape.size()) + " exceeds 4");
  }
  std::size_t product = 1;
  for (std::size_t extent : shape) product *= extent;
  if (product != element_count()) {
    throw Error(ErrorCode::kShapeError,
                "shape holds " + std::to_string(product) +
                    " elements but buffer has " +
                    std::to_string(element_count()));
  }
}

double TensorFile::AsDouble(std::size_t i) const {
  return std::visit([i](const auto& v) { return static_cast<double>(v[i]); },
                    data);
}

TensorFile MakeF32(std::vector<std::size_t> shape, std::vector<float> data) {
  TensorFile t{std::move(shape), std::move(data)};
  t.Validate();
  return t;
}

TensorFile MakeF64(std::vector<std::size_t> shape, std::vector<double> data) {
  TensorFile t{std::move(shape), std::move(data)};
  t.Validate();
  return t;
}

TensorFile MakeI64(std::vector<std::size_t> shape,
                   std::vector<std::int64_t> data) {
  TensorFile t{std::move(shape), std::move(data)};
  t.Validate();
  return t;
}

TensorFile ReadNpy(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) ||
      !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "not an NPY file");
  }
  if (bytes.size() < kPreludeSize) {
    throw Error(ErrorCode::kHeaderMismatch, "truncated before header length");
  }
  if (bytes[6] != 1 || bytes[7] != 0) {
    throw Error(ErrorCode::kBadMagic,
                "unsupported NPY version " + std::to_string(bytes[6]) + "." +
                    std::to_string(bytes[7]));
  }
  const std::size_t header_len =
      static_cast<std::size_t>(bytes[8]) | (static_cast<std::size_t>(bytes[9]) << 8);
  if (bytes.size() < kPreludeSize + header_len) {
    throw Error(ErrorCode::kHeaderMismatch, "truncated header");
  }
  const std::string_view header_text(
      reinterpret_cast<const char*>(bytes.data() + kPreludeSize), header_len);
  const auto header = HeaderParser(header_text).Parse();

  const auto dtype = DTypeFromDescr(header.descr);
  if (!dtype) {
    throw Error(ErrorCode::kUnsupportedDescr,
                "descr '" + header.descr + "' not in {<f4, <f8, <i8}");
  }
  if (header.fortran_order) {
    throw Error(ErrorCode::kFortranOrder, "column-major data unsupported");
  }
  if (header.shape.size() > kMaxTensorRank) {
    throw Error(ErrorCode::kShapeError,
                "rank " + std::to_string(header.shape.size()) + " exceeds 4");
  }

  const std::size_t count = ShapeProduct(header.shape);
  const std::size_t item = DTypeSize(*dtype);
  const std::size_t payload = bytes.size() - kPreludeSize - header_len;
  if (count > SIZE_MAX / item || payload != count * item) {
    throw Error(ErrorCode::kHeaderMismatch,
                "payload has " + std::to_string(payload) +
                    " bytes, header declares " + std::to_string(count) +
                    " elements of " + std::to_string(item) + " bytes");
  }

  const std::uint8_t* src = bytes.data() + kPreludeSize + header_len;
  TensorFile out;
  out.shape = header.shape;
  switch (*dtype) {
    case DType::kF32: out.data = DecodeLittleEndian<float>(src, count); break;
    case DType::kF64: out.data = DecodeLittleEndian<double>(src, count); break;
    case DType::kI64:
      out.data = DecodeLittleEndian<std::int64_t>(src, count);
      break;
  }
  return out;
}

std::vector<std::uint8_t> WriteNpy(const TensorFile& tensor) {
  tensor.Validate();
  std::string header = "{'descr': '";
  header += DTypeDescr(tensor.dtype());
  header += "', 'fortran_order': False, 'shape': ";
  header += ShapeLiteral(tensor.shape);
  header += ", }";
  if (!tensor.shape.empty()) {
    const auto digits = std::to_string(tensor.shape.front()).size();
    if (digits < kGrowthAxisDigits) {
      header.append(kGrowthAxisDigits - digits, ' ');
    }
  }
  const std::size_t unpadded = kPreludeSize + header.size() + 1;
  header.append((kAlignment - unpadded % kAlignment) % kAlignment, ' ');
  header += '\n';
  if (header.size() > 0xffff) {
    throw Error(ErrorCode::kShapeError, "header too long for NPY v1.0");
  }

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  std::visit([&out](const auto& v) { EncodeLittleEndian(v, out); },
             tensor.data);
  return out;
}

std::vector<std::uint8_t> ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileAtomic(const std::filesystem::path& path,
                     std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::kIoError,
                "rename to " + path.string() + ": " + ec.message());
  }
}

void WriteFileAtomic(const std::filesystem::path& path, std::string_view text) {
  WriteFileAtomic(path, std::span<const std::uint8_t>(
                            reinterpret_cast<const std::uint8_t*>(text.data()),
                            text.size()));
}

TensorFile ReadNpyFile(const std::filesystem::path& path) {
  return ReadNpy(ReadFileBytes(path));
}

void WriteNpyFile(const std::filesystem::path& path, const TensorFile& tensor) {
  WriteFileAtomic(path, WriteNpy(tensor));
}

McPredictions PredictionsFromTensor(const TensorFile& tensor, Task task) {
  if (tensor.rank() != 3) {
    throw Error(ErrorCode::kShapeError,
                "predictions must be rank 3 [M,N,C], got rank " +
                    std::to_string(tensor.rank()));
  }
  if (tensor.dtype() == DType::kI64) {
    throw Error(ErrorCode::kShapeError, "predictions must be floating point");
  }
  std::vector<double> probs(tensor.element_count());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = tensor.AsDouble(i);
  return McPredictions(std::move(probs), tensor.shape[0], tensor.shape[1],
                       tensor.shape[2], task);
}

McPredictions LoadPredictions(const std::filesystem::path& path, Task task) {
  return PredictionsFromTensor(ReadNpyFile(path), task);
}

TensorFile PredictionsToTensor(const McPredictions& preds) {
  return MakeF64({preds.samples(), preds.items(), preds.classes()},
                 std::vector<double>(preds.data().begin(), preds.data().end()));
}

LabelSet LabelsFromTensor(const TensorFile& tensor, Task task,
                          std::size_t items, std::size_t classes) {
  if (tensor.dtype() != DType::kI64) {
    throw Error(ErrorCode::kShapeError, "labels must be <i8");
  }
  const auto& values = std::get<std::vector<std::int64_t>>(tensor.data);
  if (task == Task::kMulticlass) {
    if (tensor.rank() != 1 || tensor.shape[0] != items) {
      throw Error(ErrorCode::kShapeError,
                  "multiclass labels must have shape [" +
                      std::to_string(items) + "]");
    }
    return LabelSet::Multiclass(values, classes);
  }
  if (tensor.rank() != 2 || tensor.shape[0] != items ||
      tensor.shape[1] != classes) {
    throw Error(ErrorCode::kShapeError,
                "multilabel labels must have shape [" + std::to_string(items) +
                    "," + std::to_string(classes) + "]");
  }
  std::vector<std::uint8_t> matrix(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0 && values[i] != 1) {
      throw Error(ErrorCode::kBinaryError,
                  "multilabel entry " + std::to_string(i) + " = " +
                      std::to_string(values[i]));
    }
    matrix[i] = static_cast<std::uint8_t>(values[i]);
  }
  return LabelSet::Multilabel(std::move(matrix), items, classes);
}

LabelSet LoadLabels(const std::filesystem::path& path, Task task,
                    std::size_t items, std::size_t classes) {
  return LabelsFromTensor(ReadNpyFile(path), task, items, classes);
}

TensorFile LabelsToTensor(const LabelSet& labels) {
  if (labels.task() == Task::kMulticlass) {
    std::vector<std::int64_t> values(labels.items());
    for (std::size_t n = 0; n < labels.items(); ++n) values[n] = labels.index(n);
    return MakeI64({labels.items()}, std::move(values));
  }
  std::vector<std::int64_t> values(labels.items() * labels.classes());
  for (std::size_t n = 0; n < labels.items(); ++n) {
    for (std::size_t c = 0; c < labels.classes(); ++c) {
      values[n * labels.classes() + c] = labels.positive(n, c) ? 1 : 0;
    }
  }
  return MakeI64({labels.items(), labels.classes()}, std::move(values));
}

}  // namespace uqkit
