#include "uqkit/tensor_io.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "uqkit/error.h"
#include "uqkit/rng.h"

namespace uqkit {
namespace {

const std::filesystem::path kCorpus =
    std::filesystem::path(UQKIT_TEST_DATA_DIR) / "npy_corpus";

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no uqkit::Error thrown";
  return ErrorCode::kIoError;
}

std::vector<std::uint8_t> HeaderBytes(const std::string& dict) {
  std::vector<std::uint8_t> out = {0x93, 'N', 'U', 'M', 'P', 'Y', 1, 0};
  std::string header = dict;
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  out.push_back(static_cast<std::uint8_t>(header.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  return out;
}

TEST(TensorIo, NumpyCorpusParsesToRecordedValues) {
  std::ifstream in(kCorpus / "corpus.json");
  ASSERT_TRUE(in) << kCorpus;
  const auto corpus = nlohmann::json::parse(in);
  ASSERT_GE(corpus.size(), 8u);
  for (const auto& [name, entry] : corpus.items()) {
    SCOPED_TRACE(name);
    const auto tensor = ReadNpyFile(kCorpus / (name + ".npy"));
    EXPECT_EQ(DTypeDescr(tensor.dtype()), entry["descr"].get<std::string>());
    EXPECT_EQ(tensor.shape, entry["shape"].get<std::vector<std::size_t>>());
    const auto values = entry["values"].get<std::vector<double>>();
    ASSERT_EQ(tensor.element_count(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      EXPECT_EQ(tensor.AsDouble(i), values[i]) << i;
    }
  }
}

TEST(TensorIo, RewritingNumpyFilesIsByteIdentical) {
  for (const auto& entry : std::filesystem::directory_iterator(kCorpus)) {
    if (entry.path().extension() != ".npy") continue;
    SCOPED_TRACE(entry.path().filename().string());
    const auto bytes = ReadFileBytes(entry.path());
    EXPECT_EQ(WriteNpy(ReadNpy(bytes)), bytes);
  }
}

TEST(TensorIo, ScalarFloatPayloadIsLittleEndian) {
  const auto bytes = WriteNpy(MakeF32({1}, {2.5f}));
  ASSERT_EQ(bytes.size(), 132u);
  EXPECT_EQ(bytes[128], 0x00);
  EXPECT_EQ(bytes[129], 0x00);
  EXPECT_EQ(bytes[130], 0x20);
  EXPECT_EQ(bytes[131], 0x40);
}

TEST(TensorIo, DataOffsetIsMultipleOf64) {
  for (std::size_t n : {0u, 1u, 9u, 10u, 12345u, 1234567890u}) {
    TensorFile t{{n, 0}, std::vector<double>{}};
    const auto bytes = WriteNpy(t);
    const std::size_t header_len = bytes[8] | (bytes[9] << 8);
    EXPECT_EQ((10 + header_len) % 64, 0u) << n;
    EXPECT_EQ(bytes[10 + header_len - 1], '\n');
  }
}

TEST(TensorIo, EmptyTensorRoundTrips) {
  const auto t = MakeF32({0}, {});
  const auto back = ReadNpy(WriteNpy(t));
  EXPECT_EQ(back, t);
  EXPECT_EQ(back.element_count(), 0u);
}

TEST(TensorIo, RejectsBadMagic) {
  auto bytes = WriteNpy(MakeF64({2}, {1.0, 2.0}));
  bytes[1] = 'X';
  EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kBadMagic);
  EXPECT_EQ(CodeOf([&] { ReadNpy(std::vector<std::uint8_t>{0x93, 'N'}); }),
            ErrorCode::kBadMagic);
  const std::string text = "hello world, definitely not numpy";
  EXPECT_EQ(CodeOf([&] {
              ReadNpy(std::span(
                  reinterpret_cast<const std::uint8_t*>(text.data()),
                  text.size()));
            }),
            ErrorCode::kBadMagic);
}

TEST(TensorIo, RejectsUnsupportedVersion) {
  auto bytes = WriteNpy(MakeF64({1}, {1.0}));
  bytes[6] = 2;
  EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kBadMagic);
}

TEST(TensorIo, RejectsUnsupportedDescr) {
  for (const char* descr : {"<i4", ">f8", "|u1", "<c16", "|b1"}) {
    SCOPED_TRACE(descr);
    const auto bytes =
        HeaderBytes(std::string("{'descr': '") + descr +
                    "', 'fortran_order': False, 'shape': (0,), }");
    EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kUnsupportedDescr);
  }
}

TEST(TensorIo, RejectsFortranOrder) {
  auto bytes = HeaderBytes(
      "{'descr': '<f8', 'fortran_order': True, 'shape': (1,), }");
  bytes.resize(bytes.size() + 8, 0);
  EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kFortranOrder);
}

TEST(TensorIo, RejectsRankAboveFour) {
  auto bytes = HeaderBytes(
      "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 1, 1, 1), }");
  bytes.resize(bytes.size() + 8, 0);
  EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kShapeError);
}

TEST(TensorIo, RejectsMalformedHeaders) {
  for (const char* dict :
       {"{'descr': '<f8', 'shape': (1,), }",
        "{'descr': '<f8', 'fortran_order': False, 'shape': (1,)",
        "{'descr': '<f8', 'fortran_order': Maybe, 'shape': (1,), }",
        "{'descr': '<f8', 'fortran_order': False, 'shape': (-1,), }",
        "not a dict at all"}) {
    SCOPED_TRACE(dict);
    auto bytes = HeaderBytes(dict);
    bytes.resize(bytes.size() + 8, 0);
    EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kMalformedHeader);
  }
}

TEST(TensorIo, EveryTruncationIsHeaderMismatchOrBadMagic) {
  const auto bytes = WriteNpy(MakeF64({2, 3}, {1, 2, 3, 4, 5, 6}));
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    const std::span<const std::uint8_t> prefix(bytes.data(), len);
    const auto code = CodeOf([&] { ReadNpy(prefix); });
    if (len < 6) {
      EXPECT_EQ(code, ErrorCode::kBadMagic) << len;
    } else {
      EXPECT_EQ(code, ErrorCode::kHeaderMismatch) << len;
    }
  }
}

TEST(TensorIo, TrailingBytesAreHeaderMismatch) {
  auto bytes = WriteNpy(MakeF64({2}, {1, 2}));
  bytes.push_back(0);
  EXPECT_EQ(CodeOf([&] { ReadNpy(bytes); }), ErrorCode::kHeaderMismatch);
}

TEST(TensorIo, RandomTensorsRoundTrip) {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rank = rng.UniformIndex(5);
    std::vector<std::size_t> shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = rng.UniformIndex(5);
      count *= d;
    }
    TensorFile t;
    t.shape = shape;
    switch (rng.UniformIndex(3)) {
      case 0: {
        std::vector<float> v(count);
        for (auto& x : v) x = static_cast<float>(rng.Normal());
        t.data = std::move(v);
        break;
      }
      case 1: {
        std::vector<double> v(count);
        for (auto& x : v) x = rng.Normal() * 1e3;
        t.data = std::move(v);
        break;
      }
      default: {
        std::vector<std::int64_t> v(count);
        for (auto& x : v) x = static_cast<std::int64_t>(rng());
        t.data = std::move(v);
      }
    }
    const auto bytes = WriteNpy(t);
    EXPECT_EQ(ReadNpy(bytes), t);
    EXPECT_EQ(WriteNpy(ReadNpy(bytes)), bytes);
  }
}

TEST(TensorIo, AtomicFileWriteReplacesTarget) {
  const auto dir = std::filesystem::temp_directory_path() / "uqkit_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "t.npy";
  WriteNpyFile(path, MakeF64({1}, {1.0}));
  WriteNpyFile(path, MakeF64({2}, {3.0, 4.0}));
  EXPECT_EQ(ReadNpyFile(path), MakeF64({2}, {3.0, 4.0}));
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST(TensorIo, MissingFileIsIoError) {
  EXPECT_EQ(CodeOf([] { ReadNpyFile("/nonexistent/uqkit/x.npy"); }),
            ErrorCode::kIoError);
}

TEST(TensorIo, PredictionsFromFloatTensor) {
  const auto preds = LoadPredictions(kCorpus / "f4_preds.npy",
                                     Task::kMulticlass);
  EXPECT_EQ(preds.samples(), 3u);
  EXPECT_EQ(preds.items(), 5u);
  EXPECT_EQ(preds.classes(), 4u);
  const auto back = PredictionsToTensor(preds);
  EXPECT_EQ(back.dtype(), DType::kF64);
  EXPECT_EQ(back.shape, (std::vector<std::size_t>{3, 5, 4}));
}

TEST(TensorIo, PredictionTensorValidation) {
  EXPECT_EQ(CodeOf([] {
              PredictionsFromTensor(MakeF64({2, 2}, {0.5, 0.5, 0.5, 0.5}),
                                    Task::kMulticlass);
            }),
            ErrorCode::kShapeError);
  EXPECT_EQ(CodeOf([] {
              PredictionsFromTensor(MakeI64({1, 1, 2}, {0, 1}),
                                    Task::kMulticlass);
            }),
            ErrorCode::kShapeError);
  EXPECT_EQ(CodeOf([] {
              PredictionsFromTensor(MakeF64({1, 1, 2}, {0.7, 0.7}),
                                    Task::kMulticlass);
            }),
            ErrorCode::kRowSumError);
  EXPECT_EQ(CodeOf([] {
              PredictionsFromTensor(MakeF64({1, 1, 2}, {1.5, -0.5}),
                                    Task::kMulticlass);
            }),
            ErrorCode::kRangeError);
}

TEST(TensorIo, LabelTensors) {
  const auto multiclass = LoadLabels(kCorpus / "i8_labels.npy",
                                     Task::kMulticlass, 5, 5);
  EXPECT_EQ(multiclass.index(2), 4);
  EXPECT_EQ(LabelsToTensor(multiclass), ReadNpyFile(kCorpus / "i8_labels.npy"));

  const auto multihot = LoadLabels(kCorpus / "i8_multihot.npy",
                                   Task::kMultilabel, 4, 3);
  EXPECT_TRUE(multihot.positive(2, 1));
  EXPECT_FALSE(multihot.positive(0, 0));

  EXPECT_EQ(CodeOf([&] {
              LoadLabels(kCorpus / "i8_labels.npy", Task::kMulticlass, 5, 4);
            }),
            ErrorCode::kIndexError);
  EXPECT_EQ(CodeOf([] {
              LabelsFromTensor(MakeI64({1, 2}, {0, 2}), Task::kMultilabel, 1,
                               2);
            }),
            ErrorCode::kBinaryError);
  EXPECT_EQ(CodeOf([] {
              LabelsFromTensor(MakeI64({3}, {0, 1, 0}), Task::kMulticlass, 4,
                               2);
            }),
            ErrorCode::kShapeError);
}

}  // namespace
}  // namespace uqkit
