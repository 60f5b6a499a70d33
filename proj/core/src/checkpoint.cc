#include "uqkit/checkpoint.h"

#include <string>

#include "uqkit/error.h"
#include "uqkit/tensor_io.h"

namespace uqkit {
namespace {

constexpr int kCheckpointVersion = 1;

TensorFile ToTensor(const Matrix& m) {
  return MakeF64({static_cast<std::size_t>(m.rows()),
                  static_cast<std::size_t>(m.cols())},
                 std::vector<double>(m.data(), m.data() + m.size()));
}

Matrix FromTensor(const TensorFile& t, std::size_t rows, std::size_t cols,
                  const std::string& what) {
  if (t.dtype() != DType::kF64 || t.rank() != 2 || t.shape[0] != rows ||
      t.shape[1] != cols) {
    throw Error(ErrorCode::kShapeError,
                what + " must be <f8 [" + std::to_string(rows) + "," +
                    std::to_string(cols) + "]");
  }
  const auto& v = std::get<std::vector<double>>(t.data);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

std::string TensorFileName(std::size_t layer, const std::string& name) {
  return "layer" + std::to_string(layer) + "." + name + ".npy";
}

}  // namespace

void SaveCheckpoint(const ToyNet& net, const std::filesystem::path& dir,
                    std::uint64_t seed, const nlohmann::json& extra) {
  net.Validate();
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "uqkit-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["task"] = TaskName(net.task);
  manifest["seed"] = seed;
  manifest["layers"] = nlohmann::json::array();

  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& layer = net.layers[i];
    nlohmann::json entry;
    entry["kind"] = LayerKindName(layer.kind());
    entry["in"] = layer.in_dim();
    entry["out"] = layer.out_dim();
    entry["activation"] = ActivationName(layer.activation);
    entry["frozen"] = layer.frozen;

    std::vector<std::pair<std::string, const Matrix*>> tensors;
    const auto names = layer.ParameterNames();
    const auto params = layer.Parameters();
    for (std::size_t j = 0; j < params.size(); ++j) {
      tensors.emplace_back(names[j], params[j]);
    }
    if (const auto* flip = std::get_if<VariationalDense>(&layer.impl)) {
      tensors.emplace_back("prior_mu", &flip->prior_mu);
      tensors.emplace_back("prior_bias_mu", &flip->prior_bias_mu);
      entry["prior_sigma"] = flip->prior_sigma;
    }
    if (const auto* drop = std::get_if<DropoutDense>(&layer.impl)) {
      entry["rate"] = drop->rate;
    }
    nlohmann::json files;
    for (const auto& [name, matrix] : tensors) {
      const auto file = TensorFileName(i, name);
      WriteNpyFile(dir / file, ToTensor(*matrix));
      files[name] = file;
    }
    entry["tensors"] = files;
    manifest["layers"].push_back(entry);
  }
  if (!extra.is_null()) manifest["extra"] = extra;
  WriteFileAtomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& dir) {
  const auto bytes = ReadFileBytes(dir / "manifest.json");
  LoadedCheckpoint out;
  try {
    out.manifest = nlohmann::json::parse(bytes.begin(), bytes.end());
    if (out.manifest.at("format") != "uqkit-checkpoint" ||
        out.manifest.at("version") != kCheckpointVersion) {
      throw Error(ErrorCode::kConfigError, "not a version 1 uqkit checkpoint");
    }
    out.seed = out.manifest.at("seed").get<std::uint64_t>();
    out.net.task = ParseTask(out.manifest.at("task").get<std::string>());

    const auto& layers = out.manifest.at("layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& entry = layers[i];
      const auto in = entry.at("in").get<std::size_t>();
      const auto outd = entry.at("out").get<std::size_t>();
      const auto& files = entry.at("tensors");
      auto load = [&](const std::string& name, std::size_t rows,
                      std::size_t cols) {
        return FromTensor(
            ReadNpyFile(dir / files.at(name).get<std::string>()), rows, cols,
            "layer " + std::to_string(i) + " " + name);
      };
      Layer layer;
      layer.activation =
          ParseActivation(entry.at("activation").get<std::string>());
      layer.frozen = entry.value("frozen", false);
      switch (ParseLayerKind(entry.at("kind").get<std::string>())) {
        case LayerKind::kDeterministic:
          layer.impl = DenseLayer{load("w", in, outd), load("b", 1, outd)};
          break;
        case LayerKind::kFlipout: {
          VariationalDense v;
          v.mu = load("mu", in, outd);
          v.rho = load("rho", in, outd);
          v.bias_mu = load("bias_mu", 1, outd);
          v.bias_rho = load("bias_rho", 1, outd);
          v.prior_mu = load("prior_mu", in, outd);
          v.prior_bias_mu = load("prior_bias_mu", 1, outd);
          v.prior_sigma = entry.at("prior_sigma").get<double>();
          layer.impl = std::move(v);
          break;
        }
        case LayerKind::kDropout:
          layer.impl = DropoutDense{load("w", in, outd), load("b", 1, outd),
                                    entry.at("rate").get<double>()};
          break;
      }
      out.net.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                "bad checkpoint manifest: " + std::string(e.what()));
  }
  out.net.Validate();
  return out;
}

}  // namespace uqkit
