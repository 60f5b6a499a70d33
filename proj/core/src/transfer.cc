#include "uqkit/transfer.h"

#include <string>

#include "uqkit/error.h"

namespace uqkit {
namespace {

// Seed offsets keep every stochastic stage on its own stream.
constexpr std::uint64_t kHeadInitOffset = 101;
constexpr std::uint64_t kPhase1Offset = 102;
constexpr std::uint64_t kPhase2Offset = 103;
constexpr std::uint64_t kUpstreamInitOffset = 201;
constexpr std::uint64_t kUpstreamTrainOffset = 202;
constexpr std::uint64_t kUpstreamVariationalOffset = 203;
constexpr std::uint64_t kScratchInitOffset = 301;
constexpr std::uint64_t kScratchTrainOffset = 302;

LayerKind TransferredKind(Strategy strategy) {
  return strategy == Strategy::kDrop ? LayerKind::kDropout : LayerKind::kFlipout;
}

}  // namespace

std::string_view StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kFlip: return "flip";
    case Strategy::kDetFlip: return "det_flip";
    case Strategy::kDrop: return "drop";
  }
  return "flip";
}

Strategy ParseStrategy(std::string_view name) {
  if (name == "flip") return Strategy::kFlip;
  if (name == "det_flip") return Strategy::kDetFlip;
  if (name == "drop") return Strategy::kDrop;
  throw Error(ErrorCode::kConfigError,
              "unknown strategy '" + std::string(name) + "'");
}

LayerKind UpstreamKind(Strategy strategy) {
  switch (strategy) {
    case Strategy::kFlip: return LayerKind::kFlipout;
    case Strategy::kDetFlip: return LayerKind::kDeterministic;
    case Strategy::kDrop: return LayerKind::kDropout;
  }
  return LayerKind::kFlipout;
}

ToyNet PrepareTransferNet(const ToyNet& upstream, const Dataset& downstream,
                          Strategy strategy, const TrainConfig& cfg,
                          const TransferOptions& options) {
  upstream.Validate();
  if (upstream.input_dim() != static_cast<std::size_t>(downstream.x.cols())) {
    throw Error(ErrorCode::kDimMismatch,
                "upstream takes " + std::to_string(upstream.input_dim()) +
                    " inputs, downstream data has " +
                    std::to_string(downstream.x.cols()));
  }
  const LayerKind required = UpstreamKind(strategy);
  for (std::size_t i = 0; i < upstream.backbone_size(); ++i) {
    if (upstream.layers[i].kind() != required) {
      throw Error(ErrorCode::kStrategyMismatch,
                  std::string(StrategyName(strategy)) + " needs a " +
                      std::string(LayerKindName(required)) +
                      " backbone, layer " + std::to_string(i) + " is " +
                      std::string(LayerKindName(upstream.layers[i].kind())));
    }
  }

  ToyNet net;
  net.task = downstream.task;
  net.layers.assign(upstream.layers.begin(), upstream.layers.end() - 1);
  if (strategy == Strategy::kDetFlip) {
    net = MopedConvert(net, options.moped_delta, options.prior_sigma);
    net.task = downstream.task;
  }

  Rng head_rng = Rng(cfg.seed).Derive(kHeadInitOffset);
  const std::size_t in = net.layers.empty() ? upstream.input_dim()
                                            : net.layers.back().out_dim();
  const std::size_t classes = downstream.classes();
  if (strategy == Strategy::kDrop) {
    net.layers.push_back(MakeDropoutLayer(in, classes, Activation::kIdentity,
                                          options.head_dropout, head_rng));
  } else {
    net.layers.push_back(MakeFlipoutLayer(in, classes, Activation::kIdentity,
                                          head_rng));
  }
  for (auto& layer : net.layers) layer.frozen = false;
  net.Validate();
  return net;
}

TransferResult TransferTwoPhase(const ToyNet& upstream,
                                const Dataset& downstream, Strategy strategy,
                                const TrainConfig& cfg,
                                const TransferOptions& options) {
  cfg.Validate();
  TransferResult result;
  result.fixed_feature =
      PrepareTransferNet(upstream, downstream, strategy, cfg, options);

  result.fixed_feature.SetBackboneFrozen(true);
  TrainConfig phase1 = cfg;
  phase1.seed = cfg.seed + kPhase1Offset;
  result.phase1 = Train(result.fixed_feature, downstream, phase1);

  result.fine_tuned = result.fixed_feature;
  result.fine_tuned.SetBackboneFrozen(false);
  TrainConfig phase2 = cfg;
  phase2.learning_rate = cfg.learning_rate * kFineTuneLrFactor;
  phase2.seed = cfg.seed + kPhase2Offset;
  result.phase2 = Train(result.fine_tuned, downstream, phase2);
  return result;
}

ToyNet PretrainUpstream(Strategy strategy, const Dataset& upstream,
                        std::span<const std::size_t> hidden,
                        const TrainConfig& cfg,
                        const TransferOptions& options) {
  Rng init_rng = Rng(cfg.seed).Derive(kUpstreamInitOffset);
  const LayerKind kind = strategy == Strategy::kDrop ? LayerKind::kDropout
                                                     : LayerKind::kDeterministic;
  ToyNet net = BuildNet(kind, static_cast<std::size_t>(upstream.x.cols()),
                        hidden, upstream.classes(), upstream.task, init_rng,
                        Activation::kRelu, cfg.dropout_rate);
  TrainConfig train = cfg;
  train.seed = cfg.seed + kUpstreamTrainOffset;
  Train(net, upstream, train);
  if (strategy != Strategy::kFlip) return net;

  ToyNet variational =
      MopedConvert(net, options.moped_delta, options.prior_sigma);
  TrainConfig refine = cfg;
  refine.epochs = cfg.epochs / 2;
  refine.seed = cfg.seed + kUpstreamVariationalOffset;
  Train(variational, upstream, refine);
  return variational;
}

ToyNet TrainFromScratch(Strategy strategy, const Dataset& downstream,
                        std::span<const std::size_t> hidden,
                        const TrainConfig& cfg,
                        const TransferOptions& options) {
  Rng init_rng = Rng(cfg.seed).Derive(kScratchInitOffset);
  const LayerKind kind = TransferredKind(strategy);
  ToyNet net = BuildNet(kind, static_cast<std::size_t>(downstream.x.cols()),
                        hidden, downstream.classes(), downstream.task, init_rng,
                        Activation::kRelu, cfg.dropout_rate);
  if (kind == LayerKind::kDropout) {
    std::get<DropoutDense>(net.head().impl).rate = options.head_dropout;
  }
  TrainConfig train = cfg;
  train.epochs = 2 * cfg.epochs;
  train.seed = cfg.seed + kScratchTrainOffset;
  Train(net, downstream, train);
  return net;
}

}  // namespace uqkit
