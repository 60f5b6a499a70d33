#ifndef UQKIT_TRANSFER_H_
#define UQKIT_TRANSFER_H_

#include <span>
#include <string_view>
#include <vector>

#include "uqkit/network.h"
#include "uqkit/training.h"

namespace uqkit {

// flip:     Flipout backbone, new Flipout head.
// det_flip: deterministic backbone converted with MOPED, new Flipout head.
// drop:     MC-dropout backbone, new MC-dropout head.
enum class Strategy { kFlip, kDetFlip, kDrop };

std::string_view StrategyName(Strategy strategy);
Strategy ParseStrategy(std::string_view name);

inline constexpr double kDefaultMopedDelta = 0.5;
inline constexpr double kDefaultHeadDropout = 0.5;
inline constexpr double kFineTuneLrFactor = 0.1;

struct TransferOptions {
  double moped_delta = kDefaultMopedDelta;
  double prior_sigma = 1.0;
  double head_dropout = kDefaultHeadDropout;
};

// Backbone layer kind the upstream net must have for `strategy`.
LayerKind UpstreamKind(Strategy strategy);

// Upstream backbone (converted if needed) plus a freshly initialised head
// sized for the downstream task. Throws kDimMismatch / kStrategyMismatch.
ToyNet PrepareTransferNet(const ToyNet& upstream, const Dataset& downstream,
                          Strategy strategy, const TrainConfig& cfg,
                          const TransferOptions& options = {});

struct TransferResult {
  ToyNet fixed_feature;  // after phase 1 (frozen backbone)
  ToyNet fine_tuned;     // after phase 2 (all layers, lr / 10)
  TrainResult phase1;
  TrainResult phase2;
};

// Phase 1 trains the head for cfg.epochs at cfg.learning_rate with the
// backbone frozen. Phase 2 unfreezes everything and trains for the same
// number of epochs at a tenth of the rate with fresh Adam moments.
TransferResult TransferTwoPhase(const ToyNet& upstream,
                                const Dataset& downstream, Strategy strategy,
                                const TrainConfig& cfg,
                                const TransferOptions& options = {});

// Builds and trains the upstream network a strategy expects. det_flip and
// flip both start from a deterministic net; flip additionally converts it
// with MOPED and keeps training it as a Flipout net for `cfg.epochs / 2`.
ToyNet PretrainUpstream(Strategy strategy, const Dataset& upstream,
                        std::span<const std::size_t> hidden,
                        const TrainConfig& cfg,
                        const TransferOptions& options = {});

// Same architecture as the transferred net, randomly initialised and trained
// on the downstream data for 2 * cfg.epochs at cfg.learning_rate.
ToyNet TrainFromScratch(Strategy strategy, const Dataset& downstream,
                        std::span<const std::size_t> hidden,
                        const TrainConfig& cfg,
                        const TransferOptions& options = {});

}  // namespace uqkit

#endif  // UQKIT_TRANSFER_H_
