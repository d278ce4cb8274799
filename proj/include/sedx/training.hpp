// Mini-batch BPTT with RMSProp over enumerated windows.
#pragma once

#include "sedx/model.hpp"
#include "sedx/scaling.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sedx {

struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 0.002;
  int epochs = 40;
  std::uint64_t seed = 0;
  bool shuffle = true;
  /// Batch gradients are reduced in a fixed chunk order. deterministic=true
  /// uses a single chunk so results do not depend on `workers`.
  bool deterministic = true;
  int workers = 1;

  void validate() const;
};

/// Validation example with what is needed to score it in the original domain.
struct ValidationWindow {
  WindowExample window;  // scaled domain
  ChannelRange y_range;  // inverse scaling of the targets
  double mase_scale = 1; // copy-previous denominator of the sequence
};

struct TrainReport {
  std::vector<double> train_loss;  // mean per-window loss, per epoch
  std::vector<double> val_mase;    // per epoch; empty without validation windows
  std::vector<double> val_mape;    // NaN where no window has a defined MAPE
  int best_epoch = -1;             // 0-based; last epoch without validation
  double seconds = 0;

  /// Equality ignoring wall-clock time.
  bool same_numbers(const TrainReport& o) const;
};

struct TrainResult {
  SedxModel best;  // weights from the epoch with the lowest validation MASE
  SedxModel last;  // weights after the final epoch
  TrainReport report;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean loss over `batch` and the gradient of that mean, written to `grads`
/// (overwritten). Work is split into `chunks` contiguous slices whose
/// gradients are summed in slice order.
double batch_gradient(const SedxModel& model, const std::vector<const WindowExample*>& batch, SedxModel& grads,
                      int chunks = 1);

/// Mean original-domain MASE and MAPE (NaN when undefined everywhere) over `val`.
std::pair<double, double> validation_scores(const SedxModel& model, const std::vector<ValidationWindow>& val);

TrainResult train(const SedxModel& init, const std::vector<WindowExample>& windows,
                  const std::vector<ValidationWindow>& val, const TrainConfig& cfg);

}  // namespace sedx
