#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <torch/torch.h>

#include "emodis/corpus/manifest.hpp"

namespace emodis::corpus {

// Padded training batch. Padding positions carry zeros and are excluded from
// every loss through `frame_mask`.
struct TrainingBatch {
  std::vector<std::string> uids;
  torch::Tensor phones;         // [B, L] int64, padded with kPadSymbol
  torch::Tensor phone_lengths;  // [B] int64
  torch::Tensor mels;           // [B, T, C] float32
  torch::Tensor mel_lengths;    // [B] int64
  torch::Tensor frame_mask;     // [B, T] float32, 1 on real frames
  torch::Tensor stop_targets;   // [B, T] float32, 1 from the last real frame on
  torch::Tensor emotions;       // [B] int64 (y_i)
  torch::Tensor speakers;       // [B] int64 (l_i)
  // Set when the requested batch size exceeded the item count.
  bool undersized = false;

  std::int64_t size() const { return static_cast<std::int64_t>(uids.size()); }
};

// Zero-padded [B, T, C] stack of mels and their lengths [B].
std::pair<torch::Tensor, torch::Tensor> pad_mels(const std::vector<const MelSpectrogram*>& mels);

// Collates the given corpus items; T is rounded up to a multiple of pad_multiple.
TrainingBatch collate(const CorpusManifest& manifest, const std::vector<MelSpectrogram>& mels,
                      const std::vector<std::size_t>& items, std::int64_t pad_multiple = 1);

// Single-utterance convenience batch (used at inference and evaluation).
TrainingBatch single_item_batch(const PhoneSequence& phones, const MelSpectrogram& mel,
                                EmotionLabel emotion, int speaker, std::int64_t pad_multiple = 1);

// Deterministic epoch-wise shuffling over a subset of manifest items. The
// order of epoch k is a pure function of (shuffle_seed, k).
class BatchStream {
 public:
  BatchStream(const CorpusManifest& manifest, const std::vector<MelSpectrogram>& mels,
              std::vector<std::size_t> items, std::int64_t batch_size, std::uint64_t shuffle_seed,
              std::int64_t pad_multiple = 1, std::int64_t bucket_factor = 1);

  std::vector<std::size_t> epoch_order(std::uint64_t epoch) const;
  // Item indices of every batch of an epoch. With bucket_factor > 1, pools of
  // that many batches are length-sorted before splitting and the resulting
  // batches are shuffled again.
  std::vector<std::vector<std::size_t>> epoch_batches(std::uint64_t epoch) const;
  std::int64_t batches_per_epoch() const;

  // Batch `index` of the infinite stream (epoch = index / batches_per_epoch).
  TrainingBatch batch_at(std::int64_t index) const;
  TrainingBatch next() { return batch_at(cursor_++); }
  void seek(std::int64_t index) { cursor_ = index; }

  bool undersized() const { return undersized_; }

 private:
  const CorpusManifest* manifest_;
  const std::vector<MelSpectrogram>* mels_;
  std::vector<std::size_t> items_;
  std::int64_t batch_size_;
  std::uint64_t shuffle_seed_;
  std::int64_t pad_multiple_;
  std::int64_t bucket_factor_;
  std::int64_t cursor_ = 0;
  bool undersized_ = false;
};

// All manifest items in one epoch order, split into batches.
std::vector<TrainingBatch> make_batches(const CorpusManifest& manifest,
                                        const std::vector<MelSpectrogram>& mels,
                                        std::int64_t batch_size, std::uint64_t shuffle_seed,
                                        std::int64_t pad_multiple = 1);

}  // namespace emodis::corpus
