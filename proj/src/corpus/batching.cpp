#include "emodis/corpus/batching.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "emodis/util/random.hpp"

namespace emodis::corpus {

namespace {

std::int64_t round_up(std::int64_t v, std::int64_t m) { return (v + m - 1) / m * m; }

struct Item {
  const std::string* uid;
  const PhoneSequence* phones;
  const MelSpectrogram* mel;
  int emotion;
  int speaker;
};

TrainingBatch collate_items(const std::vector<Item>& items, std::int64_t pad_multiple) {
  if (items.empty()) throw std::invalid_argument("cannot collate an empty batch");
  if (pad_multiple < 1) throw std::invalid_argument("pad_multiple must be >= 1");
  const auto batch = static_cast<std::int64_t>(items.size());
  std::int64_t max_l = 0;
  std::int64_t max_t = 0;
  const std::int64_t channels = items.front().mel->channels();
  for (const auto& it : items) {
    max_l = std::max<std::int64_t>(max_l, static_cast<std::int64_t>(it.phones->length()));
    max_t = std::max(max_t, it.mel->frames());
    if (it.mel->channels() != channels) throw std::invalid_argument("mixed channel counts in batch");
  }
  max_t = round_up(max_t, pad_multiple);

  TrainingBatch b;
  b.phones = torch::full({batch, max_l}, kPadSymbol, torch::kInt64);
  b.phone_lengths = torch::empty({batch}, torch::kInt64);
  b.mels = torch::zeros({batch, max_t, channels});
  b.mel_lengths = torch::empty({batch}, torch::kInt64);
  b.frame_mask = torch::zeros({batch, max_t});
  b.stop_targets = torch::zeros({batch, max_t});
  b.emotions = torch::empty({batch}, torch::kInt64);
  b.speakers = torch::empty({batch}, torch::kInt64);

  auto phones = b.phones.accessor<std::int64_t, 2>();
  auto mels = b.mels.accessor<float, 3>();
  auto mask = b.frame_mask.accessor<float, 2>();
  auto stop = b.stop_targets.accessor<float, 2>();
  for (std::int64_t i = 0; i < batch; ++i) {
    const auto& it = items[static_cast<std::size_t>(i)];
    b.uids.push_back(*it.uid);
    const auto l = static_cast<std::int64_t>(it.phones->length());
    for (std::int64_t j = 0; j < l; ++j) phones[i][j] = it.phones->symbols[static_cast<std::size_t>(j)];
    b.phone_lengths[i] = l;
    const auto t_len = it.mel->frames();
    for (std::int64_t t = 0; t < t_len; ++t) {
      for (std::int64_t c = 0; c < channels; ++c) mels[i][t][c] = it.mel->at(t, c);
      mask[i][t] = 1.0f;
    }
    for (std::int64_t t = std::max<std::int64_t>(t_len - 1, 0); t < max_t; ++t) stop[i][t] = 1.0f;
    b.mel_lengths[i] = t_len;
    b.emotions[i] = it.emotion;
    b.speakers[i] = it.speaker;
  }
  return b;
}

}  // namespace

std::pair<torch::Tensor, torch::Tensor> pad_mels(const std::vector<const MelSpectrogram*>& mels) {
  if (mels.empty()) throw std::invalid_argument("no mels to pad");
  std::int64_t t_max = 0;
  const auto c = mels.front()->channels();
  for (const auto* m : mels) {
    if (m->channels() != c) throw std::invalid_argument("mels differ in channel count");
    if (m->frames() < 1) throw std::invalid_argument("cannot pad an empty mel");
    t_max = std::max(t_max, m->frames());
  }
  auto x = torch::zeros({static_cast<std::int64_t>(mels.size()), t_max, c}, torch::kFloat32);
  auto lengths = torch::empty({static_cast<std::int64_t>(mels.size())}, torch::kInt64);
  for (std::size_t i = 0; i < mels.size(); ++i) {
    const auto* m = mels[i];
    auto src = torch::from_blob(const_cast<float*>(m->data().data()), {m->frames(), c}, torch::kFloat32);
    x[static_cast<std::int64_t>(i)].narrow(0, 0, m->frames()).copy_(src);
    lengths[static_cast<std::int64_t>(i)] = m->frames();
  }
  return {x, lengths};
}

TrainingBatch collate(const CorpusManifest& manifest, const std::vector<MelSpectrogram>& mels,
                      const std::vector<std::size_t>& items, std::int64_t pad_multiple) {
  std::vector<Item> rows;
  rows.reserve(items.size());
  for (auto idx : items) {
    const auto& u = manifest.utterances.at(idx);
    rows.push_back({&u.uid, &u.phones, &mels.at(idx), to_index(u.emotion), u.speaker});
  }
  return collate_items(rows, pad_multiple);
}

TrainingBatch single_item_batch(const PhoneSequence& phones, const MelSpectrogram& mel,
                                EmotionLabel emotion, int speaker, std::int64_t pad_multiple) {
  static const std::string kUid = "<single>";
  return collate_items({{&kUid, &phones, &mel, to_index(emotion), speaker}}, pad_multiple);
}

BatchStream::BatchStream(const CorpusManifest& manifest, const std::vector<MelSpectrogram>& mels,
                         std::vector<std::size_t> items, std::int64_t batch_size,
                         std::uint64_t shuffle_seed, std::int64_t pad_multiple, std::int64_t bucket_factor)
    : manifest_(&manifest), mels_(&mels), items_(std::move(items)), batch_size_(batch_size),
      shuffle_seed_(shuffle_seed), pad_multiple_(pad_multiple), bucket_factor_(bucket_factor) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (bucket_factor < 1) throw std::invalid_argument("bucket_factor must be >= 1");
  if (items_.empty()) throw std::invalid_argument("batch stream over an empty item set");
  if (batch_size_ > static_cast<std::int64_t>(items_.size())) {
    undersized_ = true;
    batch_size_ = static_cast<std::int64_t>(items_.size());
  }
}

std::vector<std::size_t> BatchStream::epoch_order(std::uint64_t epoch) const {
  std::vector<std::size_t> order = items_;
  util::Rng rng(util::mix_seed(shuffle_seed_, epoch));
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::int64_t BatchStream::batches_per_epoch() const {
  return (static_cast<std::int64_t>(items_.size()) + batch_size_ - 1) / batch_size_;
}

std::vector<std::vector<std::size_t>> BatchStream::epoch_batches(std::uint64_t epoch) const {
  auto order = epoch_order(epoch);
  const auto batch = static_cast<std::size_t>(batch_size_);
  if (bucket_factor_ > 1) {
    // Sort each pool of bucket_factor batches by length so batches pad less.
    const auto pool = batch * static_cast<std::size_t>(bucket_factor_);
    for (std::size_t begin = 0; begin < order.size(); begin += pool) {
      const auto end = std::min(order.size(), begin + pool);
      std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                       order.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         return (*mels_)[a].frames() < (*mels_)[b].frames();
                       });
    }
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t begin = 0; begin < order.size(); begin += batch) {
    const auto end = std::min(order.size(), begin + batch);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(begin), order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  if (bucket_factor_ > 1) {
    util::Rng rng(util::mix_seed(shuffle_seed_, epoch ^ 0x6275636bULL));
    for (std::size_t i = out.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1));
      std::swap(out[i - 1], out[j]);
    }
  }
  return out;
}

TrainingBatch BatchStream::batch_at(std::int64_t index) const {
  const auto per_epoch = batches_per_epoch();
  const auto epoch = static_cast<std::uint64_t>(index / per_epoch);
  const auto pos = static_cast<std::size_t>(index % per_epoch);
  auto b = collate(*manifest_, *mels_, epoch_batches(epoch)[pos], pad_multiple_);
  b.undersized = undersized_;
  return b;
}

std::vector<TrainingBatch> make_batches(const CorpusManifest& manifest,
                                        const std::vector<MelSpectrogram>& mels,
                                        std::int64_t batch_size, std::uint64_t shuffle_seed,
                                        std::int64_t pad_multiple) {
  std::vector<std::size_t> all(manifest.utterances.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  BatchStream stream(manifest, mels, std::move(all), batch_size, shuffle_seed, pad_multiple);
  std::vector<TrainingBatch> out;
  for (std::int64_t i = 0; i < stream.batches_per_epoch(); ++i) out.push_back(stream.batch_at(i));
  return out;
}

}  // namespace emodis::corpus
