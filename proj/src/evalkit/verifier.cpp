#include "emodis/evalkit/verifier.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "emodis/backbone/text_encoder.hpp"
#include "emodis/corpus/batching.hpp"
#include "emodis/util/random.hpp"

namespace emodis::evalkit {

namespace {

constexpr std::int64_t kChannels = 128;
constexpr std::int64_t kEmbedding = 64;
constexpr std::int64_t kBatch = 32;
constexpr std::int64_t kChunk = 64;

std::pair<torch::Tensor, torch::Tensor> pad(const std::vector<const corpus::MelSpectrogram*>& mels) {
  return corpus::pad_mels(mels);
}

}  // namespace

SpeakerVerifierImpl::SpeakerVerifierImpl(std::int64_t mel_channels, std::int64_t n_speakers) {
  auto conv = [](std::int64_t in, std::int64_t out) {
    return torch::nn::Conv1d(torch::nn::Conv1dOptions(in, out, 5).padding(2));
  };
  conv1_ = register_module("conv1", conv(mel_channels, kChannels));
  conv2_ = register_module("conv2", conv(kChannels, kChannels));
  conv3_ = register_module("conv3", conv(kChannels, kChannels));
  hidden_ = register_module("hidden", torch::nn::Linear(kChannels, kEmbedding));
  out_ = register_module("out", torch::nn::Linear(kEmbedding, n_speakers));
}

torch::Tensor SpeakerVerifierImpl::embed(const torch::Tensor& mels, const torch::Tensor& lengths) {
  auto x = backbone::mask_time(mels.transpose(1, 2), lengths);
  x = backbone::mask_time(torch::relu(conv1_(x)), lengths);
  x = backbone::mask_time(torch::relu(conv2_(x)), lengths);
  x = backbone::mask_time(torch::relu(conv3_(x)), lengths);
  const auto pooled = x.sum(2) / lengths.to(x.dtype()).unsqueeze(1);
  return torch::relu(hidden_(pooled));
}

torch::Tensor SpeakerVerifierImpl::forward(const torch::Tensor& mels, const torch::Tensor& lengths) {
  return out_(embed(mels, lengths));
}

nlohmann::json VerifierReport::to_json() const {
  return {{"heldout_accuracy", heldout_accuracy}, {"n_train", n_train}, {"n_heldout", n_heldout}, {"steps", steps}};
}

Verifier Verifier::train(const corpus::CorpusManifest& manifest, const std::vector<corpus::MelSpectrogram>& mels,
                         std::uint64_t seed, std::int64_t epochs) {
  if (mels.size() != manifest.utterances.size()) throw std::invalid_argument("mels do not match the manifest");
  if (manifest.utterances.empty()) throw std::invalid_argument("cannot train a verifier on an empty corpus");
  std::map<int, std::vector<std::size_t>> by_speaker;
  for (std::size_t i = 0; i < manifest.utterances.size(); ++i) by_speaker[manifest.utterances[i].speaker].push_back(i);
  std::vector<std::size_t> train_items, heldout_items;
  for (auto& [spk, items] : by_speaker) {
    util::Rng rng(util::mix_seed(seed, static_cast<std::uint64_t>(spk)));
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
    }
    const auto n_train = std::max<std::size_t>(1, items.size() * 4 / 5);
    for (std::size_t i = 0; i < items.size(); ++i) (i < n_train ? train_items : heldout_items).push_back(items[i]);
  }
  if (heldout_items.empty()) throw std::invalid_argument("corpus too small to hold out verifier items");

  torch::manual_seed(util::mix_seed(seed, 0x76657269ULL));
  Verifier v;
  v.net_ = SpeakerVerifier(mels.front().channels(), static_cast<std::int64_t>(manifest.speakers.size()));
  torch::optim::Adam opt(v.net_->parameters(), torch::optim::AdamOptions(1e-3));
  v.net_->train();
  util::Rng order_rng(util::mix_seed(seed, 0x6f726472ULL));
  for (std::int64_t epoch = 0; epoch < epochs; ++epoch) {
    auto order = train_items;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(order_rng.integer(0, static_cast<std::int64_t>(i) - 1))]);
    }
    for (std::size_t begin = 0; begin < order.size(); begin += kBatch) {
      const auto end = std::min(order.size(), begin + static_cast<std::size_t>(kBatch));
      std::vector<const corpus::MelSpectrogram*> batch;
      std::vector<std::int64_t> labels;
      for (auto i = begin; i < end; ++i) {
        batch.push_back(&mels[order[i]]);
        labels.push_back(manifest.utterances[order[i]].speaker);
      }
      auto [x, len] = pad(batch);
      opt.zero_grad();
      auto loss = torch::nn::functional::cross_entropy(v.net_->forward(x, len), torch::tensor(labels, torch::kInt64));
      loss.backward();
      opt.step();
      ++v.report_.steps;
    }
  }
  v.net_->eval();
  v.trained_ = true;

  std::int64_t correct = 0;
  {
    torch::NoGradGuard no_grad;
    for (std::size_t begin = 0; begin < heldout_items.size(); begin += kChunk) {
      const auto end = std::min(heldout_items.size(), begin + static_cast<std::size_t>(kChunk));
      std::vector<const corpus::MelSpectrogram*> batch;
      std::vector<std::int64_t> labels;
      for (auto i = begin; i < end; ++i) {
        batch.push_back(&mels[heldout_items[i]]);
        labels.push_back(manifest.utterances[heldout_items[i]].speaker);
      }
      auto [x, len] = pad(batch);
      correct += v.net_->forward(x, len).argmax(1).eq(torch::tensor(labels, torch::kInt64)).sum().item<std::int64_t>();
    }
  }
  v.report_.n_train = static_cast<std::int64_t>(train_items.size());
  v.report_.n_heldout = static_cast<std::int64_t>(heldout_items.size());
  v.report_.heldout_accuracy = static_cast<double>(correct) / static_cast<double>(heldout_items.size());
  return v;
}

torch::Tensor Verifier::embed(const std::vector<corpus::MelSpectrogram>& mels) const {
  std::vector<const corpus::MelSpectrogram*> ptrs;
  for (const auto& m : mels) ptrs.push_back(&m);
  return embed(ptrs);
}

torch::Tensor Verifier::embed(const std::vector<const corpus::MelSpectrogram*>& mels) const {
  if (!trained_) throw std::logic_error("verifier is untrained");
  if (mels.empty()) return torch::zeros({0, kEmbedding});
  torch::NoGradGuard no_grad;
  std::vector<torch::Tensor> parts;
  auto net = net_;
  for (std::size_t begin = 0; begin < mels.size(); begin += kChunk) {
    const auto end = std::min(mels.size(), begin + static_cast<std::size_t>(kChunk));
    std::vector<const corpus::MelSpectrogram*> batch(mels.begin() + static_cast<std::ptrdiff_t>(begin),
                                                     mels.begin() + static_cast<std::ptrdiff_t>(end));
    auto [x, len] = pad(batch);
    parts.push_back(net->embed(x, len));
  }
  return torch::cat(parts, 0);
}

}  // namespace emodis::evalkit
