#include "emodis/evalkit/probe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "emodis/util/random.hpp"

namespace emodis::evalkit {

std::string probe_task_name(ProbeTask task) {
  switch (task) {
    case ProbeTask::kEmotionOnE: return "emotion_on_e";
    case ProbeTask::kSpeakerOnE: return "speaker_on_e";
    case ProbeTask::kSpeakerOnS: return "speaker_on_s";
    case ProbeTask::kEmotionOnS: return "emotion_on_s";
  }
  return "unknown";
}

nlohmann::json ProbeReport::to_json() const {
  return {{"task", probe_task_name(task)}, {"accuracy", accuracy}, {"chance", chance},
          {"n_train", n_train},            {"n_test", n_test},     {"n_classes", n_classes}};
}

namespace {

constexpr double kL2 = 1e-3;
constexpr int kMaxIterations = 200;

std::string class_label(std::int64_t label, const std::vector<std::string>& names) {
  if (label >= 0 && label < static_cast<std::int64_t>(names.size())) return names[static_cast<std::size_t>(label)];
  return std::to_string(label);
}

}  // namespace

ProbeReport fit_linear_probe(const torch::Tensor& embeddings, const std::vector<std::int64_t>& labels,
                             const std::vector<std::string>& uids, std::uint64_t split_seed, ProbeTask task,
                             const std::vector<std::string>& class_names) {
  if (embeddings.dim() != 2) throw std::invalid_argument("probe embeddings must be [N, D]");
  const auto n = embeddings.size(0);
  if (static_cast<std::int64_t>(labels.size()) != n || static_cast<std::int64_t>(uids.size()) != n) {
    throw std::invalid_argument("probe labels/uids do not match the embedding count");
  }

  std::map<std::int64_t, std::int64_t> counts;
  for (auto l : labels) {
    if (l < 0) throw std::invalid_argument("probe labels must be non-negative");
    ++counts[l];
  }
  for (const auto& [label, count] : counts) {
    if (count < kMinItemsPerClass) {
      throw std::invalid_argument("class '" + class_label(label, class_names) + "' has " + std::to_string(count) +
                                  " items; a probe needs at least " + std::to_string(kMinItemsPerClass));
    }
  }
  if (counts.size() < 2) throw std::invalid_argument("a probe needs at least two classes");

  // Group items by uid; a uid's class is the label of its first item.
  std::map<std::string, std::vector<std::int64_t>> by_uid;
  std::vector<std::string> uid_order;
  for (std::int64_t i = 0; i < n; ++i) {
    auto [it, inserted] = by_uid.try_emplace(uids[static_cast<std::size_t>(i)]);
    if (inserted) uid_order.push_back(it->first);
    it->second.push_back(i);
  }
  std::map<std::int64_t, std::vector<std::string>> uids_of_class;
  for (const auto& u : uid_order) uids_of_class[labels[static_cast<std::size_t>(by_uid[u].front())]].push_back(u);

  std::vector<std::int64_t> train_idx, test_idx;
  for (auto& [label, members] : uids_of_class) {
    util::Rng rng(util::mix_seed(split_seed, static_cast<std::uint64_t>(label)));
    for (std::size_t i = members.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1));
      std::swap(members[i - 1], members[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(kProbeTrainFraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& dst = i < n_train ? train_idx : test_idx;
      for (auto item : by_uid[members[i]]) dst.push_back(item);
    }
  }
  if (train_idx.empty() || test_idx.empty()) throw std::invalid_argument("probe split left an empty side");
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  // Dense class ids.
  std::map<std::int64_t, std::int64_t> dense;
  for (const auto& [label, count] : counts) dense.emplace(label, static_cast<std::int64_t>(dense.size()));
  const auto k = static_cast<std::int64_t>(dense.size());

  torch::NoGradGuard outer_guard;
  const auto x = embeddings.detach().to(torch::kFloat64);
  std::vector<std::int64_t> dense_labels(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) dense_labels[static_cast<std::size_t>(i)] = dense.at(labels[static_cast<std::size_t>(i)]);
  const auto y = torch::tensor(dense_labels, torch::kInt64);
  const auto tr = torch::tensor(train_idx, torch::kInt64);
  const auto te = torch::tensor(test_idx, torch::kInt64);

  auto x_train = x.index_select(0, tr);
  const auto mean = x_train.mean(0, true);
  const auto std = x_train.std(0, false, true).clamp_min(1e-6);
  x_train = (x_train - mean) / std;
  const auto x_test = (x.index_select(0, te) - mean) / std;
  const auto y_train = y.index_select(0, tr);
  const auto y_test = y.index_select(0, te);

  auto w = torch::zeros({x.size(1), k}, torch::kFloat64).requires_grad_(true);
  auto b = torch::zeros({k}, torch::kFloat64).requires_grad_(true);
  torch::optim::LBFGS opt({w, b}, torch::optim::LBFGSOptions(1.0).max_iter(kMaxIterations).line_search_fn("strong_wolfe"));
  auto closure = [&]() {
    torch::AutoGradMode enable(true);
    opt.zero_grad();
    auto loss = torch::nn::functional::cross_entropy(torch::addmm(b, x_train, w), y_train) + kL2 * w.pow(2).sum();
    loss.backward();
    return loss;
  };
  {
    torch::AutoGradMode enable(true);
    opt.step(closure);
  }
  const auto predicted = torch::addmm(b, x_test, w).argmax(1);

  ProbeReport r;
  r.task = task;
  r.accuracy = predicted.eq(y_test).to(torch::kFloat64).mean().item<double>();
  r.chance = 1.0 / static_cast<double>(k);
  r.n_train = static_cast<std::int64_t>(train_idx.size());
  r.n_test = static_cast<std::int64_t>(test_idx.size());
  r.n_classes = k;
  return r;
}

}  // namespace emodis::evalkit
