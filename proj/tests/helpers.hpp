#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "emodis/corpus/generator.hpp"
#include "emodis/trainer/config.hpp"

namespace emodis::testing {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("emodis_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 1 target x 12 neutral_T, 2 sources x 7 emotions x 2, short sentences.
inline corpus::CorpusSpec tiny_spec() {
  auto spec = corpus::default_corpus_spec();
  for (auto& s : spec.speakers) s.utterances_per_emotion = s.role == corpus::SpeakerRole::kTarget ? 12 : 2;
  spec.min_phones = 2;
  spec.max_phones = 4;
  return spec;
}

// Narrow model so unit tests run in seconds.
inline trainer::TrainConfig tiny_config() {
  trainer::TrainConfig cfg;
  auto& b = cfg.model.backbone;
  b.symbol_dim = 32;
  b.encoder_prenet_dim = 32;
  b.cbhg_dim = 16;
  b.cbhg_bank_size = 4;
  b.highway_layers = 1;
  b.encoder_dim = 32;
  b.decoder_prenet_dim = 32;
  b.attention_rnn_dim = 32;
  b.decoder_rnn_dim = 32;
  b.attention_hidden_dim = 16;
  b.postnet_channels = 16;
  b.postnet_layers = 3;
  b.speaker_table_dim = 128;
  cfg.model.reference.conv_channels = {4, 4, 8, 8, 8, 8};
  cfg.model.reference.gru_dim = 16;
  cfg.model.reference.fc_dim = 32;
  cfg.batch_size = 4;
  cfg.warmup_steps = 2;
  cfg.log_interval = 1;
  cfg.save_interval = 1000;
  return cfg;
}

}  // namespace emodis::testing
