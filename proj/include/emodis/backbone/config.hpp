#pragma once

#include <cstdint>

#include <json.hpp>

#include "emodis/corpus/phones.hpp"

namespace emodis::backbone {

// Desk-scale Tacotron-style sizes.
struct BackboneConfig {
  std::int64_t n_symbols = corpus::kNumSymbols + 1;  // + padding row
  std::int64_t mel_channels = 80;
  std::int64_t reduction = 2;
  std::int64_t symbol_dim = 256;
  std::int64_t encoder_prenet_dim = 256;
  std::int64_t cbhg_dim = 128;
  std::int64_t cbhg_bank_size = 8;
  std::int64_t highway_layers = 4;
  std::int64_t encoder_dim = 256;  // bidirectional GRU output
  std::int64_t emotion_dim = 256;
  std::int64_t speaker_table_dim = 128;
  std::int64_t n_speakers = 3;
  std::int64_t decoder_prenet_dim = 128;
  std::int64_t attention_rnn_dim = 256;
  std::int64_t decoder_rnn_dim = 256;
  std::int64_t attention_hidden_dim = 128;
  std::int64_t gmm_components = 5;
  std::int64_t postnet_channels = 128;
  std::int64_t postnet_kernel = 5;
  std::int64_t postnet_layers = 5;
  double dropout = 0.5;

  std::int64_t memory_dim() const { return encoder_dim + emotion_dim; }

  bool operator==(const BackboneConfig&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    BackboneConfig, n_symbols, mel_channels, reduction, symbol_dim, encoder_prenet_dim, cbhg_dim,
    cbhg_bank_size, highway_layers, encoder_dim, emotion_dim, speaker_table_dim, n_speakers,
    decoder_prenet_dim, attention_rnn_dim, decoder_rnn_dim, attention_hidden_dim, gmm_components,
    postnet_channels, postnet_kernel, postnet_layers, dropout)

}  // namespace emodis::backbone
