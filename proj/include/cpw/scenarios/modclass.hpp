#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "cpw/random.hpp"
#include "cpw/scenarios/channel.hpp"
#include "cpw/types.hpp"

namespace cpw::scenarios {

/// Unit-energy constellation of a named modulation: BPSK, QPSK, 8PSK or
/// 16QAM. Throws ConfigError for any other name.
Constellation modulation_constellation(const std::string& name);

struct ModclassConfig {
  std::vector<std::string> modulations{"BPSK", "QPSK", "8PSK", "16QAM"};
  std::size_t sequence_length = 16;  // L symbols per example
  double snr = 1.0;                  // linear; +inf means noiseless
  std::size_t num_examples = 100;

  void validate() const;
};

/// Labelled IQ sequences flattened to 2L reals (I0, Q0, I1, Q1, ...). All
/// examples share one sampled ChannelState; labels cycle through the
/// modulations (so counts differ by at most one) and are then shuffled.
Dataset gen_modclass_dataset(const ModclassConfig& config, Rng& rng);

/// Raw corpus: `<stem>.f32` holds num_examples * example_len little-endian
/// 32-bit floats; `<stem>.json` holds {num_examples, example_len, labels,
/// label_names}.
struct ModCorpus {
  Dataset examples;
  std::size_t example_len = 0;
  std::vector<std::string> label_names;
};

void write_corpus(const std::filesystem::path& stem, const ModCorpus& corpus);
/// Throws DataError on a missing file, a malformed sidecar, a size mismatch
/// or a label outside label_names.
ModCorpus load_corpus(const std::filesystem::path& stem);

}  // namespace cpw::scenarios
