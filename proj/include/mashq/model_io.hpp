#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mashq/hmm.hpp"

namespace mashq {

// Contents of one `MSHMM v1` text file. Any of the sections may be absent;
// the anchors section is written whenever `anchors` is non-empty.
struct ModelFile {
  std::optional<Codebook> codebook;
  std::optional<DiscreteHMM> hmm;
  std::vector<int> anchors;
  std::vector<std::string> labels;
};

// Values are written with 17 significant digits, so parse followed by
// format reproduces the input bytes exactly.
std::string format_model_file(const ModelFile& file);
ModelFile parse_model_file(std::string_view text);

ModelFile read_model_file(const std::string& path);
void write_model_file(const ModelFile& file, const std::string& path);

}  // namespace mashq
