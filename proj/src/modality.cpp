#include "fedgraph/data/modality.hpp"

#include "fedgraph/errors.hpp"

namespace fedgraph::data {

const std::vector<ModalityInfo>& default_modalities() {
  static const std::vector<ModalityInfo> table = {
      {"act", 100.0, 3, false},
      {"acw", 100.0, 3, false},
      {"dc", 15.0, 192, true},
      {"pm", 15.0, 512, true},
  };
  return table;
}

const ModalityInfo& modality_info(const std::string& name) {
  for (const ModalityInfo& m : default_modalities())
    if (m.name == name) return m;
  throw SchemaError("unknown modality: " + name);
}

}  // namespace fedgraph::data
