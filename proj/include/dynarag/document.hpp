#pragma once

#include <string>

namespace dynarag {

struct Document {
  int doc_id = 0;
  std::string text;
  bool operator==(const Document&) const = default;
};

}  // namespace dynarag
