#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lift5/field.hpp"

namespace lift5 {

// Contents of one SWRL1 container: a shared grid, a time stamp and named fields.
struct FieldBundle {
  GridPtr grid;
  double time = 0.0;
  std::vector<std::pair<std::string, ScalarFieldRZ>> fields;

  const ScalarFieldRZ& get(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_swrl(const std::string& path, const FieldBundle& bundle);
FieldBundle read_swrl(const std::string& path);
// Reads and checks that the stored grid matches `expected`.
FieldBundle read_swrl(const std::string& path, const HalfPlaneGrid& expected);

std::vector<unsigned char> encode_swrl(const FieldBundle& bundle);
FieldBundle decode_swrl(const std::vector<unsigned char>& bytes);

}  // namespace lift5
