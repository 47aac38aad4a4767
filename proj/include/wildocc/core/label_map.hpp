#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wildocc/core/types.hpp"

namespace wildocc {

/// Ordered semantic classes with ids contiguous from 1, the subset treated
/// as ground, and a raw-dataset-id remap table.
class LabelMap {
 public:
  LabelMap() = default;
  /// Throws kConfig if ids are not unique and contiguous from 1.
  LabelMap(std::vector<std::pair<ClassId, std::string>> classes,
           std::set<ClassId> ground, std::map<std::uint32_t, ClassId> remap = {});

  /// grass tree bush puddle mud barrier rubble; ground = grass puddle mud
  /// rubble; remap follows the RELLIS-3D ontology ids.
  static LabelMap default_map();

  int num_classes() const { return static_cast<int>(classes_.size()); }
  const std::vector<std::pair<ClassId, std::string>>& classes() const { return classes_; }
  const std::set<ClassId>& ground_classes() const { return ground_; }
  const std::map<std::uint32_t, ClassId>& remap_table() const { return remap_; }

  bool is_ground(ClassId c) const { return ground_.count(c) != 0; }
  bool is_valid(ClassId c) const {
    return c == kNoiseClass || (c >= 1 && c <= num_classes());
  }
  ClassId id_of(const std::string& name) const;
  const std::string& name_of(ClassId c) const;
  /// Raw dataset id to class id; unmappable ids become kNoiseClass.
  ClassId remap(std::uint32_t raw) const;

  void set_ground(std::set<ClassId> ground);

 private:
  std::vector<std::pair<ClassId, std::string>> classes_;
  std::set<ClassId> ground_;
  std::map<std::uint32_t, ClassId> remap_;
};

}  // namespace wildocc
