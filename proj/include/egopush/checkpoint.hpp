#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egopush/nets.hpp"

namespace egopush {

// Versioned binary container of named parameter tensors plus the config
// hash they were trained under. Loading refuses on hash mismatch unless
// forced.
void save_checkpoint(const std::string& path,
                     const std::vector<const Tensor*>& tensors,
                     std::uint64_t config_hash);

inline void save_checkpoint(const std::string& path,
                            const std::vector<Tensor*>& tensors,
                            std::uint64_t config_hash) {
  save_checkpoint(path,
                  std::vector<const Tensor*>(tensors.begin(), tensors.end()),
                  config_hash);
}

void load_checkpoint(const std::string& path,
                     const std::vector<Tensor*>& tensors,
                     std::uint64_t expected_hash, bool force = false);

std::uint64_t checkpoint_hash(const std::string& path);

}  // namespace egopush
