#pragma once

#include "afs/learner.hpp"

#include <string>

namespace afs {

// Which parameter groups a checkpoint carries.
enum class CheckpointPart { Attention, Learner, Both };

// Container layout: 8-byte magic "AFSCKPT1", little-endian u32 metadata
// length, UTF-8 JSON metadata (format version, config echo, ordered tensor
// table with shapes), tensor payload as little-endian 32-bit floats in the
// declared order, and a trailing little-endian u32 CRC-32 over everything
// before it. Writing is atomic (temp file + rename).
void save_checkpoint(const AfsModel& model, const std::string& path,
                     CheckpointPart part = CheckpointPart::Both);

// Metadata of a checkpoint without loading tensors. The config fields are
// meaningful only for the parts the file carries.
struct CheckpointInfo {
    bool has_attention = false;
    bool has_learner = false;
    AttentionConfig attention;
    LearnerConfig learner;
};

CheckpointInfo read_checkpoint_info(const std::string& path);

// Copies the requested part's tensors into the model. Every tensor of that
// part must be present with a matching shape, or a DataError names the
// offender. Loaded tensors get cleared gradients and Adam moments. Values
// round-trip exactly at float32 precision: load(save(model)) followed by
// another save reproduces the file byte for byte.
CheckpointInfo load_checkpoint(AfsModel& model, const std::string& path,
                               CheckpointPart part = CheckpointPart::Both);

} // namespace afs
