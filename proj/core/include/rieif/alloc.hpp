#pragma once

namespace rieif {

/// Keeps the large per-batch tape buffers on the heap instead of fresh page mappings.
/// glibc only; a no-op elsewhere. Call once at program start.
void tune_allocator();

}  // namespace rieif
