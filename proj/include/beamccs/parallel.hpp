#pragma once

namespace beamccs {

/// Number of worker threads OpenMP will use (1 when built without OpenMP).
int max_threads();

/// Caps the OpenMP team size. n <= 0 resets to the hardware default.
/// Results are bit-identical for any thread count; this only trades speed.
void set_num_threads(int n);

}  // namespace beamccs
