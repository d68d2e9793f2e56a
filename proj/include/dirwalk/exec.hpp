#pragma once

namespace dirwalk {

// Execution policy for the grid-evaluation kernels.  Exec::serial is the
// reference implementation; Exec::parallel distributes grid points across
// OpenMP threads.  Both produce identical output: per-point results are
// written to independent slots and any reduction is performed serially.
enum class Exec { serial, parallel };

}  // namespace dirwalk
