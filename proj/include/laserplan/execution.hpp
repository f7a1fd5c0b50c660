#pragma once

namespace laserplan {

/// Sequential runs use the serial reference kernels and are bit-reproducible;
/// Parallel runs use the OpenMP kernels, whose reductions may reassociate.
enum class ExecutionPolicy { Sequential, Parallel };

/// Threads available to the OpenMP kernels (1 without OpenMP).
int max_threads();

}  // namespace laserplan
