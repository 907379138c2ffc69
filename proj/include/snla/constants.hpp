#pragma once

// Every constant hidden behind an O(·) lives here.
namespace snla::constants {

// Failure probability used where a theorem asks for "constant success probability".
inline constexpr double kConstantDelta = 0.1;

// boosting: t = ⌈c·log2(1/δ)⌉ candidate embeddings
inline constexpr double kBoostTrials = 3.0;

// leverage_approx: Gaussian width t = ⌈c·ln n / γ²⌉
inline constexpr double kLeverageWidth = 1.0;

// sketch_solve_l2: r = c·d²/ε
inline constexpr double kSketchSolveRows = 1.0;

// precond_solve_l2: accuracy of the preconditioning sketch
inline constexpr double kPrecondEps0 = 0.5;

// Cauchy embedding rows r = ⌈c·d·ln d⌉ (at least d+1)
inline constexpr double kCauchyRows = 2.0;
// dilation exponent c₁ of the Cauchy embedding
inline constexpr double kCauchyDilationExp = 2.0;
// exponential embedding rows r = ⌈c·d·ln²(d+1)⌉
inline constexpr double kExpRows = 2.0;
// l1 probabilities: Gaussian width t = ⌈c·ln n⌉
inline constexpr double kL1Width = 6.0;
// l1 expected sample count r = ⌈c·d^2.5/(ζ·ε²)⌉, ζ = 1/(4d)
inline constexpr double kL1Rows = 1.0 / 16.0;

// power method q = ⌈c·ln(mn)/ε⌉
inline constexpr double kPowerIters = 4.0;

// CUR leverage stage s = ⌈c·k·ln(k+1)⌉
inline constexpr double kCurLeverageSamples = 10.0;
// CUR adaptive stage c₂ = ⌈c·k/ε⌉
inline constexpr double kCurAdaptive = 270.0;
// CUR Z accuracy
inline constexpr double kCurZeps = 1.0 / 9.0;
// Gaussian length-squares estimator width t = ⌈c·ln n⌉
inline constexpr double kLengthSquaresWidth = 6.0;

// sparsifier samples s = ⌈c·n·ln n/ε²⌉
inline constexpr double kSparsifierSamples = 3.0;

// Schatten probes r = ⌈c/ε²⌉
inline constexpr double kSchattenProbes = 40.0;

}  // namespace snla::constants
