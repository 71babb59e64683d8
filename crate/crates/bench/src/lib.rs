//! Criterion benchmarks for the quadrature, eigensolve and branch-tracking kernels; see `benches/`.
