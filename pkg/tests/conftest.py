from elastodyn import runtime

# tiny per-step matrices: BLAS fan-out is pure overhead and breaks
# run-to-run determinism timing; all tests run single-threaded
runtime.set_threads(1)
