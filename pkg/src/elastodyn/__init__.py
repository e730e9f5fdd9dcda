"""Physics-informed neural networks for dynamic linear elasticity.

Forward, inverse and surrogate solvers for 2D plane-strain and 3D
elastodynamics, trained from sparse field data plus scaled PDE residual
losses.  Manufactured plane-wave solutions serve as exact references.
"""

__version__ = "0.1.0"
