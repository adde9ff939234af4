"""Stability certificates for first-order optimizers.

Three routes to the same question, does replacing one training example
move the learned parameters:

- a direct quadratic-Lyapunov construction for the sector-tuned
  Nesterov method (lyapunov),
- an automated sector-IQC linear matrix inequality solved by a small
  projected-subgradient engine (iqc, sdp),
- coupled-run experiments measuring the gap empirically (data, losses,
  simulate).
"""

__version__ = "0.1.0"

from .optimizers import (  # noqa: F401
    HeavyBall,
    NagSmoothQuadratic,
    NagStandard,
    SectorBounds,
    Sgd,
    theta_of,
)
