"""Discrete laboratory for BIBO and LILO stability of linear system nodes."""

from .kernel import (GainValue, MatrixMeasure, convolve, delta, entry_tv, exponential,
                     induced_gain, laplace, lag_matrices, on_grid, transpose)
from .signals import TimeGrid, ValueSpace, Signal, lp_norm, pairing, u_epsilon
from .sysnode import (DiscreteSystemNode, delay_line, diagonal_exponential, dual, from_kernel,
                      impulse_response, left_shift_distributed_input, scalar_exponential,
                      simulate, transfer, transport_boundary_control)
from .stability import (GainReport, AdmissibilityReport, control_admissibility,
                        counterexample_sweep, empirical_gain, gain_bracket, kernel_gain,
                        observation_admissibility)
from .duality import (DualityReport, Verdict, bibo_to_lilo_check, catalogue,
                      lilo_to_bibo_check, pairing_identity_check, sweep_figure_one)

__version__ = '0.1.0'
