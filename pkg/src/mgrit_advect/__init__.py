"""Matrix-free MGRIT solver for variable-wave-speed linear advection with
semi-Lagrangian discretizations and truncation-error-corrected coarse-grid
operators."""

from .core import (Grid1D, Grid2D, TimeGrid, WaveSpeed, get_wave_speed,
                   initial_condition, random_state, space_time_norm)
from .semi_lagrangian import (DepartureSet1D, DepartureSet2D, ErkScheme,
                              decompose, erk_departures, erk_scheme,
                              erk_trace_back, interp_weights, sl_step,
                              stencil_extents)
from .coarse_correction import (CorrectionField, GmresConfig,
                                apply_stencil_periodic, corrected_coarse_step,
                                derivative_stencil, f_eval,
                                forward_euler_coarse_step, gmres_solve,
                                phi_field, phi_vector, sigma_accumulate,
                                stencil_symbol)
from .backtracking import backtrack_1d, backtrack_2d, backtracked_departures
from .mgrit import (ConvergenceReport, Level, SolverConfig, build_hierarchy,
                    c_relax, f_relax, residual, sequential_reference, solve,
                    v_cycle)
from .fourier import (coarse_symbol, corrected_symbol, forward_euler_symbol,
                      phi_scalar, rho_estimate, sl_symbol)
from .oracle import (OrderFit, exact_departures, fit_order, ideal_coarse_step,
                     measure_ideal_gap, trace_back_exact)

__version__ = "1.0.0"
