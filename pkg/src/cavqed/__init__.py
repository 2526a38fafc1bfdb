"""Driven cavity-QED simulations in truncated Fock space.

A two-level atom coupled to one or two cavity modes under one or two
classical drives, with the engineered effective interactions that setup
supports (pair creation, photon exchange, single-mode squeezing,
conditional squeezing, anti-Jaynes-Cummings and pulsed JC/AJC
schedules), closed Schrodinger and open Lindblad propagation, squeezing
readout, and a config-driven CLI that writes deterministic CSV curves.
"""

from .algebra import (Atom, HilbertSpace, Mode, Operator, State, atom_space,
                      basis_vector, coherent_vector, expectation, identity,
                      mode_annihilation, partial_trace, product_state,
                      single_mode_space, space_of, vacuum_state)
from .backends import available_backends, get_kernels
from .config import (CSV_COLUMNS, ScenarioConfig, load_scenario_file,
                     load_scenario_text)
from .dynamics import (FRAME_INSENSITIVE_COLUMNS, IntegratorConfig,
                       Trajectory, align_frames, check_frame_comparison,
                       evolve_lindblad, evolve_schrodinger)
from .effective import (EffectiveCoupling, PiecewiseHamiltonian,
                        PulseSchedule, build_ajc_hamiltonian,
                        build_effective_hamiltonian, build_pulsed_jc_ajc,
                        build_sss_hamiltonian, derive_effective_numeric,
                        pdc_coupling, puc_coupling, squeeze_coupling)
from .errors import (AmbiguousResonanceError, CavqedError, ConfigurationError,
                     DimensionError, NumericalFailure, RegimeValidityError,
                     SingularCouplingError, SpaceMismatchError)
from .model import (HarmonicHamiltonian, Regime, SystemParams,
                    build_interaction_picture, build_lab_hamiltonian,
                    build_laser_frame, build_space, classify_regime,
                    dressed_operators, regime_candidates)
from .observables import (QuadratureResult, atom_excited_population,
                          basis_population, fidelity, min_quadrature_variance,
                          photon_number, populations, purity,
                          quadrature_from_moments, quadrature_variance,
                          truncation_tail)
from .runner import (CompareReport, RunResult, SweepReport, compare_runs,
                     convergence_sweep, derive_effective_report, read_csv,
                     run_scenario, write_csv)
from .scenarios import list_scenarios, load_scenario

__version__ = "0.1.0"
