"""Numerical quantum Levy processes on finite-dimensional *-bialgebras.

The library covers the full pipeline at desk scale: validating bialgebra
descriptors, the convolution algebra of functionals and kernel maps,
generating functionals and their GNS triples, exact solutions of the
coalgebraic quantum stochastic differential equation, quantum random walks
with the exact rescaled-defect identity, and discrete Levy processes with
their axiom suite.

All operations are pure functions over immutable inputs; eigendecompositions
use a deterministic ordering, so results are reproducible across runs and
safe under concurrent evaluation.
"""

from .bialgebra import (Bialgebra, PositivityWitness, StateWitness, ValidationReport,
                        element_positive, function_algebra, functional_is_state,
                        group_algebra, load_descriptor, save_descriptor, validate)
from .cocycle import (CocycleSpec, IntegralCheck, StepFunction, associated_semigroup,
                      cocycle_matrix_element, constant_step, cp_gram_witness,
                      form_solution, l2_inner, phi_component, verify_cocycle_identity,
                      verify_integral_equation, zero_step)
from .convolution import (KernelMap, cb_norm_upper, choi_matrix, choi_min_eig,
                          conv_exp, convolve, convolve_kernel, counit_kernel,
                          e_functional, e_slice, functional_as_kernel,
                          hermitian_real_defect, kernel_power, r_lift, r_matrix)
from .errors import (BreakpointCollisionError, BudgetError, ChiNotCharacterError,
                     HorizonError, InconsistentPiError, NotAGroupError,
                     NotAnIsometryError, ParseError, PreconditionError, QlevyError,
                     ShapeError, StepTooLargeError)
from .levy import (AxiomReport, DiscreteLevyProcess, StateSemigroupReport,
                   classical_oracle_compare, classical_rate_matrix,
                   discrete_increment, semigroup_of_states, verify_wqlp_axioms)
from .schurmann import (Classification, GeneratingReport, ImplementingPair,
                        SchurmannTriple, assemble_structure_map, check_generating,
                        classify_generator, delta_qs, extract_implementing_pair,
                        gns_triple, triple_defects, verify_structure_relation)
from .walk import (ConvergenceRow, WalkScheme, build_walk_isometry,
                   build_walk_unitary, convergence_table, scaled_difference_identity,
                   walk_map, walk_matrix_element, walk_matrix_element_bruteforce,
                   walk_scheme)

__version__ = "0.1.0"
