"""Lipschitz function spaces on finite metric spaces and the Daugavet equation."""

from .daugavet import (DaugavetReport, DualFunctional, LinearOperator, LocalPairFailure,
                       LocalPairWitness, SliceResult, HullResult, daugavet_check, eval_functional,
                       extract_local_pair, hull_construction, op_norm, slice_test)
from .errors import (BadSpec, ConstantTooSmall, DaugavetError, InvalidMetric, NumericBreakdown,
                     PreconditionFailed, SetupViolation)
from .lipschitz import (GlueResult, GlueSetup, LipFunction, LocalityReport, PartialFunction,
                        adversarial_z_function, check_glue_setup, glue_flat, lip_norm,
                        locality_profile, mcshane_envelopes, nonlocality_witness)
from .lp import LpProblem, LpSolution, dual_norm, solve_lp
from .metric import (INFEASIBLE, GeodesicChain, MetricSpace, ZReport, generate_space,
                     geodesic_chain, line_net, validate_metric, z_deficiency)

__version__ = "0.1.0"
