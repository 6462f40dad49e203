"""Verification and falsification of rectifier-network barrier certificates.

The package takes a small feedforward network with rectifier activations
whose scalar output h defines a candidate invariant set {h >= 0} for a
continuous-time system x' = f(x), enumerates the linear regions crossed by
the zero level set, and decides — per region, by linear programming,
interval branch-and-bound, and local falsification search — whether the
certificate conditions hold, producing witnesses or exportable SMT-LIB
queries when they do not.
"""

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, VerifierConfig
from .errors import (CombinatorialBlowup, DimensionMismatch, DomainError,
                     ExpressionError, ExpressionSyntaxError,
                     InfeasiblePolyhedron, MalformedProblem, MissingField,
                     NoRegions, NumericalFailure, OracleTooLarge,
                     ProblemFormatError, RelubarrierError, SamplerExhausted,
                     SearchExhausted, UnknownIdentifier, UnsupportedDimension,
                     VariableOutOfRange)
from .linprog import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpOutcome, LpProblem,
                      lp_feasible, lp_solve, matrix_rank)
from .expressions import (DynamicsSystem, Interval, evaluate,
                          interval_evaluate, is_affine, parse_expression,
                          to_text)
from .network import (ActivationIndicator, CandidateIndicator, RegionAffine,
                      ReluNetwork, expand_candidate, load_network,
                      network_from_json, network_to_json)
from .geometry import (Polyhedron, SlicePolyhedron, bounding_box, dimension,
                       hyperplane_slice, implicit_equalities, remove_redundant)
from .regions import (EnumerationResult, RegionValidity, ValidRegion,
                      boundary_is_connected, boundary_propagation,
                      brute_force_valid_regions, build_valid_region,
                      find_initial_region, set_guided_sampler,
                      slices_intersect, valid_test)
from .conditions import (FALSIFIED, UNKNOWN, VERIFIED, CertificateVerdict,
                         ConditionResult, RegionVerdict, check_initial_condition,
                         check_invariance, check_region_affine,
                         check_unsafe_condition, falsify_region,
                         verify_certificate, verify_region_bab)
from .smtlib import (SmtQuery, export_invariance, export_set_condition,
                     expr_to_smt, format_number)
from .problem import (EXIT_FAILURE, EXIT_FALSIFIED, EXIT_UNKNOWN,
                      EXIT_VERIFIED, LoadedProblem, ProblemSpec, build_report,
                      exit_code, load_problem, report_bytes_without_timings,
                      write_report)

__all__ = [
    "__version__",
    "VerifierConfig", "DEFAULT_CONFIG",
    "RelubarrierError", "MalformedProblem", "NumericalFailure",
    "DimensionMismatch", "CombinatorialBlowup", "InfeasiblePolyhedron",
    "OracleTooLarge", "SearchExhausted", "NoRegions", "SamplerExhausted",
    "ExpressionError", "ExpressionSyntaxError", "UnknownIdentifier",
    "VariableOutOfRange", "DomainError", "ProblemFormatError", "MissingField",
    "UnsupportedDimension",
    "LpProblem", "LpOutcome", "lp_solve", "lp_feasible", "matrix_rank",
    "OPTIMAL", "INFEASIBLE", "UNBOUNDED",
    "parse_expression", "evaluate", "interval_evaluate", "Interval",
    "to_text", "DynamicsSystem", "is_affine",
    "ReluNetwork", "ActivationIndicator", "CandidateIndicator", "RegionAffine",
    "expand_candidate", "network_from_json", "network_to_json", "load_network",
    "Polyhedron", "SlicePolyhedron", "hyperplane_slice",
    "implicit_equalities", "dimension", "remove_redundant", "bounding_box",
    "valid_test", "build_valid_region", "ValidRegion", "RegionValidity",
    "EnumerationResult", "set_guided_sampler", "find_initial_region",
    "boundary_propagation", "brute_force_valid_regions", "slices_intersect",
    "boundary_is_connected",
    "VERIFIED", "FALSIFIED", "UNKNOWN", "RegionVerdict", "ConditionResult",
    "CertificateVerdict", "check_invariance", "check_initial_condition",
    "check_unsafe_condition", "check_region_affine", "falsify_region",
    "verify_region_bab", "verify_certificate",
    "SmtQuery", "export_invariance", "export_set_condition",
    "expr_to_smt",
    "format_number",
    "ProblemSpec", "LoadedProblem", "load_problem", "build_report",
    "exit_code", "report_bytes_without_timings", "write_report",
    "EXIT_VERIFIED", "EXIT_FALSIFIED", "EXIT_UNKNOWN", "EXIT_FAILURE",
]
