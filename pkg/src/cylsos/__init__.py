"""Exact Putinar-type certificates for polynomials positive on cylinders S x R."""

from .assembler import Certificate, archimedean_transfer, assemble_proposition, lift_theorem
from .bounds import BoundReport, LojaConstants
from .errors import (
    CylSosError,
    HypothesisRejected,
    InfeasibleBudgetError,
    NotCertifiedError,
    ParseError,
    RegistryError,
)
from .pipeline import Problem, bound_report, certify, load_problem
from .polyring import Poly, parse_poly
from .sos1d import SosPoly, sos_decompose_univariate
from .verifier import VerificationReport, verify_certificate

__version__ = "0.1.0"
