from prbox.lp.base import Certificate
from prbox.lp.base import CertificateCheck
from prbox.lp.base import LPProblem
from prbox.lp.base import LPSolution
from prbox.lp.certificate import pricing_gap
from prbox.lp.certificate import verify
from prbox.lp.colgen import RestrictedMaster
from prbox.lp.colgen import all_columns
from prbox.lp.colgen import column_generation
from prbox.lp.pricing import PricingResult
from prbox.lp.pricing import price_strategies
from prbox.lp.simplex import ExactSimplex
from prbox.lp.simplex import solve_exact


__all__ = [
    "Certificate",
    "CertificateCheck",
    "ExactSimplex",
    "LPProblem",
    "LPSolution",
    "PricingResult",
    "RestrictedMaster",
    "all_columns",
    "column_generation",
    "price_strategies",
    "pricing_gap",
    "solve_exact",
    "verify",
]
