from prbox import config
from prbox.boxes import Box
from prbox.boxes import make_biased
from prbox.boxes import make_isotropic
from prbox.localpart import local_part
from prbox.lp import verify
from prbox.strategies import LocalDetStrategy


__version__ = "0.1.0"
__all__ = [
    "Box",
    "LocalDetStrategy",
    "config",
    "local_part",
    "make_biased",
    "make_isotropic",
    "verify",
]
