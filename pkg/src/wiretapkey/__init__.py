"""Secret-key rate bounds for bosonic wiretap channels with a restricted eavesdropper.

Modules:

``gaussian``  covariance-matrix calculus for zero-mean Gaussian states
``channel``   joint state of the TMSV source, lossy channel and restricted Eve
``rates``     Hashing lower bounds (DR, RR) and CCQ rates
``bounds``    relative-entropy-of-entanglement upper bounds
``bb84``      decoy-state BB84 rates
``fock``      truncated Fock-space oracle
``sweep``     parameter sweeps and CSV output; ``cli`` wraps them
"""

from .bb84 import Bb84Params, optimize_mu, skr_restricted, skr_unrestricted
from .bounds import closest_sep_three_mode, er_upper_bound_numeric, er_upper_bound_pure_loss
from .channel import ChannelParams, build_joint_state
from .gaussian import CovarianceMatrix
from .rates import RateResult, key_rate

__all__ = [
    "Bb84Params",
    "ChannelParams",
    "CovarianceMatrix",
    "RateResult",
    "build_joint_state",
    "closest_sep_three_mode",
    "er_upper_bound_numeric",
    "er_upper_bound_pure_loss",
    "key_rate",
    "optimize_mu",
    "skr_restricted",
    "skr_unrestricted",
]

__version__ = "0.1.0"
