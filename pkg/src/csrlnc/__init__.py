"""Systematic random linear network coding with circular-shift coefficients.

Encoders, decoders with binary-operation accounting, analytic delay and
complexity formulas, and a seeded broadcast simulator.
"""

from .analysis import ChannelConfig, expected_delay
from .decoders import DecodeSession, decode
from .errors import InvalidParameter, MalformedHeader, NonConvergence, ShapeMismatch, SingularMatrix
from .schemes import CodedPacket, Scheme, SchemeConfig, parse_p0
from .sim import ExperimentSpec, UniformChannel, run_experiment, run_trial

__version__ = "0.1.0"

__all__ = [
    "ChannelConfig",
    "CodedPacket",
    "DecodeSession",
    "ExperimentSpec",
    "InvalidParameter",
    "MalformedHeader",
    "NonConvergence",
    "Scheme",
    "SchemeConfig",
    "ShapeMismatch",
    "SingularMatrix",
    "UniformChannel",
    "decode",
    "expected_delay",
    "parse_p0",
    "run_experiment",
    "run_trial",
]
