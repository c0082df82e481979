"""Carleman kernels for families of bounded operators.

A finite family {B_r} is split as S_r = Q_r + J_r^*, carried to L2 by an
index pairing onto Meyer wavelets, and represented by smooth kernels
K_r = P_r + F_r sampled on a grid.
"""
from .config import RunConfig, load_config, parse_config
from .errors import CarlemanError, ConditionFails, ConfigError
from .kernels import KernelField, KernelGrid
from .operators import OperatorFamily, preset_family
from .pipeline import analyze, construct, verify
from .wavelet import BellFunction, ChildIndex, MotherWavelet, child_eval

__all__ = ["RunConfig", "load_config", "parse_config", "CarlemanError", "ConditionFails",
           "ConfigError", "KernelField", "KernelGrid", "OperatorFamily", "preset_family",
           "analyze", "construct", "verify", "BellFunction", "ChildIndex", "MotherWavelet",
           "child_eval"]
__version__ = "0.1.0"
