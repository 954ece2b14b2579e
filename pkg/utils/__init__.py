"""
Utilities Package
Error hierarchy and seed substreams
"""

from utils.errors import BehaviourError, ConfigError
from utils.seeding import derive_seed, pair_rng

__all__ = ['BehaviourError', 'ConfigError', 'derive_seed', 'pair_rng']
