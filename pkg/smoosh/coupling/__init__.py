"""Shadow-index coupling."""

from .shadow_coupling import (
    CouplingResult,
    ShadowState,
    couple,
    couple_fast,
    init_shadow,
    record_meet,
    sample_sigma_star,
    sigma_star,
)

__all__ = [
    'CouplingResult',
    'ShadowState',
    'couple',
    'couple_fast',
    'init_shadow',
    'record_meet',
    'sample_sigma_star',
    'sigma_star',
]
