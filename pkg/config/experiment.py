"""
Experiment configuration.

ExperimentConfig is validated with pydantic at construction, so every
parameter-domain check runs before any simulation. Configurations are built
from, in increasing precedence: field defaults, a named preset, a flat
``key = value`` file and ``--set key=value`` overrides.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.settings import NumericsConfig
from smoosh.core.errors import ParameterError
from smoosh.core.rng import MAX_SEED

ModelName = Literal['discrete2d', 'lattice1d', 'diffusion', 'jumpdiffusion', 'zeta_abstract']
ArtifactKind = Literal['paths', 'events', 'coupling', 'hitting', 'gathers', 'local_times', 'permutations',
                       'clusters', 'samples', 'summary']

LIST_FIELDS = ('outputs', 't_grid')
# unset (None) values are filled from Settings.numerics when a run starts
NUMERIC_FIELDS = ('dt', 'coupling_horizon', 'bootstrap_resamples')

MODEL_OUTPUTS: Dict[str, frozenset] = {
    'discrete2d': frozenset({'paths', 'events', 'coupling', 'clusters', 'permutations', 'summary'}),
    'lattice1d': frozenset({'paths', 'hitting', 'coupling', 'permutations', 'summary'}),
    'diffusion': frozenset({'paths', 'local_times', 'permutations', 'summary'}),
    'jumpdiffusion': frozenset({'paths', 'gathers', 'local_times', 'coupling', 'permutations', 'summary'}),
    'zeta_abstract': frozenset({'samples', 'summary'}),
}
COUPLING_MODELS = ('discrete2d', 'lattice1d', 'jumpdiffusion')


class ExperimentConfig(BaseModel):
    """Parameters of one experiment (one model, many replicas)."""

    model_config = ConfigDict(extra='forbid', validate_assignment=True)

    model: ModelName = Field(default='discrete2d', description="Motion model")
    delta: float = Field(default=0.4, gt=0, description="Palm radius δ")
    p: float = Field(default=0.5, gt=0, le=1, description="Coin probability")
    sigma2: float = Field(default=0.5, gt=0, description="Direction variance σ² (diffusion models)")
    s0: float = Field(default=0.1, gt=0, description="Spread distance")
    lam: float = Field(default=1.0, gt=0, description="Event intensity λ")
    direction: Literal['four_axis', 'continuous_uniform'] = Field(default='four_axis', description="Direction law")
    gather_mode: Literal['every_event', 'rare_gather', 'never'] = Field(default='every_event')
    N: int = Field(default=8, ge=2, description="Lattice sites")
    m: int = Field(default=3, ge=1, description="Number of cards")
    dt: Optional[float] = Field(default=None, gt=0, description="Euler step")
    horizon: float = Field(default=10.0, ge=0, description="Time horizon (lattice: steps)")
    width: float = Field(default=1.0, gt=0)
    height: float = Field(default=1.0, gt=0)
    initial: Literal['spaced', 'center', 'random'] = Field(default='spaced', description="Initial placement")
    max_events: Optional[int] = Field(default=None, ge=0, description="Event cap for discrete2d")
    record_every: int = Field(default=1, ge=1, description="Euler steps between recorded path rows")
    coupling: Literal['standard', 'fast'] = Field(default='standard')
    coupling_horizon: Optional[float] = Field(default=None, gt=0, description="Time cap of one coupling run")
    bootstrap_resamples: Optional[int] = Field(default=None, ge=2, description="Resamples for the TV standard error")
    hit_start: int = Field(default=1, ge=1)
    hit_target: Optional[int] = Field(default=None, ge=1, description="Defaults to N")
    zeta_p: Optional[float] = Field(default=None, gt=0, le=1, description="Override of 𝔭 for zeta_abstract")
    t_grid: List[float] = Field(default_factory=lambda: [0.0, 2.0, 4.0, 8.0, 16.0, 32.0, 48.0, 64.0])
    replicas: int = Field(default=100, ge=0)
    seed: int = Field(default=20240601, ge=0, le=MAX_SEED)
    outputs: List[ArtifactKind] = Field(default_factory=lambda: ['summary'])

    @field_validator(*LIST_FIELDS, mode='before')
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(',') if item.strip()]
        return value

    @field_validator('t_grid')
    @classmethod
    def _sorted_grid(cls, value: List[float]) -> List[float]:
        if any(t < 0 for t in value) or list(value) != sorted(value):
            raise ValueError("t_grid must be nonnegative and nondecreasing")
        return value

    @model_validator(mode='after')
    def _check_domains(self) -> 'ExperimentConfig':
        if self.model != 'lattice1d' and self.p >= 1:
            raise ValueError(f"p must be < 1 for model {self.model}")
        if self.gather_mode == 'rare_gather' and self.lam < 1:
            raise ValueError("rare_gather needs lam >= 1")
        if self.model in ('diffusion', 'jumpdiffusion') and (self.width != 1 or self.height != 1):
            raise ValueError("diffusion models run on the unit table")
        unsupported = sorted(set(self.outputs) - MODEL_OUTPUTS[self.model])
        if unsupported:
            raise ValueError(f"model {self.model} does not produce {unsupported}")
        if self.model == 'lattice1d':
            target = self.hit_target if self.hit_target is not None else self.N
            if not (1 <= self.hit_start <= self.N and 1 <= target <= self.N):
                raise ValueError(f"hit_start and hit_target must lie in 1..{self.N}")
        return self

    @property
    def target_site(self) -> int:
        return self.hit_target if self.hit_target is not None else self.N

    def with_numerics(self, numerics: NumericsConfig) -> 'ExperimentConfig':
        """Copy with every unset numerical field taken from numerics."""
        missing = {name: getattr(numerics, name) for name in NUMERIC_FIELDS if getattr(self, name) is None}
        return self.model_copy(update=missing) if missing else self

    def to_flat_dict(self) -> Dict[str, Any]:
        return self.model_dump()


PRESETS: Dict[str, Dict[str, Any]] = {
    'fig2': {
        'model': 'discrete2d', 'width': 5.0, 'height': 5.0, 'delta': 0.5, 's0': 1.0, 'p': 0.5,
        'lam': 1.0, 'm': 250, 'initial': 'center', 'max_events': 3000, 'horizon': 1e9,
        'replicas': 1, 'outputs': ['paths', 'clusters', 'summary'],
    },
    'lattice': {
        'model': 'lattice1d', 'N': 8, 'm': 3, 'p': 0.5, 'horizon': 20.0, 'replicas': 1000,
        'outputs': ['hitting', 'coupling', 'summary'],
    },
    'diffusion': {
        'model': 'diffusion', 'm': 2, 'delta': 0.3, 'p': 0.5, 'sigma2': 0.5, 'horizon': 1.0,
        'dt': 1e-3, 'record_every': 10, 'replicas': 10, 'outputs': ['paths', 'local_times', 'summary'],
    },
    'capture': {
        'model': 'jumpdiffusion', 'm': 2, 'delta': 0.6, 'p': 0.5, 'sigma2': 0.5, 'horizon': 50.0,
        'dt': 1e-3, 'replicas': 20, 'outputs': ['gathers', 'summary'],
    },
}


def _format_value(value: Any) -> str:
    if isinstance(value, (list, tuple)):
        return ', '.join(_format_value(v) for v in value)
    if value is None:
        return 'none'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_flat_text(config: ExperimentConfig) -> str:
    """Render the resolved config as ``key = value`` lines in field order."""
    lines = [f"{key} = {_format_value(value)}" for key, value in config.model_dump().items()]
    return '\n'.join(lines) + '\n'


def parse_flat_config(text: str) -> Dict[str, Any]:
    """
    Parse ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ParameterError: On a line without ``=``
    """
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ParameterError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split('=', 1))
        values[key] = None if value.lower() == 'none' else value
    return values


def parse_overrides(items: Sequence[str]) -> Dict[str, Any]:
    return parse_flat_config('\n'.join(items))


def load_experiment(preset: Optional[str] = None, config_file: Optional[Path] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Resolve an ExperimentConfig from its sources.

    Args:
        preset: Name in PRESETS
        config_file: Flat key = value file
        overrides: Highest-precedence values (from --set and dedicated flags)

    Returns:
        Validated ExperimentConfig

    Raises:
        ParameterError: Unknown preset
        pydantic.ValidationError: Any out-of-domain parameter
    """
    merged: Dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ParameterError(f"unknown preset '{preset}', expected one of {sorted(PRESETS)}")
        merged.update(PRESETS[preset])
    if config_file is not None:
        merged.update(parse_flat_config(Path(config_file).read_text(encoding='utf-8')))
    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**merged)
