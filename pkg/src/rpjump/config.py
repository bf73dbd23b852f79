"""Scenario files: flat ``key = value`` text with ``#`` comments.

Example::

    # coherent start, dark triplet
    theory = kominis_revised
    kS = 1.0
    kT = 0.0
    initial = coherent
    t_end = 20
    dt = 0.01

Exactly one of ``theory`` (master-equation mode) or ``scheme``
(trajectory mode) must be given. Parsing reports every problem it finds,
not just the first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .master import STABILITY_BOUND, Theory
from .spin import Basis, Model
from .trajectories import PROPAGATION_BOUND, Scheme, scheme_heff

REQUIRED = ("kS", "t_end", "dt")
FOUR_LEVEL_THEORIES = (Theory.HABERKORN, Theory.JONES_HORE)


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    theory: Theory | None = None
    scheme: Scheme | None = None
    basis: Basis = Basis.TWO_LEVEL
    J: float = 0.0
    delta: float = 0.0
    kS: float = 0.0
    kT: float = 0.0
    initial: str | tuple[complex, complex] = "S"
    t_end: float = 1.0
    dt: float = 1e-3
    n_traj: int = 1000
    record_every: int = 1
    seed: int = 0
    output: str = "scenario"

    @property
    def mode(self) -> str:
        return "ode" if self.theory is not None else "trajectory"

    def model(self) -> Model:
        return Model.from_values(self.J, self.delta, self.kS, self.kT, self.basis)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=seed)

    def to_text(self) -> str:
        """Serialize back to the key = value format (round-trips through parse_config)."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None or (f.name == "n_traj" and self.mode == "ode"):
                continue
            if f.name in ("theory", "scheme", "basis"):
                text = value.value
            elif f.name == "initial":
                text = value if isinstance(value, str) else f"{value[0]!r}, {value[1]!r}"
            elif f.name == "output":
                text = value
            else:
                text = repr(value)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"


def _real(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError
    return v


def _integer(text):
    return int(text, 0)


def _initial(text):
    if text.lower() == "coherent":
        return "coherent"
    if text.upper() in ("S", "T"):
        return text.upper()
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError
    return tuple(complex(p.replace(" ", "")) for p in parts)


_PARSERS = {
    "theory": (Theory, "one of " + ", ".join(t.value for t in Theory)),
    "scheme": (Scheme, "one of " + ", ".join(s.value for s in Scheme)),
    "basis": (Basis, "one of " + ", ".join(b.value for b in Basis)),
    "J": (_real, "a finite real number"),
    "delta": (_real, "a finite real number"),
    "kS": (_real, "a finite real number"),
    "kT": (_real, "a finite real number"),
    "initial": (_initial, "S, T, coherent or an amplitude pair 'a, b'"),
    "t_end": (_real, "a finite real number"),
    "dt": (_real, "a finite real number"),
    "n_traj": (_integer, "an integer"),
    "record_every": (_integer, "an integer"),
    "seed": (_integer, "an integer"),
    "output": (str, "a path prefix"),
}


def parse_config(text: bytes | str) -> ScenarioConfig:
    """Parse and fully validate a scenario; raises ConfigError listing all problems."""
    errors: list[str] = []
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError([f"not valid UTF-8: {exc}"]) from None

    values: dict = {}
    seen_line: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, value = (s.strip() for s in line.partition("="))
        if key not in _PARSERS:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen_line:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {seen_line[key]})")
            continue
        seen_line[key] = lineno
        parser, expected = _PARSERS[key]
        try:
            values[key] = parser(value)
        except ValueError:
            errors.append(f"line {lineno}: {key}: expected {expected}, got {value!r}")

    for key in REQUIRED:
        if key not in seen_line:
            errors.append(f"missing required key {key!r}")
    if "theory" not in seen_line and "scheme" not in seen_line:
        errors.append("missing required key 'theory' or 'scheme'")
    if "theory" in seen_line and "scheme" in seen_line:
        errors.append("give either 'theory' or 'scheme', not both")
    if errors:
        raise ConfigError(errors)

    config = ScenarioConfig(**values)
    errors.extend(validate(config, explicit=set(seen_line)))
    if errors:
        raise ConfigError(errors)
    return config


def validate(config: ScenarioConfig, explicit: set[str] | None = None) -> list[str]:
    """Numeric and compatibility checks; returns a list of messages."""
    errors = []
    explicit = set() if explicit is None else explicit
    for name in ("kS", "kT"):
        if getattr(config, name) < 0:
            errors.append(f"{name}: must be >= 0 (got {getattr(config, name)!r})")
    if config.dt <= 0:
        errors.append(f"dt: must be > 0 (got {config.dt!r})")
    elif config.t_end < config.dt:
        errors.append(f"t_end: must be >= dt (got t_end={config.t_end!r}, dt={config.dt!r})")
    else:
        n = round(config.t_end / config.dt)
        if abs(n * config.dt - config.t_end) > 1e-9 * max(1.0, config.t_end):
            errors.append(f"t_end: must be a whole number of dt steps (t_end={config.t_end!r}, dt={config.dt!r})")
    if config.record_every < 1:
        errors.append(f"record_every: must be >= 1 (got {config.record_every})")
    if not 0 <= config.seed < 2**64:
        errors.append(f"seed: must be a 64-bit unsigned integer (got {config.seed})")
    if config.mode == "ode" and "n_traj" in explicit:
        errors.append("n_traj: only applies to trajectory mode (set 'scheme')")
    if config.mode == "trajectory" and config.n_traj < 1:
        errors.append(f"n_traj: must be >= 1 (got {config.n_traj})")
    if config.scheme is Scheme.KOMINIS and config.kT != 0:
        errors.append("Kominis scheme requires kT=0")
    if config.basis is Basis.FOUR_LEVEL and config.theory not in (None, *FOUR_LEVEL_THEORIES):
        errors.append(f"basis: four_level supports theory haberkorn or jones_hore, not {config.theory.value}")
    out = config.output
    if not out or out != out.strip() or "#" in out or "\n" in out or "\r" in out:
        errors.append(f"output: must be a non-empty prefix without '#', line breaks or surrounding spaces (got {out!r})")
    if not isinstance(config.initial, str):
        norm = math.sqrt(sum(abs(a) ** 2 for a in config.initial))
        if abs(norm - 1.0) > 1e-9:
            errors.append(f"initial: amplitude pair must be normalized (|psi| = {norm!r})")
    if errors:
        return errors

    model = config.model()
    if config.mode == "ode":
        scale = config.dt * model.stiffness()
        if scale > STABILITY_BOUND * (1 + 1e-12):
            errors.append(f"dt: dt*(||H|| + kS + kT) = {scale:.4g} exceeds {STABILITY_BOUND}")
    else:
        scale = config.dt * np.linalg.norm(scheme_heff(config.scheme, model), 2)
        if scale > PROPAGATION_BOUND * (1 + 1e-12):
            errors.append(f"dt: dt*||Heff|| = {scale:.4g} exceeds {PROPAGATION_BOUND}")
    return errors
