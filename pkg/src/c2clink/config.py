"""Run configuration, config-file parsing and seed derivation."""
from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields

import numpy as np


class ConfigError(ValueError):
    """Invalid run configuration."""


ITEM_METHODS = ("best_selling", "random", "rules")
EVAL_MODES = ("both", "M1", "M2")


@dataclass(frozen=True)
class RunConfig:
    # simrank
    damping: float = 0.8
    max_iters: int = 10
    tol: float = 1e-4
    # candidates
    n_similar: int = 10
    # fusion
    alpha: float = 1 / 3
    beta: float = 1 / 3
    gamma: float = 1 / 3
    # item selection
    item_method: str = "best_selling"
    min_support: float = 0.01
    min_count: int = 2
    min_confidence: float = 0.5
    # evaluation
    folds: int = 10
    samples: int = 50
    list_sizes: tuple[int, ...] = field(default_factory=lambda: tuple(range(1, 26)))
    mode: str = "both"
    max_target_links: int = 0
    # recommend
    top: int = 10
    seed: int = 0
    rating_min: float = 1.0
    rating_max: float = 5.0
    threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "list_sizes", tuple(int(s) for s in self.list_sizes))
        self.validate()

    def validate(self) -> None:
        if not 0 < self.damping < 1:
            raise ConfigError(f"damping must lie in (0, 1), got {self.damping}")
        if self.max_iters < 1 or not self.tol > 0:
            raise ConfigError("max_iters must be >= 1 and tol > 0")
        if self.n_similar < 1 or self.top < 1:
            raise ConfigError("n_similar and top must be >= 1")
        coeffs = (self.alpha, self.beta, self.gamma)
        if any(not 0.0 <= c <= 1.0 for c in coeffs):
            raise ConfigError(f"alpha, beta, gamma must each lie in [0, 1], got {coeffs}")
        if abs(sum(coeffs) - 1.0) > 1e-9:
            raise ConfigError(f"alpha + beta + gamma must equal 1, got {sum(coeffs):.12g}")
        if self.item_method not in ITEM_METHODS:
            raise ConfigError(f"item_method must be one of {ITEM_METHODS}")
        if not 0 < self.min_support <= 1 or not 0 < self.min_confidence <= 1:
            raise ConfigError("min_support and min_confidence must lie in (0, 1]")
        if self.min_count < 1:
            raise ConfigError("min_count must be >= 1")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if self.max_target_links < 0:
            raise ConfigError("max_target_links must be >= 0 (0 disables the cap)")
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if not self.list_sizes or min(self.list_sizes) < 1:
            raise ConfigError("list_sizes must be nonempty positive integers")
        if self.mode not in EVAL_MODES:
            raise ConfigError(f"mode must be one of {EVAL_MODES}")
        if not self.rating_min < self.rating_max:
            raise ConfigError("rating_min must be below rating_max")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @property
    def rating_scale(self) -> tuple[float, float]:
        return (self.rating_min, self.rating_max)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        """Grouped view echoed into reports. ``threads`` is left out on purpose:
        it must not change any output."""
        return {
            "simrank": {"C": self.damping, "max_iters": self.max_iters, "tol": self.tol},
            "candidates": {"n": self.n_similar},
            "fusion": {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma},
            "items": {
                "method": self.item_method,
                "min_support": self.min_support,
                "min_count": self.min_count,
                "min_confidence": self.min_confidence,
            },
            "eval": {
                "k": self.folds,
                "samples": self.samples,
                "list_sizes": list(self.list_sizes),
                "mode": self.mode,
                "max_target_links": self.max_target_links,
            },
            "seed": self.seed,
            "rating_scale": [self.rating_min, self.rating_max],
        }


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def parse_value(key: str, text: str):
    """Convert a config-file or flag string for ``key`` to its typed value."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return _parse_float(text)
        if kind == "str":
            return text
        return parse_sizes(text)
    except ValueError as err:
        raise ConfigError(f"{key}: {err}") from None


def _parse_float(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_sizes(text: str) -> tuple[int, ...]:
    """``"1-25"`` or ``"1,5,10"`` (or a mix) to a sorted tuple of sizes."""
    sizes = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            sizes.update(range(int(lo), int(hi) + 1))
        else:
            sizes.add(int(part))
    return tuple(sorted(sizes))


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, text = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            values[key] = parse_value(key, text)
    return values


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then config-file values, then explicit overrides."""
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**merged)
    except TypeError as err:
        raise ConfigError(str(err)) from None


def _key_words(key) -> list[int]:
    if isinstance(key, (int, np.integer)) and key >= 0:
        return [int(key) & 0xFFFFFFFF, int(key) >> 32]
    digest = hashlib.blake2b(str(key).encode("utf-8"), digest_size=8).digest()
    return [int.from_bytes(digest[:4], "little"), int.from_bytes(digest[4:], "little")]


def derive_seed(seed: int, *keys) -> np.random.SeedSequence:
    """Sub-seed for a component, a pure function of the run seed and ``keys``.

    Each key (component tag, fold number, user id, ...) is mapped to two
    32-bit words (integers directly, strings through BLAKE2b) and appended to
    the run seed as SeedSequence entropy.
    """
    words = _key_words(seed)
    for k in keys:
        words.extend(_key_words(k))
    return np.random.SeedSequence(words)


def rng_for(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))
