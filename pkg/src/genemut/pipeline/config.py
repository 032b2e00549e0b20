"""Run configuration: dataclass defaults, ``key=value`` files, flag overrides."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields

ALL_ENCODINGS = ("linguistic", "phenotype", "pathway", "consistency")
LOSSES = ("comparative", "bce")
FUSIONS = ("mfm", "matrix")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dataset: str = ""
    d: int = 64
    L: int = 2
    I: int = 2
    T: float = 1.0
    loss: str = "comparative"
    empty_mode: str = "limit"
    fusion: str = "mfm"
    encodings: tuple = ALL_ENCODINGS
    association: bool = True
    epochs: int = 250
    lr: float = 1e-4
    l2_weight: float = 1e-5
    seed: int = 0
    folds: int = 5
    fold_subset: tuple = ()      # empty -> every fold
    max_steps: int = 0           # 0 -> no cap on optimizer steps
    beta: float = 0.5
    embedder: str = "token-hash"
    con_mode: str = "joint"
    con_truncate: bool = True
    con_threshold: float = 0.01

    def validate(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.d < 1 or self.L < 0 or self.I < 1:
            raise ConfigError("need d >= 1, L >= 0, I >= 1")
        if self.T <= 0:
            raise ConfigError("T must be positive")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}")
        if self.fusion not in FUSIONS:
            raise ConfigError(f"fusion must be one of {FUSIONS}")
        if self.empty_mode not in ("limit", "zero-anchor"):
            raise ConfigError("empty_mode must be 'limit' or 'zero-anchor'")
        bad = [e for e in self.encodings if e not in ALL_ENCODINGS]
        if bad:
            raise ConfigError(f"unknown encodings {bad}")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2")
        if any(not 0 <= f < self.folds for f in self.fold_subset):
            raise ConfigError("fold_subset entries must lie in 0..folds-1")
        if not 0 < self.beta < 1:
            raise ConfigError("beta must lie in (0, 1)")
        if self.con_mode not in ("joint", "marginal"):
            raise ConfigError("con_mode must be 'joint' or 'marginal'")
        return self

    def replace(self, **kw):
        return dataclasses.replace(self, **kw)

    def to_lines(self):
        return [f"{f.name}={_render(getattr(self, f.name))}" for f in fields(self)]


def _render(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


def _parse_bool(s):
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _parse_groups(raw):
    # "0,1,2;3,4" -> ((0, 1, 2), (3, 4))
    return tuple(tuple(int(x) for x in g.split(",") if x.strip()) for g in raw.split(";") if g.strip())


def coerce(name, raw, cls=RunConfig):
    """Parse ``raw`` into the type of field ``name`` of dataclass ``cls``."""
    types = {f.name: f for f in fields(cls)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}")
    default = types[name].default
    raw = raw.strip()
    try:
        if name == "groups":
            return _parse_groups(raw) if raw else None
        if isinstance(default, bool):
            return _parse_bool(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.split(",") if x.strip()]
            if name == "fold_subset":
                return tuple(int(x) for x in items)
            if name == "encodings" and items in (["none"], ["one-hot"]):
                return ()
            return tuple(items)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config_lines(lines, source="<config>", cls=RunConfig):
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        k = k.strip().replace("-", "_")
        try:
            out[k] = coerce(k, v, cls)
        except ConfigError as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from None
    return out


def load_config(path=None, overrides=None):
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_lines(fh, source=path))
    values.update(overrides or {})
    return RunConfig(**values).validate()
