"""Run configuration: a flat JSON document, unknown keys rejected."""
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .domain import FLAVORS, BoxDomain
from .solver import SCHEMES

EXPERIMENTS = ("simulate", "verify-decay", "perturbation", "certify", "estimate-c1",
               "check-inequalities")
PRESETS = ("single_mode", "taylor_green", "random")


class ConfigError(ValueError):
    """Invalid configuration; the message carries ``path:line:`` context."""


@dataclass
class RunConfig:
    dim: int
    sides: list
    cutoff: int
    nu: Optional[float] = None
    flavor: str = "periodic"
    experiment: Optional[str] = None
    initial: str = "random"
    mode: Optional[list] = None
    amplitude: float = 1.0
    target_vnorm: Optional[float] = None
    initial2: Optional[str] = None
    seed: int = 0
    seed2: Optional[int] = None
    T: float = 1.0
    dt: Optional[float] = None
    scheme: str = "rk4"
    sample_every: int = 1
    envelope_tol: float = 1e-6
    contraction_tol: float = 1e-10
    ut_tol: float = 1e-6
    c1: float = 3.0
    certificate: str = "existence"
    iterations: int = 50
    restarts: int = 8
    c1_solenoidal: bool = False
    samples: int = 100
    out: Optional[str] = None
    source: Optional[str] = field(default=None, repr=False, compare=False)

    @property
    def domain(self) -> BoxDomain:
        return BoxDomain(self.dim, tuple(self.sides), self.flavor)

    def to_dict(self):
        d = asdict(self)
        d.pop("source")
        d.pop("out")
        return d

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


REQUIRED = ("dim", "sides", "cutoff")
_FIELDS = {f.name: f for f in RunConfig.__dataclass_fields__.values() if f.name != "source"}


def _line_of(text, key):
    needle = f'"{key}"'
    for n, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return n
    return 1


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def parse_config(text, path="<config>", experiment=None, seed=None) -> RunConfig:
    """Parse and validate a JSON configuration document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: top level must be a JSON object")

    def fail(key, msg):
        raise ConfigError(f"{path}:{_line_of(text, key)}: {key}: {msg}")

    for key in raw:
        if key not in _FIELDS:
            fail(key, "unknown key")
    required = list(REQUIRED)
    exp = experiment or raw.get("experiment")
    if exp != "estimate-c1":
        required.append("nu")
    for key in required:
        if key not in raw:
            raise ConfigError(f"{path}:1: missing required field '{key}'")
    if experiment is not None and raw.get("experiment") not in (None, experiment):
        fail("experiment", f"config is for {raw['experiment']!r}, not {experiment!r}")

    def positive_number(key):
        if key in raw and raw[key] is not None:
            if not _is_number(raw[key]) or raw[key] <= 0:
                fail(key, f"must be a positive number, got {raw[key]!r}")

    def positive_int(key, minimum=1):
        if key in raw:
            if not _is_int(raw[key]) or raw[key] < minimum:
                fail(key, f"must be an integer >= {minimum}, got {raw[key]!r}")

    if not _is_int(raw["dim"]) or raw["dim"] not in (2, 3, 4):
        fail("dim", f"must be 2, 3 or 4, got {raw['dim']!r}")
    sides = raw["sides"]
    if (not isinstance(sides, list) or len(sides) != raw["dim"]
            or not all(_is_number(s) and s > 0 for s in sides)):
        fail("sides", f"must be a list of {raw['dim']} positive numbers")
    positive_int("cutoff")
    for key in ("nu", "T", "dt", "amplitude", "envelope_tol", "contraction_tol",
                "ut_tol", "c1"):
        positive_number(key)
    if "target_vnorm" in raw and raw["target_vnorm"] is not None:
        if not _is_number(raw["target_vnorm"]) or raw["target_vnorm"] < 0:
            fail("target_vnorm", "must be a nonnegative number")
    for key in ("sample_every", "iterations", "samples"):
        positive_int(key)
    positive_int("restarts", 0)
    for key in ("seed", "seed2"):
        if key in raw and raw[key] is not None:
            if not _is_int(raw[key]) or not 0 <= raw[key] < 2**64:
                fail(key, "must be an unsigned 64-bit integer")
    if raw.get("flavor", "periodic") not in FLAVORS:
        fail("flavor", f"must be one of {FLAVORS}")
    if raw.get("scheme", "rk4") not in SCHEMES:
        fail("scheme", f"must be one of {SCHEMES}")
    if raw.get("experiment") is not None and raw["experiment"] not in EXPERIMENTS:
        fail("experiment", f"must be one of {EXPERIMENTS}")
    if raw.get("certificate", "existence") not in ("existence", "regularity"):
        fail("certificate", "must be 'existence' or 'regularity'")
    for key in ("initial", "initial2"):
        if key in raw and raw[key] is not None and not isinstance(raw[key], str):
            fail(key, f"must be a preset name {PRESETS} or a field file path")
    if "mode" in raw and raw["mode"] is not None:
        mode = raw["mode"]
        if (not isinstance(mode, list) or len(mode) != raw["dim"]
                or not all(_is_int(c) for c in mode)):
            fail("mode", f"must be a list of {raw['dim']} integers")
    if "c1_solenoidal" in raw and not isinstance(raw["c1_solenoidal"], bool):
        fail("c1_solenoidal", "must be true or false")

    cfg = RunConfig(**raw)
    cfg.source = str(path)
    if experiment is not None:
        cfg.experiment = experiment
    if seed is not None:
        cfg.seed = int(seed)
    if cfg.dim != len(cfg.sides):
        fail("sides", "length must equal dim")
    return cfg


def load_config(path, experiment=None, seed=None) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), experiment, seed)
