"""INI run configuration: ``[section] key = value`` with a fixed schema.

Unknown sections or keys are rejected up front, naming the offender. Voltages
in ``[effective]`` and ``[gate]`` are in units of Delta0; lengths in nm;
energies in ueV.
"""
import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

ENV_VAR = "QDOT_CONFIG"
DEFAULT_PATH = "qdot.ini"


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


NAN = float("nan")

# section -> key -> (type, default)
SCHEMA = {
    "run": {"seed": (int, 0), "output_dir": (str, ".")},
    "material": {"m_star": (float, 0.067), "eps_r": (float, 10.8), "g_factor": (float, -0.44)},
    "solver": {
        "L": (float, 400.0),
        "n_max": (int, 10),
        "quadrature_order": (int, 32),
        "spectrum_cutoff": (int, 30),
        "levels": (int, 4),
        "n_grid": (int, 101),
        "samples": (int, 400),
        "periods": (float, 2.0),
    },
    "effective": {
        "Delta0": (float, NAN),
        "p_S": (float, NAN),
        "p_T": (float, NAN),
        "E0S": (float, 0.0),
        "E0T": (float, 0.0),
        "V": (float, NAN),
        "V_min": (float, -3.0),
        "V_max": (float, 3.0),
        "V_points": (int, 61),
    },
    "gate": {
        "L": (float, 400.0),
        "d": (float, 3600.0),
        "u0": (float, NAN),
        "u1": (float, NAN),
        "V_freeze": (float, -3.0),
        "samples": (int, 200),
    },
    "cluster": {
        "rows": (int, 2),
        "cols": (int, 2),
        "u0_row": (float, 3.0),
        "u1_row": (float, 1.0),
        "u0_col": (float, 3.0),
        "u1_col": (float, 1.0),
        "correct": (_bool, True),
    },
    "sweep": {"parameter": (str, ""), "values": (str, ""), "target": (str, "")},
}

_CANON = {s: {k.lower(): k for k in keys} for s, keys in SCHEMA.items()}


def _coerce(section, key, raw):
    typ = SCHEMA[section][key][0]
    try:
        return typ(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({exc})") from None


def canonical_key(section, key):
    if section not in SCHEMA:
        raise ConfigError(f"unknown section [{section}]")
    canon = _CANON[section].get(key.lower())
    if canon is None:
        raise ConfigError(f"unknown key '{key}' in section [{section}]")
    return canon


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)
    source: str | None = None

    @classmethod
    def defaults(cls):
        return cls({s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})

    def __getitem__(self, section):
        return self.sections[section]

    @property
    def seed(self) -> int:
        return int(self.sections["run"]["seed"])

    @property
    def output_dir(self) -> Path:
        return Path(self.sections["run"]["output_dir"])

    def set(self, section, key, value):
        key = canonical_key(section, key)
        self.sections[section][key] = _coerce(section, key, value) if isinstance(value, str) else value

    def copy(self):
        return RunConfig({s: dict(v) for s, v in self.sections.items()}, self.source)


def parse_config(text: str, source="<string>") -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig.defaults()
    cfg.source = source
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}] in {source}")
        for key, raw in cp.items(section):
            cfg.set(section, key, raw)
    return cfg


def load_config(path=None) -> RunConfig:
    """Read ``path``, else ``$QDOT_CONFIG``, else ``./qdot.ini`` if present, else defaults."""
    explicit = path is not None or ENV_VAR in os.environ
    path = Path(path or os.environ.get(ENV_VAR, DEFAULT_PATH))
    if not path.exists():
        if explicit:
            raise ConfigError(f"config file {path} not found")
        return RunConfig.defaults()
    return parse_config(path.read_text(), str(path))


def parse_values(spec: str) -> list:
    """Value lists: ``a,b,c``; ``a,b,...,z`` (step b-a); or ``start:stop:step`` (inclusive)."""
    spec = spec.strip()
    if not spec:
        raise ConfigError("empty value list")
    try:
        if ":" in spec:
            parts = [float(p) for p in spec.split(":")]
            if len(parts) != 3 or parts[2] == 0:
                raise ConfigError(f"range {spec!r} must be start:stop:step with nonzero step")
            start, stop, step = parts
            n = int(round((stop - start) / step))
            if n < 0:
                raise ConfigError(f"range {spec!r} runs away from its end point")
            return [round(start + i * step, 12) for i in range(n + 1)]
        items = [s.strip() for s in spec.split(",") if s.strip()]
        if "..." in items:
            k = items.index("...")
            if k != 2 or len(items) != 4:
                raise ConfigError(f"ellipsis form must be 'a,b,...,z', got {spec!r}")
            a, b, z = float(items[0]), float(items[1]), float(items[3])
            step = b - a
            if step == 0:
                raise ConfigError("ellipsis step is zero")
            n = int(round((z - a) / step))
            if n < 1:
                raise ConfigError(f"ellipsis range {spec!r} runs away from its end point")
            return [round(a + i * step, 12) for i in range(n + 1)]
        return [float(s) for s in items]
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"bad value list {spec!r}: {exc}") from None
