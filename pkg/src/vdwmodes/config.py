"""Plain ``key = value`` configuration with one section per subcommand.

Example::

    [materials]
    gold_plasma_ev = 9.0

    [sphere-scan]
    d_over_R = logspace(1e-3, 30, 25)

Grids are comma-separated numbers, ``linspace(a, b, n)`` or
``logspace(a, b, n)`` (log-spaced from a to b inclusive). Unknown sections
or keys, malformed values and invalid grids raise :class:`ConfigError`
carrying the offending line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

__all__ = ["DEFAULTS", "Section", "Config", "parse_config", "load_config", "defaults_text"]

# section -> [(key, default, comment)]
DEFAULTS: dict[str, list[tuple[str, str, str]]] = {
    "materials": [
        ("gold_plasma_ev", "9.0", "Drude plasma energy of gold (eV)"),
        ("gold_damping_ev", "0.035", "Drude damping of gold (eV); mode-sum scans use 0"),
        ("polystyrene_c_uv", "1.5", "UV oscillator strength, static eps = 1 + C"),
        ("polystyrene_uv_ev", "6.5", "UV oscillator energy (eV)"),
    ],
    "sphere-scan": [
        ("kind", "shell", "shell (gold shell, empty core) | coated (polystyrene core) | solid"),
        ("radius_m", "1e-8", "sphere radius R (m)"),
        ("delta_over_R", "0.01", "coat thickness / R"),
        ("d_over_R", "logspace(1e-3, 30, 25)", "gap grid / R"),
        ("nodes", "16", "fixed Gauss-Legendre frequency nodes"),
        ("tol", "1e-4", "multipole truncation tolerance"),
        ("l_max_cap", "8192", "largest multipole order"),
    ],
    "prism-scan": [
        ("shapes", "cube, standing, lying, cylinder", "bodies above a gold substrate"),
        ("size_m", "1e-7", "edge L (m); cylinder has radius L/sqrt(pi), height L"),
        ("d_over_L", "logspace(0.02, 10, 12)", "gap grid / L"),
        ("target_panels", "1000", "panels for an ungraded body"),
        ("graded", "true", "refine the bottom face to spacing ~1.75 d"),
        ("nodes", "16", "fixed frequency nodes"),
    ],
    "lateral-scan": [
        ("size_m", "1e-7", "base side L (m); prisms are L x L x L/2"),
        ("gap_over_L", "0.1", "vertical gap / L"),
        ("directions", "side, diagonal", "displacement directions"),
        ("l_over_L", "linspace(-0.5, 0.5, 11)", "offset grid / L"),
        ("target_panels", "600", "panels per prism"),
    ],
    "rotation-scan": [
        ("size_m", "1e-7", "diameter or side L (m)"),
        ("crosses", "circle, square", "cross sections"),
        ("lengths_over_L", "1, 2", "cylinder lengths / L"),
        ("gap_over_L", "0.3", "closest distance / L"),
        ("theta", "linspace(0, 1.5707963267948966, 7)", "relative angles (rad)"),
        ("target_panels", "1000", "panels per cylinder"),
    ],
    "pfa": [
        ("radius_m", "1e-8", "sphere radius R (m)"),
        ("delta_over_R", "0.01", "film thickness / R"),
        ("d_over_R", "logspace(1e-3, 30, 25)", "gap grid / R"),
    ],
}

_GRID = re.compile(r"^(linspace|logspace)\(\s*([^,]+),\s*([^,]+),\s*([^,\)]+)\)$")


@dataclass
class Section:
    """Values of one section with the line each came from (0: default)."""

    name: str
    values: dict[str, tuple[str, int]] = field(default_factory=dict)

    def _raw(self, key: str) -> tuple[str, int]:
        if key not in self.values:
            raise ConfigError(f"[{self.name}] missing key {key!r}")
        return self.values[key]

    def _fail(self, key: str, msg: str):
        line = self.values.get(key, ("", 0))[1]
        where = f"line {line}: " if line else ""
        raise ConfigError(f"{where}[{self.name}] {key}: {msg}")

    def str(self, key: str) -> str:
        return self._raw(key)[0]

    def float(self, key: str, positive: bool = False) -> float:
        raw = self.str(key)
        try:
            v = float(raw)
        except ValueError:
            self._fail(key, f"not a number: {raw!r}")
        if not math.isfinite(v) or (positive and not v > 0):
            self._fail(key, f"must be {'> 0' if positive else 'finite'}, got {raw!r}")
        return v

    def int(self, key: str, minimum: int = 1) -> int:
        raw = self.str(key)
        try:
            v = int(raw)
        except ValueError:
            self._fail(key, f"not an integer: {raw!r}")
        if v < minimum:
            self._fail(key, f"must be >= {minimum}, got {v}")
        return v

    def bool(self, key: str) -> bool:
        raw = self.str(key).lower()
        if raw in ("true", "yes", "1", "on"):
            return True
        if raw in ("false", "no", "0", "off"):
            return False
        self._fail(key, f"not a boolean: {raw!r}")

    def choices(self, key: str, allowed) -> list[str]:
        items = [s.strip() for s in self.str(key).split(",") if s.strip()]
        if not items:
            self._fail(key, "empty list")
        for it in items:
            if it not in allowed:
                self._fail(key, f"{it!r} is not one of {', '.join(allowed)}")
        return items

    def choice(self, key: str, allowed) -> str:
        items = self.choices(key, allowed)
        if len(items) != 1:
            self._fail(key, "expects a single value")
        return items[0]

    def grid(self, key: str, positive: bool = False) -> np.ndarray:
        """Strictly increasing grid."""
        raw = self.str(key).strip()
        m = _GRID.match(raw)
        try:
            if m:
                a, b, n = float(m.group(2)), float(m.group(3)), int(m.group(4))
            else:
                g = np.array([float(s) for s in raw.split(",") if s.strip()])
        except ValueError:
            self._fail(key, f"malformed grid {raw!r}")
        if m:
            if n < 1:
                self._fail(key, "grid needs at least one point")
            if m.group(1) == "logspace":
                if not (a > 0 and b > 0):
                    self._fail(key, "logspace bounds must be > 0")
                g = np.geomspace(a, b, n)
            else:
                g = np.linspace(a, b, n)
        if g.size == 0:
            self._fail(key, "empty grid")
        if not np.all(np.isfinite(g)):
            self._fail(key, "grid values must be finite")
        if np.any(np.diff(g) <= 0):
            self._fail(key, "grid must be strictly increasing")
        if positive and np.any(g <= 0):
            self._fail(key, "grid values must be > 0")
        return g


@dataclass
class Config:
    sections: dict[str, Section]

    def __getitem__(self, name: str) -> Section:
        return self.sections[name]

    def echo(self, names) -> list[str]:
        """``[section] key = value`` lines of the effective settings."""
        return [f"[{n}] {k} = {v}" for n in names for k, (v, _) in self.sections[n].values.items()]


def _defaults() -> dict[str, Section]:
    return {s: Section(s, {k: (v, 0) for k, v, _ in items}) for s, items in DEFAULTS.items()}


def parse_config(text: str) -> Config:
    """Overlay ``text`` on the defaults."""
    sections = _defaults()
    current = None
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            name = line[1:-1].strip()
            if name not in sections:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            current = sections[name]
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside of a section")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in current.values:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current.name}]")
        if (current.name, key) in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{current.name}]")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        seen.add((current.name, key))
        current.values[key] = (value, lineno)
    return Config(sections)


def load_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def defaults_text() -> str:
    out = []
    for name, items in DEFAULTS.items():
        out.append(f"[{name}]")
        for k, v, comment in items:
            out.append(f"{k} = {v}    # {comment}")
        out.append("")
    return "\n".join(out)
