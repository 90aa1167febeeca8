"""Dielectric functions on the imaginary frequency axis.

Every energy in this package is an integral over imaginary frequencies
``omega = i*xi``, so models are only ever evaluated at real ``xi >= 0``
(rad/s), where all built-in forms are real and >= 1:

    drude          eps(i xi) = 1 + wp^2 / (xi (xi + gamma))
    oscillators    eps(i xi) = 1 + sum_k C_k / (1 + (xi / w_k)^2)
    tabulated      log-log linear interpolation, clamped at the ends
    constant       eps(i xi) = eps
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import electron_volt, hbar

from .errors import DivergenceError, DomainError, NoContrastError

__all__ = [
    "DielectricModel",
    "eval_epsilon",
    "spectral_u",
    "contrast_factor",
    "load_table",
    "ev_to_rad_s",
    "VACUUM",
    "gold",
    "polystyrene",
    "GOLD_PLASMA_EV",
    "GOLD_DAMPING_EV",
    "POLYSTYRENE_C_UV",
    "POLYSTYRENE_UV_EV",
]

GOLD_PLASMA_EV = 9.0
GOLD_DAMPING_EV = 0.035
# Single UV oscillator: static eps = 1 + C_UV = 2.5, resonance at the
# pi-pi* absorption band of polystyrene.
POLYSTYRENE_C_UV = 1.5
POLYSTYRENE_UV_EV = 6.5

_KINDS = ("drude", "oscillators", "tabulated", "constant")


def ev_to_rad_s(energy_ev: float) -> float:
    """Angular frequency (rad/s) of a photon energy given in eV."""
    return energy_ev * electron_volt / hbar


@dataclass(frozen=True)
class DielectricModel:
    """Immutable description of eps(i xi).

    Use the ``drude``, ``oscillators``, ``tabulated`` and ``constant``
    constructors rather than filling the fields by hand.
    """

    kind: str
    name: str = ""
    eps: float = 1.0
    omega_p: float = 0.0
    gamma: float = 0.0
    strengths: tuple[float, ...] = ()
    resonances: tuple[float, ...] = ()
    table_xi: tuple[float, ...] = field(default=(), repr=False)
    table_eps: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown dielectric model kind {self.kind!r}")
        if self.kind == "constant" and not (np.isfinite(self.eps) and self.eps > 0):
            raise DomainError("constant permittivity must be finite and > 0")
        if self.kind == "drude":
            if not self.omega_p > 0:
                raise DomainError("Drude plasma frequency must be > 0")
            if self.gamma < 0:
                raise DomainError("Drude damping must be >= 0")
        if self.kind == "oscillators":
            if len(self.strengths) != len(self.resonances) or not self.strengths:
                raise DomainError("need one resonance per oscillator strength")
            if any(c < 0 for c in self.strengths):
                raise DomainError("oscillator strengths must be non-negative")
            if any(w <= 0 for w in self.resonances):
                raise DomainError("oscillator resonances must be > 0")
        if self.kind == "tabulated":
            xi = np.asarray(self.table_xi, dtype=float)
            eps = np.asarray(self.table_eps, dtype=float)
            if xi.size < 2 or xi.size != eps.size:
                raise DomainError("tabulated model needs >= 2 (xi, eps) samples")
            if np.any(xi <= 0) or np.any(np.diff(xi) <= 0):
                raise DomainError("tabulated xi must be positive and strictly increasing")
            if np.any(eps <= 0):
                raise DomainError("tabulated eps must be > 0")

    # constructors -------------------------------------------------------
    @classmethod
    def drude(cls, omega_p: float, gamma: float = 0.0, name: str = "drude"):
        return cls("drude", name=name, omega_p=float(omega_p), gamma=float(gamma))

    @classmethod
    def oscillators(cls, strengths, resonances, name: str = "oscillators"):
        return cls(
            "oscillators",
            name=name,
            strengths=tuple(float(c) for c in strengths),
            resonances=tuple(float(w) for w in resonances),
        )

    @classmethod
    def tabulated(cls, xi, eps, name: str = "tabulated"):
        return cls(
            "tabulated",
            name=name,
            table_xi=tuple(float(x) for x in xi),
            table_eps=tuple(float(e) for e in eps),
        )

    @classmethod
    def constant(cls, eps: float, name: str = "constant"):
        return cls("constant", name=name, eps=float(eps))

    # -------------------------------------------------------------------
    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def characteristic_frequency(self) -> float:
        """Frequency scale (rad/s) of the dispersion; 0 for constants."""
        if self.kind == "drude":
            return self.omega_p
        if self.kind == "oscillators":
            return max(self.resonances)
        if self.kind == "tabulated":
            return float(np.sqrt(self.table_xi[0] * self.table_xi[-1]))
        return 0.0

    def __call__(self, xi):
        return eval_epsilon(self, xi)


def eval_epsilon(model: DielectricModel, xi):
    """eps(i xi) for scalar or array ``xi`` in rad/s.

    A damped Drude metal returns ``inf`` at ``xi = 0`` (static metal); the
    undamped one raises :class:`DivergenceError` there.
    """
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("eps(i xi) is defined for xi >= 0 only")
    kind = model.kind
    if kind == "constant":
        out = np.full_like(x, model.eps)
    elif kind == "drude":
        if model.gamma == 0.0 and np.any(x == 0):
            raise DivergenceError("undamped Drude permittivity diverges at xi = 0")
        with np.errstate(divide="ignore"):
            out = 1.0 + model.omega_p**2 / (x * (x + model.gamma))
    elif kind == "oscillators":
        c = np.asarray(model.strengths)
        w = np.asarray(model.resonances)
        out = 1.0 + np.sum(c / (1.0 + (x[..., None] / w) ** 2), axis=-1)
    else:
        lx = np.log(np.asarray(model.table_xi))
        le = np.log(np.asarray(model.table_eps))
        with np.errstate(divide="ignore"):
            out = np.exp(np.interp(np.log(x), lx, le))
    return out if out.ndim else float(out)


def spectral_u(ambient: DielectricModel, body: DielectricModel, xi):
    """Spectral variable u = 1 / (1 - eps_body / eps_ambient).

    Raises :class:`NoContrastError` when the two permittivities coincide.
    An infinite body permittivity maps to u = 0 (perfect conductor).
    """
    ratio = np.asarray(eval_epsilon(body, xi)) / np.asarray(eval_epsilon(ambient, xi))
    if np.any(ratio == 1.0):
        raise NoContrastError("body and ambient permittivities coincide")
    out = 1.0 / (1.0 - ratio)
    return out if out.ndim else float(out)


def contrast_factor(substrate: DielectricModel, ambient: DielectricModel, xi):
    """Image-charge factor f_c = (eps_s - eps_a) / (eps_s + eps_a)."""
    es = np.asarray(eval_epsilon(substrate, xi))
    ea = np.asarray(eval_epsilon(ambient, xi))
    with np.errstate(invalid="ignore"):
        out = np.where(np.isinf(es), 1.0, (es - ea) / (es + ea))
    return out if out.ndim else float(out)


def load_table(path, name: str | None = None) -> DielectricModel:
    """Read a two-column ``xi_rad_per_s epsilon`` file ('#' starts a comment)."""
    path = Path(path)
    rows = []
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DomainError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise DomainError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise DomainError(f"{path}: no data rows")
    xi, eps = zip(*rows)
    return DielectricModel.tabulated(xi, eps, name=name or path.stem)


VACUUM = DielectricModel.constant(1.0, name="vacuum")


def gold(plasma_ev: float = GOLD_PLASMA_EV, damping_ev: float = GOLD_DAMPING_EV,
         ) -> DielectricModel:
    """Drude gold; pass ``damping_ev=0`` for the undamped plasma model."""
    return DielectricModel.drude(ev_to_rad_s(plasma_ev), ev_to_rad_s(damping_ev), name="gold")


def polystyrene(c_uv: float = POLYSTYRENE_C_UV, uv_ev: float = POLYSTYRENE_UV_EV,
                ) -> DielectricModel:
    return DielectricModel.oscillators([c_uv], [ev_to_rad_s(uv_ev)], name="polystyrene")
