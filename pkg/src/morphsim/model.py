"""Five-lumped-mass dumbbell inertia model.

Two end masses sit on the tether axis (x) and four limb end-effector masses
each sit along y and z. The body is symmetric in all planes, so the inertia
tensor is diagonal and fully described by the three radii, which the robot
actuates (tether length for x, limb extension for y and z).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

# Absolute slop allowed on the inversion radicands before declaring the
# inertia triple unrealizable; absorbs round-trip float noise.
RADICAND_TOL = 1e-12


class InfeasibleInertia(ValueError):
    """An inertia triple that no dumbbell geometry can realize."""


@dataclass
class DumbbellConfig:
    """Masses and radii of the five-mass dumbbell.

    m_x is the mass of each of the two bodies on the tether axis; m_y and m_z
    are the masses of each of the four limb end-effectors along y and z.
    r_* are distances from the system COM, bounded per axis by the actuation
    limits (r_min, r_max).
    """

    m_x: float = 3.0
    m_y: float = 1.5
    m_z: float = 1.5
    r_x: float = 2.8
    r_y: float = 0.2
    r_z: float = 0.2
    r_min: tuple[float, float, float] = (1.4, 0.05, 0.05)
    r_max: tuple[float, float, float] = (4.2, 0.6, 0.6)

    def __post_init__(self) -> None:
        if not (self.m_x > 0 and self.m_y > 0 and self.m_z > 0):
            raise ValueError("all lumped masses must be positive")
        radii = (self.r_x, self.r_y, self.r_z)
        for axis, r, lo, hi in zip("xyz", radii, self.r_min, self.r_max):
            if not 0 < lo <= hi:
                raise ValueError(f"r_min/r_max for axis {axis} must satisfy 0 < r_min <= r_max")
            if not lo <= r <= hi:
                raise ValueError(f"r_{axis}={r} outside actuation limits [{lo}, {hi}]")

    @property
    def total_mass(self) -> float:
        return 2.0 * self.m_x + 4.0 * self.m_y + 4.0 * self.m_z

    def radii(self) -> np.ndarray:
        return np.array([self.r_x, self.r_y, self.r_z])

    def with_radii(self, radii) -> "DumbbellConfig":
        r = np.asarray(radii, dtype=float)
        return replace(self, r_x=float(r[0]), r_y=float(r[1]), r_z=float(r[2]))


@dataclass
class PrincipalInertia:
    """Diagonal of the inertia tensor in the principal frame (kg m^2).

    Off-diagonal terms are identically zero for the symmetric dumbbell, so
    only the diagonal is stored. Any triple produced by a real geometry also
    satisfies the triangle conditions I_aa + I_bb >= I_cc; triples violating
    them cannot be mapped back to radii.
    """

    ixx: float
    iyy: float
    izz: float

    def __post_init__(self) -> None:
        vals = (self.ixx, self.iyy, self.izz)
        if not all(np.isfinite(vals)) or min(vals) <= 0.0:
            raise InfeasibleInertia(f"principal moments must be positive, got {vals}")
        s = sum(vals)
        for v in vals:
            # triangle condition with a small relative slack for float noise
            if s - v < v - RADICAND_TOL * max(1.0, s):
                raise InfeasibleInertia(f"triangle condition violated for {vals}")

    def as_array(self) -> np.ndarray:
        return np.array([self.ixx, self.iyy, self.izz])

    @classmethod
    def from_array(cls, arr) -> "PrincipalInertia":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))


def principal_inertia(cfg: DumbbellConfig) -> PrincipalInertia:
    """Principal moments of the five-mass dumbbell from its masses and radii."""
    mx, my, mz = cfg.m_x, cfg.m_y, cfg.m_z
    rx2, ry2, rz2 = cfg.r_x**2, cfg.r_y**2, cfg.r_z**2
    axial = 2.0 * mx + 4.0 * my + 4.0 * mz
    return PrincipalInertia(
        ixx=4.0 * my * ry2 + 4.0 * mz * rz2,
        iyy=axial * rx2 + 4.0 * mz * rz2,
        izz=axial * rx2 + 4.0 * my * ry2,
    )


def radii_from_inertia(inertia: PrincipalInertia, cfg: DumbbellConfig) -> np.ndarray:
    """Invert the principal moments back to the three radii.

    Raises InfeasibleInertia when a radicand is more negative than the
    tolerance; radicands within [-tol, 0) are treated as exact zeros.
    """
    ixx, iyy, izz = inertia.ixx, inertia.iyy, inertia.izz
    mx, my, mz = cfg.m_x, cfg.m_y, cfg.m_z
    radicands = np.array([
        (izz - ixx + iyy) / (mx + 2.0 * my + 2.0 * mz),
        (ixx - iyy + izz) / (8.0 * my),
        (iyy - izz + ixx) / (8.0 * mz),
    ])
    if np.any(radicands < -RADICAND_TOL):
        raise InfeasibleInertia(
            f"inertia {(ixx, iyy, izz)} not realizable by any dumbbell geometry"
        )
    radicands = np.maximum(radicands, 0.0)
    r = np.sqrt(radicands)
    r[0] *= 0.5
    return r


def inertia_bounds(cfg: DumbbellConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis inertia box [I(r_min), I(r_max)] induced by the radius limits.

    Componentwise bounds only: every reachable inertia lies inside the box,
    but not every point of the box maps back to radii within limits.
    """
    lo = principal_inertia(cfg.with_radii(cfg.r_min)).as_array()
    hi = principal_inertia(cfg.with_radii(cfg.r_max)).as_array()
    return lo, hi


def tether_tension(cfg: DumbbellConfig, omega_y: float, g: float, theta: float) -> float:
    """Tether tension from the spin about y plus the gravity component along
    the dumbbell axis at elevation angle theta."""
    return cfg.m_x * omega_y**2 * cfg.r_x + cfg.m_x * g * np.sin(theta)


def is_taut(tension: float) -> bool:
    """True while the tether carries non-negative tension (rigid-dumbbell
    assumption holds); negative tension would compress the system."""
    return tension >= 0.0
