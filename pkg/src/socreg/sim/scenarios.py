"""Wind scenarios: Gaussian wind speeds pushed through a turbine power curve."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Illustrative mean wind speed (m/s) for 24 fifteen-minute intervals. The
#: values are approximate and meant to be overridden from configuration.
DEFAULT_MU = (
    9.0, 9.5, 10.0, 10.5, 11.0, 11.0, 10.5, 10.0,
    9.5, 9.0, 8.5, 8.0, 7.5, 7.0, 7.0, 7.5,
    8.0, 8.5, 9.0, 9.5, 10.0, 10.5, 10.0, 9.5,
)


@dataclass(frozen=True)
class PowerCurve:
    """IEC-style curve: zero below cut-in, cubic ramp to rated speed, flat to cut-out.

    Output is expressed directly as energy per market interval, capped at
    ``rated``.
    """

    cut_in: float = 3.0
    rated_speed: float = 12.0
    cut_out: float = 25.0
    rated: float = 20.0

    def __post_init__(self):
        if not 0 <= self.cut_in < self.rated_speed <= self.cut_out:
            raise ValueError("power curve needs 0 <= cut_in < rated_speed <= cut_out")
        if self.rated < 0:
            raise ValueError("rated output must be nonnegative")

    def __call__(self, speed) -> np.ndarray:
        v = np.asarray(speed, dtype=float)
        ramp = (v**3 - self.cut_in**3) / (self.rated_speed**3 - self.cut_in**3)
        out = np.where(v < self.cut_in, 0.0, np.where(v < self.rated_speed, ramp, 1.0))
        out = np.where(v > self.cut_out, 0.0, out)
        return self.rated * out


@dataclass(frozen=True)
class Scenario:
    index: int
    seed: int
    speed: tuple[float, ...]
    wind: tuple[float, ...]

    @property
    def horizon(self) -> int:
        return len(self.wind)


def gen_scenarios(n: int, mu: Sequence[float] = DEFAULT_MU, sigma: float = 5.0,
                  seed: int = 0, curve: PowerCurve | None = None) -> list[Scenario]:
    """Draw ``n`` scenarios with speeds ``N(mu_t, sigma)`` truncated at zero.

    Every scenario gets its own child seed from one ``SeedSequence``, so a
    scenario's draws do not depend on how many others are generated.
    """
    if n < 0:
        raise ValueError("scenario count must be nonnegative")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    curve = curve or PowerCurve()
    mu = np.asarray(mu, dtype=float)
    children = np.random.SeedSequence(seed).spawn(n)
    out = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        speed = np.maximum(mu + sigma * rng.standard_normal(mu.size), 0.0)
        out.append(Scenario(i, int(child.generate_state(1)[0]), tuple(speed.tolist()),
                            tuple(curve(speed).tolist())))
    return out
