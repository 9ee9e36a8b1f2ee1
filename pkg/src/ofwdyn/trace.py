"""Per-round trajectory records produced by the online protocol loop."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RoundRecord:
    """One round of the protocol: the committed decision and its diagnostics.

    ``sigma`` is the step size used to leave round t (an array of inner step
    sizes for multi-update learners, None for learners without one).
    ``x_star``/``f_star`` are filled by the metrics layer, not the learner.
    """

    t: int
    x: np.ndarray
    loss: float
    gradient: np.ndarray
    x_next: np.ndarray
    sigma: float | np.ndarray | None = None
    lmo_point: np.ndarray | None = None
    inner_points: np.ndarray | None = None
    x_star: np.ndarray | None = None
    f_star: float | None = None


@dataclass
class Trace:
    """A full run of one learner against one stream."""

    learner_kind: str
    records: list[RoundRecord]
    alpha_used: float
    sigma_fixed: float | None = None
    inner_k: int | None = None
    minimizer_tol: float | None = field(default=None)

    @property
    def horizon(self) -> int:
        return len(self.records)

    @property
    def final_point(self) -> np.ndarray:
        return self.records[-1].x_next

    def minimizers_filled(self) -> bool:
        return all(r.x_star is not None for r in self.records)
