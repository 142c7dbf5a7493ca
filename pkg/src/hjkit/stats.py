from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolveStats:
    """Bookkeeping returned by every one-pass solver.

    ``order`` lists node ids in the order they were accepted and ``keys`` the
    priority each carried at that moment.  Boundary nodes accepted directly
    (without passing through the heap) are counted in ``seeded``.  When the
    heap key can differ from the solution value, ``values`` holds the value of
    each accepted node in acceptance order.
    """

    n_nodes: int
    pops: int
    seeded: int
    order: np.ndarray
    keys: np.ndarray
    transition_violations: int = 0
    recomputes: int = 0
    unreachable: int = 0
    wall_time: float = 0.0
    values: np.ndarray = None
    extra: dict = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return len(self.order)

    def keys_monotone(self) -> bool:
        k = self.keys[self.seeded:]
        return bool(np.all(np.diff(k) >= 0))

    def inversions(self):
        """``(count, largest drop)`` of accepted values below an earlier one."""
        v = self.keys if self.values is None else self.values
        v = np.asarray(v[self.seeded:], dtype=float)
        if len(v) < 2:
            return 0, 0.0
        drop = np.maximum.accumulate(v)[:-1] - v[1:]
        bad = drop > 0
        return int(bad.sum()), float(drop[bad].max()) if bad.any() else 0.0

    def problems(self) -> list:
        out = []
        if self.pops + self.seeded != self.accepted:
            out.append(f"pops ({self.pops}) + seeded ({self.seeded}) != accepted ({self.accepted})")
        if self.accepted + self.unreachable != self.n_nodes:
            out.append(f"accepted ({self.accepted}) + unreachable ({self.unreachable}) != nodes ({self.n_nodes})")
        if len(np.unique(self.order)) != len(self.order):
            out.append("a node was accepted more than once")
        if not self.keys_monotone():
            out.append("acceptance keys decrease")
        if self.transition_violations:
            out.append(f"{self.transition_violations} illegal state transitions")
        return out

    def check_one_pass(self):
        """Raise ``AssertionError`` if any one-pass invariant is broken."""
        p = self.problems()
        if p:
            raise AssertionError("; ".join(p))
        return True

    def summary(self) -> str:
        return (f"nodes={self.n_nodes} pops={self.pops} seeded={self.seeded} "
                f"recomputes={self.recomputes} unreachable={self.unreachable} "
                f"time={self.wall_time:.3f}s")
